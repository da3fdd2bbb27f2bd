#include "tightness/step_path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tightness {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("StepPath: " + what);
}

void check_domain(const StepPath& p, double t) {
  if (!(t >= p.t0() && t <= p.horizon()))
    throw std::domain_error("StepPath: t=" + std::to_string(t) +
                            " outside [t0, horizon]");
}

}  // namespace

StepPath::StepPath(double t0, double initial, std::vector<Jump> jumps,
                   double horizon, bool absorbed)
    : t0_(t0),
      horizon_(horizon),
      initial_(initial),
      absorbed_(absorbed),
      jumps_(std::move(jumps)) {
  require(std::isfinite(t0_), "t0 not finite");
  require(std::isfinite(horizon_) && horizon_ >= t0_, "horizon < t0");
  require(std::isfinite(initial_), "initial value not finite");
  double prev = t0_;
  for (const Jump& j : jumps_) {
    require(std::isfinite(j.time) && std::isfinite(j.value),
            "non-finite jump");
    require(j.time > prev, prev == t0_
                               ? "jump time not after t0"
                               : "jump times not strictly increasing");
    prev = j.time;
  }
  require(jumps_.empty() || jumps_.back().time <= horizon_,
          "jump time past horizon");
}

double StepPath::value_at(double t) const {
  check_domain(*this, t);
  // last jump with time <= t
  auto it = std::upper_bound(
      jumps_.begin(), jumps_.end(), t,
      [](double lhs, const Jump& j) { return lhs < j.time; });
  if (it == jumps_.begin()) return initial_;
  return std::prev(it)->value;
}

double StepPath::left_limit(double t) const {
  check_domain(*this, t);
  if (t == t0_) return initial_;
  // last jump with time < t
  auto it = std::lower_bound(
      jumps_.begin(), jumps_.end(), t,
      [](const Jump& j, double rhs) { return j.time < rhs; });
  if (it == jumps_.begin()) return initial_;
  return std::prev(it)->value;
}

double StepPath::max_value() const {
  double m = initial_;
  for (const Jump& j : jumps_)
    if (j.value > m) m = j.value;
  return m;
}

double jump_size(const StepPath& path, double t, Metric metric) {
  return metric_distance(metric, path.value_at(t), path.left_limit(t));
}

StepPath freeze_before(const StepPath& path, double b) {
  if (!(b > path.t0() && b <= path.horizon()))
    throw std::domain_error("freeze_before: b outside (t0, horizon]");
  std::vector<StepPath::Jump> kept;
  for (const StepPath::Jump& j : path.jumps()) {
    if (j.time >= b) break;
    kept.push_back(j);
  }
  return StepPath(path.t0(), path.initial_value(), std::move(kept),
                  path.horizon(), path.absorbed());
}

}  // namespace tightness
