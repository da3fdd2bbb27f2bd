#include "tightness/time_change.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tightness {

PiecewiseLinearTimeChange::PiecewiseLinearTimeChange(std::vector<Anchor> anchors)
    : anchors_(std::move(anchors)) {
  if (anchors_.size() < 2)
    throw std::invalid_argument("time change: need at least two anchors");
  if (!(anchors_.front().s == 0 && anchors_.front().image == 0))
    throw std::invalid_argument("time change: first anchor must be (0, 0)");
  for (std::size_t i = 0; i + 1 < anchors_.size(); ++i) {
    bool ok = std::isfinite(anchors_[i + 1].s) &&
              std::isfinite(anchors_[i + 1].image) &&
              anchors_[i + 1].s > anchors_[i].s &&
              anchors_[i + 1].image > anchors_[i].image;
    if (!ok)
      throw std::invalid_argument(
          "time change: anchors must be strictly increasing in both "
          "coordinates");
  }
}

double PiecewiseLinearTimeChange::operator()(double t) const {
  if (!(t >= 0 && t <= domain_end()))
    throw std::domain_error("time change: t outside domain");
  auto it = std::lower_bound(
      anchors_.begin(), anchors_.end(), t,
      [](const Anchor& a, double rhs) { return a.s < rhs; });
  if (it != anchors_.end() && it->s == t) return it->image;  // anchor hit
  const Anchor& hi = *it;
  const Anchor& lo = *std::prev(it);
  return lo.image + (t - lo.s) * (hi.image - lo.image) / (hi.s - lo.s);
}

PiecewiseLinearTimeChange PiecewiseLinearTimeChange::inverse() const {
  std::vector<Anchor> inv;
  inv.reserve(anchors_.size());
  for (const Anchor& a : anchors_) inv.push_back({a.image, a.s});
  return PiecewiseLinearTimeChange(std::move(inv));
}

StepPath apply_time_change(const PiecewiseLinearTimeChange& lambda,
                           const StepPath& path) {
  if (!(path.t0() >= 0 && path.horizon() <= lambda.domain_end()))
    throw std::domain_error("time change: domain does not cover path");
  std::vector<StepPath::Jump> jumps;
  jumps.reserve(path.jumps().size());
  for (const StepPath::Jump& j : path.jumps())
    jumps.push_back({lambda(j.time), j.value});
  return StepPath(lambda(path.t0()), path.initial_value(), std::move(jumps),
                  lambda(path.horizon()), path.absorbed());
}

}  // namespace tightness
