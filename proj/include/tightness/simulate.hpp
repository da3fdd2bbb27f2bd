#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "tightness/models.hpp"
#include "tightness/monotone_control.hpp"
#include "tightness/rng.hpp"
#include "tightness/step_path.hpp"

namespace tightness {

/**
 * Event consumers for the jump-process loop. A sink sees every state change
 * in time order: event(t, x) for each jump to post-value x, mark_absorbed()
 * when the process leaves the state space, finish(T, x) exactly once at the
 * end. Terminal-only statistics then run without storing the path.
 */
class PathSink {
 public:
  PathSink(double t0, double x0) : t0_(t0), x0_(x0) {}
  void event(double t, double x) { jumps_.push_back({t, x}); }
  void mark_absorbed() { absorbed_ = true; }
  void finish(double T, double) { horizon_ = T; }
  StepPath take() {
    return StepPath(t0_, x0_, std::move(jumps_), horizon_, absorbed_);
  }

 private:
  double t0_;
  double x0_;
  double horizon_ = 0;
  bool absorbed_ = false;
  std::vector<StepPath::Jump> jumps_;
};

// Values at fixed query times (sorted, all >= t0): query t gets the state
// just after t, matching right-continuous evaluation.
class GridSink {
 public:
  GridSink(std::vector<double> times, double x0)
      : times_(std::move(times)), values_(times_.size()), cur_(x0) {}
  void event(double t, double x) {
    while (next_ < times_.size() && times_[next_] < t) values_[next_++] = cur_;
    cur_ = x;
  }
  void mark_absorbed() { absorbed_ = true; }
  void finish(double, double x) {
    cur_ = x;
    while (next_ < times_.size()) values_[next_++] = cur_;
  }
  const std::vector<double>& values() const { return values_; }
  bool absorbed() const { return absorbed_; }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  double cur_;
  std::size_t next_ = 0;
  bool absorbed_ = false;
};

class SupSink {
 public:
  explicit SupSink(double x0) : sup_(x0) {}
  void event(double, double x) { sup_ = std::max(sup_, x); }
  void mark_absorbed() {}
  void finish(double, double) {}
  double sup() const { return sup_; }

 private:
  double sup_;
};

class TerminalSink {
 public:
  explicit TerminalSink(double x0) : x_(x0) {}
  void event(double, double x) { x_ = x; }
  void mark_absorbed() { absorbed_ = true; }
  void finish(double, double x) { x_ = x; }
  double value() const { return x_; }
  bool absorbed() const { return absorbed_; }

 private:
  double x_;
  bool absorbed_ = false;
};

namespace detail {

/**
 * Gillespie loop for the rescaled logistic birth-death process with
 * catastrophes, from state start_x at start_time up to `until`. Exponential
 * clocks race against the next catastrophe; an exact tie goes to the
 * catastrophe. Steps are +-1/n; a catastrophe at t_k multiplies the state by
 * theta_k exactly. A death below zero is recorded, then the path is frozen
 * and marked absorbed. At zero all rates vanish and only catastrophes (which
 * fix zero) remain.
 */
template <class Sink>
void run_lbpwc(const LbpwcParams& p, const CatastropheSchedule& q,
               RngStream& rng, double start_time, double start_x, double until,
               Sink& sink) {
  const double b = p.birth_rate();
  const double d = p.death_rate();
  const double c = p.competition();
  const double n = static_cast<double>(p.n);
  const double step = 1.0 / n;
  const auto& atoms = q.atoms();

  double x = start_x;
  double t = start_time;
  std::size_t ai = 0;
  while (ai < atoms.size() && atoms[ai].time <= start_time) ++ai;

  for (;;) {
    double boundary = until;
    bool is_cat = false;
    if (ai < atoms.size() && atoms[ai].time <= until) {
      boundary = atoms[ai].time;
      is_cat = true;
    }
    while (x > 0 && t < boundary) {
      const double z = x * n;
      const double total = (b + d + c * z) * z;
      if (!(total > 0)) break;
      const double te = t + rng.exp1() / total;
      if (te >= boundary) break;
      t = te;
      x = (rng.unit() * total < b * z) ? x + step : x - step;
      sink.event(t, x);
      if (x < 0) {
        sink.mark_absorbed();
        sink.finish(until, x);
        return;
      }
    }
    t = boundary;
    if (!is_cat) break;
    const double xn = atoms[ai].theta * x;
    if (xn != x) sink.event(t, xn);
    x = xn;
    ++ai;
  }
  sink.finish(until, x);
}

void check_lbpwc_inputs(const LbpwcParams& p, const CatastropheSchedule& q);

}  // namespace detail

// Full trajectory on [0, T] from X(0) = x0 (population x0 * n rounded to the
// lattice).
StepPath simulate_lbpwc(const LbpwcParams& p, const CatastropheSchedule& q,
                        RngStream& rng);

// Trajectory restarted from an arbitrary state: X(start_time) = start_x,
// run up to `until`.
StepPath simulate_lbpwc_from(const LbpwcParams& p,
                             const CatastropheSchedule& q, RngStream& rng,
                             double start_time, double start_x, double until);

// X(until) only, restarted from (start_time, start_x); no path storage.
double simulate_lbpwc_value(const LbpwcParams& p, const CatastropheSchedule& q,
                            RngStream& rng, double start_time, double start_x,
                            double until);

// Values at sorted query times in [0, T], from X(0) = x0.
std::vector<double> simulate_lbpwc_grid(const LbpwcParams& p,
                                        const CatastropheSchedule& q,
                                        RngStream& rng,
                                        const std::vector<double>& times);

double simulate_lbpwc_sup(const LbpwcParams& p, const CatastropheSchedule& q,
                          RngStream& rng);

// Generation sizes Z_0 = z0, ..., Z_generations of a Galton-Watson process
// with per-generation offspring laws, exact in 64-bit integers. Populations
// beyond `cap` (default 2^53) raise GwOverflowError with the generations
// completed so far.
std::vector<std::int64_t> simulate_gw(std::int64_t z0,
                                      const std::vector<OffspringLaw>& laws,
                                      int generations, RngStream& rng,
                                      std::int64_t cap = std::int64_t(1)
                                                         << 53);

// Full-truncation Euler for the limit diffusion between catastrophes,
// recorded at grid times k*dt, catastrophe times and T. dt must be smaller
// than the smallest inter-catastrophe gap.
StepPath simulate_limit_diffusion(const DiffusionParams& p,
                                  const CatastropheSchedule& q,
                                  RngStream& rng);

// Control of the catastrophe schedule: slope 1 plus an atom of size
// (1 - theta_k) at each catastrophe time t_k <= T.
MonotoneControl build_Fn(const CatastropheSchedule& q, double T);

}  // namespace tightness
