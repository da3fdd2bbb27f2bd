#pragma once

#include <vector>

#include "tightness/metric.hpp"

namespace tightness {

/**
 * Cadlag piecewise-constant path: initial value at t0, then post-jump values
 * at strictly increasing jump times in (t0, horizon]. Immutable after
 * construction; all operators return new paths, so sharing across threads
 * is safe.
 *
 * value_at is right-continuous: at a jump time it returns the post value.
 * left_limit(t0) equals the initial value (the usual f(0-) = f(0) convention).
 */
class StepPath {
 public:
  struct Jump {
    double time;
    double value;
  };

  StepPath(double t0, double initial, std::vector<Jump> jumps, double horizon,
           bool absorbed = false);

  // convenience: constant path
  static StepPath constant(double t0, double value, double horizon) {
    return StepPath(t0, value, {}, horizon);
  }

  double t0() const { return t0_; }
  double horizon() const { return horizon_; }
  double initial_value() const { return initial_; }
  const std::vector<Jump>& jumps() const { return jumps_; }
  bool absorbed() const { return absorbed_; }

  double value_at(double t) const;    // pre: t0 <= t <= horizon
  double left_limit(double t) const;  // pre: t0 <= t <= horizon

  // max over all attained values (initial + post-jump); the sup over [t0, horizon]
  double max_value() const;

 private:
  double t0_ = 0;
  double horizon_ = 0;
  double initial_ = 0;
  bool absorbed_ = false;
  std::vector<Jump> jumps_;
};

// d(f(t), f(t-)); zero at continuity points.
double jump_size(const StepPath& path, double t, Metric metric);

// Path equal to the input on [t0, b), constant at left_limit(b) from b on.
// A jump exactly at b is erased. pre: t0 < b <= horizon.
StepPath freeze_before(const StepPath& path, double b);

}  // namespace tightness
