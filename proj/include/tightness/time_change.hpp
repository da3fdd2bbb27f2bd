#pragma once

#include <vector>

#include "tightness/step_path.hpp"

namespace tightness {

/**
 * Strictly increasing piecewise-linear bijection through anchor points
 * (s_i, image_i), with the first anchor at (0, 0). Evaluation at an anchor
 * abscissa returns the anchor image exactly (no interpolation rounding).
 */
class PiecewiseLinearTimeChange {
 public:
  struct Anchor {
    double s;
    double image;
  };

  explicit PiecewiseLinearTimeChange(std::vector<Anchor> anchors);

  static PiecewiseLinearTimeChange identity(double end) {
    return PiecewiseLinearTimeChange({{0.0, 0.0}, {end, end}});
  }

  const std::vector<Anchor>& anchors() const { return anchors_; }
  double domain_end() const { return anchors_.back().s; }
  double range_end() const { return anchors_.back().image; }

  double operator()(double t) const;  // pre: 0 <= t <= domain_end

  PiecewiseLinearTimeChange inverse() const;

 private:
  std::vector<Anchor> anchors_;
};

// Jump times mapped through lambda; values preserved. pre: lambda's domain
// covers [t0, horizon] of the path.
StepPath apply_time_change(const PiecewiseLinearTimeChange& lambda,
                           const StepPath& path);

}  // namespace tightness
