#pragma once

#include <vector>

namespace tightness {

/**
 * Non-decreasing control function F(t) = slope * t + sum of atom sizes at
 * times <= t, normalized so F(0) = 0. The linear part is kept symbolic
 * (slope stored separately) so that controls of the form t + step part stay
 * exact instead of being discretized.
 *
 * A control can be frozen at a cap c: it then equals the unfrozen control's
 * left limit at c for all t >= c (atoms at or after c are dropped and the
 * slope stops accruing). Construction via freeze_control.
 */
class MonotoneControl {
 public:
  struct Atom {
    double time;
    double size;  // >= 0
  };

  MonotoneControl(double slope, std::vector<Atom> atoms, double horizon);

  double slope() const { return slope_; }
  double horizon() const { return horizon_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool frozen() const { return frozen_; }
  double freeze_cap() const { return cap_; }

  double value(double t) const;       // pre: 0 <= t <= horizon
  double left_value(double t) const;  // F(t-); F(0-) = 0

  // Evaluation extended constantly past the horizon (and past the freeze
  // cap); accepts any t >= 0.
  double value_extended(double t) const;

  double total() const { return value(horizon_); }

  // Largest atom with time strictly inside (lo, hi); 0 if none.
  double max_atom_inside(double lo, double hi) const;

 private:
  friend MonotoneControl freeze_control(const MonotoneControl&, double);

  double slope_ = 0;
  double horizon_ = 0;
  double cap_ = 0;  // effective accrual cap; horizon unless frozen
  bool frozen_ = false;
  std::vector<Atom> atoms_;

  double raw_value(double t) const;  // slope*min(t,cap) + atoms with time <= t
};

// Control equal to F before b_next and constant at F(b_next-) from b_next on;
// an atom exactly at b_next is erased. pre: 0 < b_next <= horizon.
MonotoneControl freeze_control(const MonotoneControl& F, double b_next);

}  // namespace tightness
