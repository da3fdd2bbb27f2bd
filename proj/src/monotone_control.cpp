#include "tightness/monotone_control.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tightness {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("MonotoneControl: " + what);
}

}  // namespace

MonotoneControl::MonotoneControl(double slope, std::vector<Atom> atoms,
                                 double horizon)
    : slope_(slope), horizon_(horizon), cap_(horizon), atoms_(std::move(atoms)) {
  require(std::isfinite(slope_) && slope_ >= 0, "slope must be >= 0");
  require(std::isfinite(horizon_) && horizon_ > 0, "horizon must be > 0");
  double prev = 0;
  for (const Atom& a : atoms_) {
    require(std::isfinite(a.time) && a.time > prev,
            "atom times must be strictly increasing in (0, horizon]");
    require(a.time <= horizon_, "atom time past horizon");
    require(std::isfinite(a.size) && a.size >= 0, "atom size must be >= 0");
    prev = a.time;
  }
}

double MonotoneControl::raw_value(double t) const {
  double te = t < cap_ ? t : cap_;
  double v = slope_ * te;
  for (const Atom& a : atoms_) {
    if (a.time > t) break;
    v += a.size;
  }
  return v;
}

double MonotoneControl::value(double t) const {
  if (!(t >= 0 && t <= horizon_))
    throw std::domain_error("MonotoneControl: t outside [0, horizon]");
  return raw_value(t);
}

double MonotoneControl::left_value(double t) const {
  if (!(t >= 0 && t <= horizon_))
    throw std::domain_error("MonotoneControl: t outside [0, horizon]");
  if (t == 0) return 0;
  double te = t < cap_ ? t : cap_;
  double v = slope_ * te;
  for (const Atom& a : atoms_) {
    if (a.time >= t) break;
    v += a.size;
  }
  return v;
}

double MonotoneControl::value_extended(double t) const {
  if (!(t >= 0)) throw std::domain_error("MonotoneControl: t < 0");
  return raw_value(t < horizon_ ? t : horizon_);
}

double MonotoneControl::max_atom_inside(double lo, double hi) const {
  double m = 0;
  for (const Atom& a : atoms_) {
    if (a.time >= hi) break;
    if (a.time > lo && a.size > m) m = a.size;
  }
  return m;
}

MonotoneControl freeze_control(const MonotoneControl& F, double b_next) {
  if (!(b_next > 0 && b_next <= F.horizon()))
    throw std::domain_error("freeze_control: b_next outside (0, horizon]");
  std::vector<MonotoneControl::Atom> kept;
  for (const MonotoneControl::Atom& a : F.atoms()) {
    if (a.time >= b_next) break;
    kept.push_back(a);
  }
  MonotoneControl out(F.slope(), std::move(kept), F.horizon());
  out.cap_ = b_next < F.freeze_cap() ? b_next : F.freeze_cap();
  out.frozen_ = true;
  return out;
}

}  // namespace tightness
