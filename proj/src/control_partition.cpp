#include "tightness/control_partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tightness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest double t in (last, T] with F(t-) - F(last) <= mesh. The predicate
// is monotone in t, true just above last (only slope accrues across an
// empty interval), so plain bisection on doubles lands on the boundary.
double largest_admissible(const MonotoneControl& F, double last, double T,
                          double mesh) {
  const double base = F.value(last);
  const auto ok = [&](double t) { return F.left_value(t) - base <= mesh; };
  if (ok(T)) return T;
  double lo = last;
  double hi = T;
  for (;;) {
    const double mid = lo + (hi - lo) / 2;
    if (!(lo < mid && mid < hi)) break;
    if (ok(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

MeshCertificate build_mesh_partition(const MonotoneControl& F, double T,
                                     double epsilon) {
  if (!(T > 0) || !std::isfinite(T)) {
    throw std::invalid_argument("build_mesh_partition: T must be positive");
  }
  if (T > F.horizon()) {
    throw std::invalid_argument(
        "build_mesh_partition: T exceeds the control horizon");
  }
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument(
        "build_mesh_partition: epsilon must be positive");
  }
  const double eps3 = epsilon * epsilon * epsilon;
  const double mesh = eps3 / std::cbrt(1.0 + F.value(T));
  if (!(mesh > 0)) {
    throw std::invalid_argument(
        "build_mesh_partition: epsilon too small, mesh bound underflows");
  }

  std::vector<double> b;
  b.push_back(0.0);
  while (b.back() < T) {
    const double next = largest_admissible(F, b.back(), T, mesh);
    if (!(next > b.back())) {
      throw std::runtime_error(
          "build_mesh_partition: sweep cannot advance; slope too steep for "
          "the mesh bound at this scale");
    }
    b.push_back(next);
    if (b.size() > 100'000'000) {
      throw std::runtime_error("build_mesh_partition: partition too fine");
    }
  }

  // Missed atoms strictly inside (0, T); atoms at 0 or T never count.
  struct Missed {
    double time;
    double size;
  };
  auto collect_missed = [&](const std::vector<double>& pts) {
    std::vector<Missed> out;
    for (const auto& a : F.atoms()) {
      if (a.time <= 0.0 || a.time >= T || a.size <= 0.0) continue;
      if (!std::binary_search(pts.begin(), pts.end(), a.time)) {
        out.push_back({a.time, a.size});
      }
    }
    return out;
  };

  std::vector<Missed> missed = collect_missed(b);
  double missed_mass = 0;
  for (const auto& m : missed) missed_mass += m.size;
  if (missed_mass > eps3) {
    std::sort(missed.begin(), missed.end(), [](const Missed& x, const Missed& y) {
      if (x.size != y.size) return x.size > y.size;
      return x.time < y.time;
    });
    for (const auto& m : missed) {
      if (!(missed_mass > eps3)) break;
      b.push_back(m.time);
      missed_mass -= m.size;
    }
    std::sort(b.begin(), b.end());
  }

  // Re-derive both certificate quantities from the final breakpoints; the
  // repair step only refines cells, so the mesh bound survives it, but the
  // check below does not rely on that.
  double max_inc = 0;
  for (std::size_t l = 0; l + 1 < b.size(); ++l) {
    max_inc = std::max(max_inc, F.left_value(b[l + 1]) - F.value(b[l]));
  }
  missed_mass = 0;
  for (const auto& m : collect_missed(b)) missed_mass += m.size;

  MeshCertificate cert{Subdivision(std::move(b)), mesh, max_inc, missed_mass,
                       epsilon, false};
  cert.ok = max_inc <= mesh && missed_mass <= eps3;
  return cert;
}

MatchedPartition match_partition(const MonotoneControl& F,
                                 const MonotoneControl& Fn,
                                 const Subdivision& b) {
  if (b.begin_point() != 0.0) {
    throw std::invalid_argument("match_partition: partition must start at 0");
  }
  const double T = b.end_point();
  if (F.horizon() < T || Fn.horizon() < T) {
    throw std::invalid_argument(
        "match_partition: controls must cover the partition interval");
  }
  if (F.slope() != Fn.slope()) {
    throw std::invalid_argument("match_partition: controls have unequal slope");
  }

  const auto& fa = F.atoms();
  double window = T;  // single or no atom: no gap constraint to respect
  for (std::size_t i = 0; i + 1 < fa.size(); ++i) {
    window = std::min(window, (fa[i + 1].time - fa[i].time) / 2);
  }

  const auto& na = Fn.atoms();
  std::vector<PiecewiseLinearTimeChange::Anchor> anchors;
  anchors.push_back({0.0, 0.0});
  const auto& pts = b.breakpoints();
  for (std::size_t l = 1; l + 1 < pts.size(); ++l) {
    const double u = pts[l];
    auto it = std::lower_bound(
        fa.begin(), fa.end(), u,
        [](const MonotoneControl::Atom& a, double t) { return a.time < t; });
    if (it == fa.end() || it->time != u) continue;  // plain breakpoint
    const double s = it->size;
    const MonotoneControl::Atom* best = nullptr;
    for (const auto& c : na) {
      if (!(std::fabs(c.time - u) < window)) continue;
      if (!(std::fabs(c.size - s) < 0.5 * s)) continue;
      if (best == nullptr || std::fabs(c.time - u) < std::fabs(best->time - u)) {
        best = &c;
      }
    }
    if (best == nullptr) {
      std::ostringstream msg;
      msg << "match_partition: no admissible partner for the atom of size "
          << s << " at breakpoint " << u << " (position window " << window
          << ", size window 50%)";
      throw MatchingError(msg.str());
    }
    if (!(best->time > anchors.back().image) || !(best->time < T)) {
      std::ostringstream msg;
      msg << "match_partition: matched atom times are not strictly increasing "
             "inside (0, T); breakpoint "
          << u << " matched to " << best->time;
      throw MatchingError(msg.str());
    }
    anchors.push_back({u, best->time});
  }
  anchors.push_back({T, T});

  PiecewiseLinearTimeChange lambda(std::move(anchors));
  std::vector<double> bn;
  bn.reserve(pts.size());
  for (double t : pts) bn.push_back(lambda(t));

  MatchedPartition out{Subdivision(std::move(bn)), std::move(lambda), {}, {}};
  for (double t : out.bn.breakpoints()) {
    out.Fn_at_bn.push_back(Fn.value(t));
    out.Fn_left_at_bn.push_back(Fn.left_value(t));
  }
  return out;
}

double window_increment_sup(const MonotoneControl& F, double lo, double hi,
                            double eta) {
  if (!(eta > 0) || !std::isfinite(eta)) {
    throw std::invalid_argument("window_increment_sup: eta must be positive");
  }
  if (!(0 <= lo && lo <= hi) || !std::isfinite(hi)) {
    throw std::invalid_argument(
        "window_increment_sup: need 0 <= lo <= hi finite");
  }
  const double width = 2 * eta;
  const auto G = [&](double y) {
    return F.value_extended(y + width) - F.value_extended(y);
  };
  const auto clamp = [&](double y) { return std::min(std::max(y, lo), hi); };

  double best = std::max(G(lo), G(hi));
  // The sup is attained where an atom is at the right edge of the window
  // (y = u - 2 eta), at the left edge about to drop out (y just below u), or
  // where the window starts straddling the accrual cap. Evaluate every such
  // candidate honestly; clamping into [lo, hi] only ever lowers G.
  auto consider = [&](double y) { best = std::max(best, G(clamp(y))); };
  for (const auto& a : F.atoms()) {
    double entry = a.time - width;
    while (!(entry < a.time)) entry = std::nextafter(entry, -kInf);
    consider(entry);
    consider(std::nextafter(a.time, -kInf));
  }
  const double cap = F.freeze_cap();
  consider(cap - width);
  consider(std::nextafter(cap, -kInf));
  return best;
}

}  // namespace tightness
