#include "tightness/modulus.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

namespace tightness {

namespace detail {

bool gap_ok(double a, double b, double eta) { return b - a > eta; }

double next_above(double x) {
  return std::nextafter(x, std::numeric_limits<double>::infinity());
}

double min_advance(double p, double eta) {
  double x = p + eta;
  while (!(x - p > eta)) x = next_above(x);
  return x;
}

double transform_value(Metric m, double v) {
  return m == Metric::exp_compactified ? std::exp(-v) : v;
}

double osc_from_range(Metric m, double range) {
  if (m == Metric::bounded_euclidean && range > 1.0) return 1.0;
  return range;
}

}  // namespace detail

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Problem after domain checks: jump times strictly inside (A, B) and the
// transformed value sequence w[0..J] (w[0] is the value in force at A).
struct Prepared {
  double A = 0, B = 0, eta = 0;
  bool etabar = false;
  Metric metric = Metric::euclidean;
  std::vector<double> u;
  std::vector<double> w;
  int jump_count() const { return static_cast<int>(u.size()); }
};

Prepared prepare(const StepPath& path, double eta, double A, double B,
                 Metric metric, SparsityMode mode) {
  if (!(eta > 0)) throw std::invalid_argument("modulus: eta must be > 0");
  if (!(A >= path.t0() && B <= path.horizon() && A < B))
    throw std::domain_error("modulus: need t0 <= A < B <= horizon");
  if (mode == SparsityMode::eta_bar_sparse && !detail::gap_ok(A, B, eta))
    throw InfeasibleError(
        "modulus: no eta-bar-sparse subdivision exists (B - A <= eta)");
  Prepared p;
  p.A = A;
  p.B = B;
  p.eta = eta;
  p.etabar = mode == SparsityMode::eta_bar_sparse;
  p.metric = metric;
  p.w.push_back(detail::transform_value(metric, path.value_at(A)));
  for (const StepPath::Jump& j : path.jumps()) {
    if (j.time <= A) continue;
    if (j.time >= B) break;
    p.u.push_back(j.time);
    p.w.push_back(detail::transform_value(metric, j.value));
  }
  return p;
}

// Oscillation "<= level" on a cell is equivalent to a transformed-value
// range threshold (the transforms are monotone along the real line).
double range_threshold(Metric m, double level) {
  if (m == Metric::bounded_euclidean && level >= 1.0) return kInf;
  return level;
}

// a[i] = least start such that range(w[a..i]) <= r; monotone two-pointer
// with max/min deques.
void window_starts(const std::vector<double>& w, double r,
                   std::vector<std::int32_t>& a) {
  int n = static_cast<int>(w.size());
  a.assign(n, 0);
  std::deque<int> maxq, minq;
  int lo = 0;
  for (int i = 0; i < n; ++i) {
    while (!maxq.empty() && w[maxq.back()] < w[i]) maxq.pop_back();
    maxq.push_back(i);
    while (!minq.empty() && w[minq.back()] > w[i]) minq.pop_back();
    minq.push_back(i);
    while (w[maxq.front()] - w[minq.front()] > r) {
      ++lo;
      if (maxq.front() < lo) maxq.pop_front();
      if (minq.front() < lo) minq.pop_front();
    }
    a[i] = lo;
  }
}

// Sliding-window minimum over slot positions, earliest slot wins ties.
struct MonoDeque {
  struct Entry {
    int slot;
    double val;
  };
  std::deque<Entry> q;
  void clear() { q.clear(); }
  void push(int slot, double val) {
    while (!q.empty() && q.back().val > val) q.pop_back();
    q.push_back({slot, val});
  }
  bool best(int lo, int* slot, double* val) {
    while (!q.empty() && q.front().slot < lo) q.pop_front();
    if (q.empty() || q.front().val == kInf) return false;
    *slot = q.front().slot;
    *val = q.front().val;
    return true;
  }
};

// Breakpoint node: slot s is the jump index (1-based); a clean node sits
// exactly at u_s, a carry node strictly inside (u_s, u_{s+1}) at the least
// admissible double. Chains of nodes are exactly the subdivisions whose
// cells all have transformed range <= r.
struct Parent {
  std::int32_t slot = -1;
  std::uint8_t type = 0;  // 0 start, 1 clean, 2 carry
};

struct Workspace {
  std::vector<std::int32_t> a;
  std::vector<double> m_clean, m_carry, slot_min;
  std::vector<Parent> p_clean, p_carry;
  std::vector<std::uint32_t> d_clean, d_carry;
  MonoDeque d1, d2;
};

struct CellRef {
  int start;
  int end;  // inclusive indices into w
};

struct PassResult {
  bool ok = false;
  double achieved = 0;
  std::vector<double> interior;       // interior breakpoint positions
  std::vector<CellRef> cells;         // index ranges, only when witnessed
};

// One exact feasibility pass at the given oscillation level.
PassResult feasibility(const Prepared& p, double level, bool want_witness,
                       Workspace& ws) {
  const int J = p.jump_count();
  const double r = range_threshold(p.metric, level);
  window_starts(p.w, r, ws.a);
  const std::vector<std::int32_t>& a = ws.a;

  auto range_of = [&](int i, int j) {
    double mn = p.w[i], mx = p.w[i];
    for (int k = i + 1; k <= j; ++k) {
      mn = std::min(mn, p.w[k]);
      mx = std::max(mx, p.w[k]);
    }
    return mx - mn;
  };

  PassResult res;
  if (a[J] == 0) {  // the single cell [A, B) already fits
    res.ok = true;
    res.achieved = detail::osc_from_range(p.metric, range_of(0, J));
    if (want_witness) res.cells.push_back({0, J});
    return res;
  }

  ws.m_clean.assign(J + 1, kInf);
  ws.m_carry.assign(J + 1, kInf);
  ws.slot_min.assign(J + 1, kInf);
  if (want_witness) {
    ws.p_clean.assign(J + 1, Parent{});
    ws.p_carry.assign(J + 1, Parent{});
    ws.d_clean.assign(J + 1, 0);
    ws.d_carry.assign(J + 1, 0);
  }
  ws.d1.clear();
  ws.d2.clear();

  auto depth_of = [&](int slot, std::uint8_t type) -> std::uint32_t {
    if (slot == 0) return 0;  // start
    return type == 1 ? ws.d_clean[slot] : ws.d_carry[slot];
  };

  for (int s = 1; s <= J; ++s) {
    const double us = p.u[s - 1];
    const double unext = (s < J) ? p.u[s] : p.B;
    if (s - 1 >= 1) {
      ws.d1.push(s - 1, ws.slot_min[s - 1]);
      ws.d2.push(s - 1, ws.slot_min[s - 1]);
    }

    // clean node at u_s: previous cell is w[src .. s-1]
    {
      const int lo = a[s - 1];
      double best_val = kInf;
      int best_slot = -1;
      std::uint8_t best_type = 0;
      if (lo == 0) {  // the start point A is admissible and minimal
        best_val = p.A;
        best_slot = 0;
      } else {
        int sl;
        double v;
        if (ws.d1.best(lo, &sl, &v)) {
          best_val = v;
          best_slot = sl;
          best_type = ws.m_clean[sl] <= ws.m_carry[sl] ? 1 : 2;
        }
      }
      if (best_slot >= 0 && detail::gap_ok(best_val, us, p.eta)) {
        ws.m_clean[s] = us;
        if (want_witness) {
          ws.p_clean[s] = {best_slot, best_type};
          ws.d_clean[s] = depth_of(best_slot, best_type) + 1;
        }
      }
    }

    // carry node inside (u_s, unext): previous cell is w[src .. s]
    {
      const int lo = a[s];
      double best_val = kInf;
      int best_slot = -1;
      std::uint8_t best_type = 0;
      if (lo == 0) {
        best_val = p.A;
        best_slot = 0;
      } else if (lo <= s - 1) {
        int sl;
        double v;
        if (ws.d2.best(lo, &sl, &v)) {
          best_val = v;
          best_slot = sl;
          best_type = ws.m_clean[sl] <= ws.m_carry[sl] ? 1 : 2;
        }
      }
      if (best_slot >= 0) {
        double x = std::max(detail::min_advance(best_val, p.eta),
                            detail::next_above(us));
        if (x < unext) {
          ws.m_carry[s] = x;
          if (want_witness) {
            ws.p_carry[s] = {best_slot, best_type};
            ws.d_carry[s] = depth_of(best_slot, best_type) + 1;
          }
        }
      }
    }

    ws.slot_min[s] = std::min(ws.m_clean[s], ws.m_carry[s]);
  }

  // End: last cell is w[s .. J] from node (s, type); pick the valid end of
  // least depth, then least slot, clean before carry.
  int end_slot = -1;
  std::uint8_t end_type = 0;
  std::uint32_t end_depth = 0;
  for (int s = std::max<int>(a[J], 1); s <= J; ++s) {
    for (std::uint8_t type = 1; type <= 2; ++type) {
      double m = type == 1 ? ws.m_clean[s] : ws.m_carry[s];
      if (m == kInf) continue;
      if (p.etabar && !detail::gap_ok(m, p.B, p.eta)) continue;
      if (!want_witness) {
        res.ok = true;
        return res;
      }
      std::uint32_t d = type == 1 ? ws.d_clean[s] : ws.d_carry[s];
      if (end_slot < 0 || d < end_depth ||
          (d == end_depth && (s < end_slot ||
                              (s == end_slot && type < end_type)))) {
        end_slot = s;
        end_type = type;
        end_depth = d;
      }
    }
  }
  if (end_slot < 0) return res;  // infeasible

  // Reconstruct the chain.
  res.ok = true;
  std::vector<std::pair<int, std::uint8_t>> chain;  // (slot, type), reversed
  int slot = end_slot;
  std::uint8_t type = end_type;
  while (slot != 0) {
    chain.push_back({slot, type});
    Parent par = type == 1 ? ws.p_clean[slot] : ws.p_carry[slot];
    slot = par.slot;
    type = par.type;
  }
  std::reverse(chain.begin(), chain.end());

  res.interior.reserve(chain.size());
  res.cells.reserve(chain.size() + 1);
  int cell_start = 0;
  for (const auto& [sl, ty] : chain) {
    res.interior.push_back(ty == 1 ? ws.m_clean[sl] : ws.m_carry[sl]);
    res.cells.push_back({cell_start, ty == 1 ? sl - 1 : sl});
    cell_start = sl;
  }
  res.cells.push_back({cell_start, J});
  double achieved = 0;
  for (const CellRef& c : res.cells)
    achieved = std::max(
        achieved, detail::osc_from_range(p.metric, range_of(c.start, c.end)));
  res.achieved = achieved;
  return res;
}

// Greedy left-to-right merge of witness cells whose union still oscillates
// within value: drops redundant breakpoints (gaps only grow, so sparsity is
// preserved).
void simplify_witness(const Prepared& p, double value, PassResult& res) {
  if (res.interior.empty()) return;
  std::vector<double> interior;
  std::vector<CellRef> cells;
  CellRef cur = res.cells.front();
  double mn = p.w[cur.start], mx = p.w[cur.start];
  for (int k = cur.start + 1; k <= cur.end; ++k) {
    mn = std::min(mn, p.w[k]);
    mx = std::max(mx, p.w[k]);
  }
  for (std::size_t i = 0; i + 1 < res.cells.size(); ++i) {
    const CellRef& next = res.cells[i + 1];
    double nmn = mn, nmx = mx;
    for (int k = next.start; k <= next.end; ++k) {
      nmn = std::min(nmn, p.w[k]);
      nmx = std::max(nmx, p.w[k]);
    }
    if (detail::osc_from_range(p.metric, nmx - nmn) <= value) {
      cur.end = next.end;  // merge, drop breakpoint i
      mn = nmn;
      mx = nmx;
    } else {
      interior.push_back(res.interior[i]);
      cells.push_back(cur);
      cur = next;
      mn = p.w[next.start];
      mx = p.w[next.start];
      for (int k = next.start + 1; k <= next.end; ++k) {
        mn = std::min(mn, p.w[k]);
        mx = std::max(mx, p.w[k]);
      }
    }
  }
  cells.push_back(cur);
  res.interior = std::move(interior);
  res.cells = std::move(cells);
}

Subdivision to_subdivision(const Prepared& p, const PassResult& res,
                           SparsityMode mode) {
  std::vector<double> b;
  b.reserve(res.interior.size() + 2);
  b.push_back(p.A);
  b.insert(b.end(), res.interior.begin(), res.interior.end());
  b.push_back(p.B);
  return Subdivision(std::move(b), mode, p.eta);
}

}  // namespace

double oscillation(const StepPath& path, double a, double b, Metric metric) {
  if (!(a >= path.t0() && b <= path.horizon()))
    throw std::domain_error("oscillation: [a, b) outside path domain");
  if (!(a < b)) throw std::domain_error("oscillation: need a < b");
  double v = detail::transform_value(metric, path.value_at(a));
  double mn = v, mx = v;
  for (const StepPath::Jump& j : path.jumps()) {
    if (j.time <= a) continue;
    if (j.time >= b) break;
    double t = detail::transform_value(metric, j.value);
    mn = std::min(mn, t);
    mx = std::max(mx, t);
  }
  return detail::osc_from_range(metric, mx - mn);
}

ModulusResult modulus(const StepPath& path, double eta, double A, double B,
                      Metric metric, SparsityMode mode) {
  Prepared p = prepare(path, eta, A, B, metric, mode);
  Workspace ws;

  PassResult best = feasibility(p, 0.0, true, ws);
  double value = 0;
  if (!best.ok) {
    // whole-interval witness is always admissible and attains its own
    // oscillation, so the modulus lives in (0, hi] with hi attained
    double whole = 0;
    {
      double mn = p.w[0], mx = p.w[0];
      for (double w : p.w) {
        mn = std::min(mn, w);
        mx = std::max(mx, w);
      }
      whole = detail::osc_from_range(p.metric, mx - mn);
    }
    best = PassResult{};
    best.ok = true;
    best.achieved = whole;
    best.cells.push_back({0, p.jump_count()});
    double lo = 0, hi = whole;
    for (;;) {
      double mid = lo + (hi - lo) / 2;
      if (!(mid > lo && mid < hi)) break;
      PassResult f = feasibility(p, mid, true, ws);
      if (f.ok) {
        hi = f.achieved;  // snap to the attained witness oscillation
        best = std::move(f);
      } else {
        lo = mid;
      }
    }
    value = hi;
  }

  simplify_witness(p, value, best);
  assert(([&] {
    double m = 0;
    for (const CellRef& c : best.cells) {
      double mn = p.w[c.start], mx = p.w[c.start];
      for (int k = c.start + 1; k <= c.end; ++k) {
        mn = std::min(mn, p.w[k]);
        mx = std::max(mx, p.w[k]);
      }
      m = std::max(m, detail::osc_from_range(p.metric, mx - mn));
    }
    return m == value;
  }()));
  return ModulusResult{value, to_subdivision(p, best, mode)};
}

bool modulus_at_least(const StepPath& path, double eta, double A, double B,
                      Metric metric, SparsityMode mode, double delta) {
  if (!(delta > 0))
    throw std::invalid_argument("modulus_at_least: delta must be > 0");
  Prepared p = prepare(path, eta, A, B, metric, mode);
  Workspace ws;
  double probe = std::nextafter(delta, -kInf);
  PassResult f = feasibility(p, probe, false, ws);
  return !f.ok;
}

}  // namespace tightness
