#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tightness/modulus.hpp"

namespace tightness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Max pairwise distance over original (untransformed) values v[i..j]; kept
// deliberately independent of the engine's range trick.
double pairwise_osc(const std::vector<double>& v, int i, int j, Metric m) {
  double mx = 0;
  for (int a = i; a <= j; ++a)
    for (int b = a + 1; b <= j; ++b)
      mx = std::max(mx, metric_distance(m, v[a], v[b]));
  return mx;
}

}  // namespace

double modulus_oracle(const StepPath& path, double eta, double A, double B,
                      Metric metric, SparsityMode mode) {
  if (!(eta > 0)) throw std::invalid_argument("modulus_oracle: eta must be > 0");
  if (!(A >= path.t0() && B <= path.horizon() && A < B))
    throw std::domain_error("modulus_oracle: need t0 <= A < B <= horizon");
  const bool etabar = mode == SparsityMode::eta_bar_sparse;
  if (etabar && !detail::gap_ok(A, B, eta))
    throw InfeasibleError(
        "modulus_oracle: no eta-bar-sparse subdivision exists (B - A <= eta)");

  std::vector<double> u;      // jump times in (A, B)
  std::vector<double> v;      // v[0] at A, v[s] post value of u_s
  v.push_back(path.value_at(A));
  for (const StepPath::Jump& j : path.jumps()) {
    if (j.time <= A) continue;
    if (j.time >= B) break;
    u.push_back(j.time);
    v.push_back(j.value);
  }
  const int J = static_cast<int>(u.size());
  if (J > 10)
    throw std::invalid_argument(
        "modulus_oracle: refusing more than 10 jumps in (A, B)");

  // Per jump s: 0 = no breakpoint in [u_s, u_{s+1}), 1 = breakpoint at u_s,
  // 2 = breakpoint at the least admissible double inside (u_s, u_{s+1}).
  std::uint64_t total = 1;
  for (int s = 0; s < J; ++s) total *= 3;

  double best = kInf;
  std::vector<int> sigma(J, 0);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (int s = 0; s < J; ++s) {
      sigma[s] = static_cast<int>(c % 3);
      c /= 3;
    }
    double prev = A;
    int prev_start = 0;
    double max_osc = 0;
    bool valid = true;
    for (int s = 1; s <= J && valid; ++s) {
      if (sigma[s - 1] == 0) continue;
      double unext = (s < J) ? u[s] : B;
      double x;
      int cell_end;
      if (sigma[s - 1] == 1) {
        x = u[s - 1];
        cell_end = s - 1;
        if (!detail::gap_ok(prev, x, eta)) valid = false;
      } else {
        x = std::max(detail::min_advance(prev, eta),
                     detail::next_above(u[s - 1]));
        cell_end = s;
        if (!(x < unext) || !detail::gap_ok(prev, x, eta)) valid = false;
      }
      if (!valid) break;
      max_osc = std::max(max_osc, pairwise_osc(v, prev_start, cell_end, metric));
      prev = x;
      prev_start = s;
    }
    if (!valid) continue;
    if (etabar && !detail::gap_ok(prev, B, eta)) continue;
    max_osc = std::max(max_osc, pairwise_osc(v, prev_start, J, metric));
    best = std::min(best, max_osc);
  }
  return best;
}

}  // namespace tightness
