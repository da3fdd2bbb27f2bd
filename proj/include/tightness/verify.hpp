#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tightness/metric.hpp"
#include "tightness/models.hpp"
#include "tightness/monotone_control.hpp"
#include "tightness/step_path.hpp"
#include "tightness/subdivision.hpp"

namespace tightness {

/**
 * Monte Carlo summary with a 99% normal confidence interval:
 * ci_halfwidth = 2.576 * sqrt(variance / count), variance the sample
 * variance. Samples are reduced by pairwise summation so the result does not
 * depend on how replicas were scheduled.
 */
struct MCEstimate {
  std::size_t count = 0;
  double mean = 0;
  double variance = 0;
  double ci_halfwidth = 0;
  std::uint64_t seed = 0;
};

MCEstimate summarize_samples(const std::vector<double>& samples,
                             std::uint64_t seed);

// Two-sample Kolmogorov-Smirnov distance sup_x |F_a(x) - F_b(x)|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Runs fn(i) for i in [0, count) across `threads` workers. Each index writes
// only its own slots, so results are identical for any thread count.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn);

/**
 * Marker times of one frozen path over one window [b_lo, b_hi]:
 * upsilon[0] = b_lo, and upsilon[i+1] is the first time >= upsilon[i] at
 * which the path sits at capped distance >= epsilon from its value at
 * upsilon[i] (+inf when it never does; the vector ends at the first +inf).
 * upsilon_bar anchors the same scan at b_hi - 2*eta.
 */
struct StoppingTimeTrace {
  double epsilon = 0;
  double eta = 0;
  double b_lo = 0;
  double b_hi = 0;
  std::vector<double> upsilon;
  double upsilon_bar = 0;

  // upsilon(i) with the +inf tail made explicit.
  double upsilon_at(std::size_t i) const;
};

StoppingTimeTrace compute_stopping_times(const StepPath& path, double b_lo,
                                         double b_hi, double epsilon,
                                         double eta, Metric metric);

/**
 * Pathwise inequality per window: the capped eta-bar-sparse modulus of the
 * path frozen at the window end is bounded by
 *   1{upsilon(m) <= b_hi} + sum_{i<m} 1{upsilon(i+1) - upsilon(i) <= eta}
 *   + 6*epsilon + 2*1{upsilon_bar <= b_hi}.
 * The inequality is guaranteed for 0 < eta < (min window length)/2, so a
 * violation means a bug in either the modulus engine or the stopping-time
 * scan.
 */
struct LemmaWindow {
  double b_lo = 0;
  double b_hi = 0;
  double lhs = 0;
  double rhs = 0;
  bool indicator_m = false;
  int small_gap_count = 0;
  bool indicator_bar = false;
  bool holds = false;
};

struct LemmaReport {
  bool all_hold = false;
  std::vector<LemmaWindow> windows;
};

LemmaReport check_lemma_decomposition(const StepPath& path,
                                      const Subdivision& bn, double epsilon,
                                      double eta, int m,
                                      Metric metric = Metric::euclidean);

// One scaling family: shared individual rates and schedule, indexed by n.
struct ModelFamily {
  double lambda = 0;
  double mu = 0;
  double kappa = 0;
  double gamma = 0;
  double x0 = 1;
  double T = 1;
  CatastropheSchedule schedule;

  LbpwcParams params_for(long n) const {
    return LbpwcParams{lambda, mu, kappa, gamma, n, x0, T};
  }
};

/**
 * Compact-containment table: for each (n, K) the estimated probability that
 * sup_{t <= T} X^n(t) >= K, all K sharing one set of sup samples per n so
 * the table is exactly non-increasing in K. The verdict reports, per
 * epsilon level, the smallest K whose estimate maximized over the two
 * largest n stays <= epsilon.
 */
struct A1Row {
  long n = 0;
  double K = 0;
  MCEstimate est;
};

struct A1Verdict {
  double eps_level = 0;
  bool found = false;
  double K = 0;
};

struct A1Result {
  std::vector<A1Row> rows;
  std::vector<A1Verdict> verdicts;
};

A1Result check_a1(const ModelFamily& family, const std::vector<long>& n_grid,
                  const std::vector<double>& K_grid, std::size_t replicas,
                  std::uint64_t seed, const std::vector<double>& eps_levels,
                  int threads = 1);

/**
 * Conditional-oscillation table: for each grid point (s, t, x0) the
 * estimate of E[1 ∧ |X^n(t) - x0|^2 | X^n(s) = x0] by restarting the
 * simulator at (s, x0), compared with the control increment
 * Fn(t) - Fn(s). When eta_bar0 is set, grid points whose increment exceeds
 * it are dropped (the small-increment variant). A point with zero increment
 * but an estimate beyond its own CI raises the hard-violation flag: the
 * bound forces constancy there. When c_k is set the verdict additionally
 * requires (mean - ci)/increment <= c_k at every point.
 */
struct A2Point {
  double s = 0;
  double t = 0;
  double x0 = 0;
  MCEstimate est;
  double f_increment = 0;
  double ratio = 0;  // mean / f_increment; 0 when the increment is 0
  bool hard_violation = false;
};

struct A2Result {
  std::vector<A2Point> points;
  std::size_t dropped = 0;
  double max_ratio = 0;
  double max_ratio_minus_ci = 0;
  bool any_hard_violation = false;
  std::optional<double> c_k;
  bool within_c_k = true;
};

A2Result check_a2(const ModelFamily& family, long n, double K,
                  const MonotoneControl& Fn,
                  const std::vector<std::array<double, 3>>& grid,
                  std::size_t replicas, std::uint64_t seed,
                  std::optional<double> eta_bar0 = std::nullopt,
                  std::optional<double> c_k = std::nullopt, int threads = 1);

/**
 * For each (n, eta) the estimated probability that the capped eta-sparse
 * modulus of X^n over [0, T] is >= delta. All eta share one set of
 * simulated paths per n, so each row is exactly non-increasing as eta
 * shrinks (the modulus is monotone in eta on a fixed path).
 */
struct TightnessRow {
  long n = 0;
  double eta = 0;
  MCEstimate est;
};

struct TightnessResult {
  double delta = 0;
  std::vector<TightnessRow> rows;
};

TightnessResult tightness_curve(const ModelFamily& family,
                                const std::vector<long>& n_grid,
                                const std::vector<double>& eta_grid,
                                double delta, std::size_t replicas,
                                std::uint64_t seed, int threads = 1);

/**
 * Proxy for the supremum over stopping-time pairs of
 * E[d'(X(upsilon), X(upsilon'))^2; upsilon' <= upsilon <= upsilon' + eta],
 * maximized over the hitting-time family (marker times for each epsilon in
 * eps_family) plus deterministic times in the window, with both values
 * required to stay in [0, K]. The estimate must stay below five times the
 * window increment sup of the frozen control plus the CI; only a necessary
 * condition, but a sharp regression detector.
 */
struct MProxyResult {
  MCEstimate est;
  double bound = 0;  // 5 * window_increment_sup of the frozen control
  std::string best_pair;  // the maximizing stopping-time pair, for the report
  bool within = false;
};

MProxyResult m_proxy(const ModelFamily& family, long n,
                     const MonotoneControl& Fn, double b_lo, double b_hi,
                     double eta, double K,
                     const std::vector<double>& eps_family,
                     std::size_t replicas, std::uint64_t seed,
                     int threads = 1);

}  // namespace tightness
