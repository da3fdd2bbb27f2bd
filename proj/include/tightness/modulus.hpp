#pragma once

#include <stdexcept>

#include "tightness/metric.hpp"
#include "tightness/step_path.hpp"
#include "tightness/subdivision.hpp"

namespace tightness {

struct ModulusResult {
  double value;
  Subdivision witness;  // max in-cell oscillation over it equals value
};

// Thrown when the requested sparsity mode admits no subdivision at all
// (eta_bar_sparse with B - A <= eta).
struct InfeasibleError : std::domain_error {
  using std::domain_error::domain_error;
};

// Exact sup of d(f(s), f(t)) over s, t in the half-open cell [a, b),
// computed from the finite set {f(a)} plus post-jump values inside (a, b).
double oscillation(const StepPath& path, double a, double b, Metric metric);

/**
 * Exact minimum over sparse subdivisions of [A, B] of the maximum in-cell
 * oscillation, with a witness subdivision attaining it.
 *
 * Interior breakpoints either sit exactly at a jump time or are forced to
 * the first admissible double after an earlier breakpoint (gap rule is the
 * strict double comparison b - a > eta). Feasibility of a level is decided
 * by an exact dynamic program over these canonical positions; the level is
 * located by bisection that snaps to attained witness oscillations, so the
 * returned value is exactly the attained minimum.
 */
ModulusResult modulus(const StepPath& path, double eta, double A, double B,
                      Metric metric, SparsityMode mode);

// Single feasibility pass deciding modulus(...) >= delta without building
// witnesses; the fast path for Monte Carlo curves. pre: delta > 0.
bool modulus_at_least(const StepPath& path, double eta, double A, double B,
                      Metric metric, SparsityMode mode, double delta);

// Independent exhaustive oracle: enumerates every breakpoint structure
// (per jump: none / at the jump / first admissible position after it) and
// minimizes the max pairwise in-cell distance. Refuses paths with more
// than 10 jumps inside (A, B).
double modulus_oracle(const StepPath& path, double eta, double A, double B,
                      Metric metric, SparsityMode mode);

namespace detail {

// Definitional double arithmetic shared by the engine and the oracle: what
// the strict gap rule and "first admissible position after p" mean in
// floating point. Everything else about the two implementations differs.
bool gap_ok(double a, double b, double eta);
double next_above(double x);
double min_advance(double p, double eta);  // least x with x - p > eta

double transform_value(Metric m, double v);
double osc_from_range(Metric m, double range);

}  // namespace detail

}  // namespace tightness
