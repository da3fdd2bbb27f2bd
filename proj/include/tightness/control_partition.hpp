#pragma once

#include <stdexcept>
#include <vector>

#include "tightness/monotone_control.hpp"
#include "tightness/subdivision.hpp"
#include "tightness/time_change.hpp"

namespace tightness {

/**
 * Certificate for the deterministic base partition of [0, T] against a
 * monotone control F: every cell's left-closed increment F(b_{l+1}-) - F(b_l)
 * stays within mesh_bound = epsilon^3 / (1 + F(T))^(1/3), and the total mass
 * of F-atoms strictly inside (0, T) that are not breakpoints stays within
 * epsilon^3. Both inequalities are re-checked on the constructed output with
 * zero tolerance; ok reports the result.
 */
struct MeshCertificate {
  Subdivision subdivision;
  double mesh_bound;
  double max_increment;
  double missed_jump_mass;
  double epsilon;
  bool ok;
};

// Greedy sweep placing each next breakpoint at the largest admissible time,
// then adding atom times in decreasing size order until the missed mass fits.
MeshCertificate build_mesh_partition(const MonotoneControl& F, double T,
                                     double epsilon);

struct MatchingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MatchedPartition {
  Subdivision bn;
  PiecewiseLinearTimeChange lambda;
  std::vector<double> Fn_at_bn;       // Fn(bn_l), convergence diagnostics
  std::vector<double> Fn_left_at_bn;  // Fn(bn_l-)
};

/**
 * Matches every F-atom sitting at an interior breakpoint of b to its nearest
 * Fn-atom (position within half the minimal F inter-atom gap, size within
 * 50% relative), builds the piecewise-linear time change through the matched
 * pairs fixing 0 and the endpoint, and maps b through it. Loud
 * MatchingError when a breakpoint atom has no admissible partner.
 */
MatchedPartition match_partition(const MonotoneControl& F,
                                 const MonotoneControl& Fn,
                                 const Subdivision& b);

// sup over y in [lo, hi] of F(y + 2 eta) - F(y), with F extended constantly
// past its horizon. Exact for step-plus-slope controls: the sup is attained
// at lo or where an atom enters/leaves the sliding window; all such
// candidates are evaluated.
double window_increment_sup(const MonotoneControl& F, double lo, double hi,
                            double eta);

}  // namespace tightness
