#pragma once

#include <optional>
#include <vector>

namespace tightness {

// Gap rule for a subdivision b_0 = A < ... < b_L = B. eta_sparse requires
// b_{l+1} - b_l > eta for l < L-1 (last cell exempt); eta_bar_sparse
// requires it for every cell. Comparisons are strict, on doubles.
enum class SparsityMode {
  eta_sparse,
  eta_bar_sparse,
};

struct SparsityTag {
  SparsityMode mode;
  double eta;
};

/**
 * Ordered breakpoints of an interval [A, B], optionally validated against a
 * sparsity tag at construction. Construction throws invalid_argument when
 * breakpoints are not strictly increasing or the tagged gap rule fails.
 */
class Subdivision {
 public:
  explicit Subdivision(std::vector<double> breakpoints);
  Subdivision(std::vector<double> breakpoints, SparsityMode mode, double eta);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  double begin_point() const { return breakpoints_.front(); }
  double end_point() const { return breakpoints_.back(); }
  std::size_t cell_count() const { return breakpoints_.size() - 1; }
  const std::optional<SparsityTag>& sparsity() const { return sparsity_; }

  double min_gap() const;

 private:
  std::vector<double> breakpoints_;
  std::optional<SparsityTag> sparsity_;
};

bool gaps_satisfy(const std::vector<double>& breakpoints, SparsityMode mode,
                  double eta);

// Concatenates subdivisions of abutting intervals (part k ends where part
// k+1 begins) into one subdivision tagged (eta_bar_sparse, eta); throws if
// parts do not abut or the glued gap rule fails.
Subdivision glue_subdivisions(const std::vector<Subdivision>& parts,
                              double eta);

}  // namespace tightness
