#include "tightness/subdivision.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tightness {

namespace {

void validate_increasing(const std::vector<double>& b) {
  if (b.size() < 2)
    throw std::invalid_argument("Subdivision: need at least two breakpoints");
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    if (!(std::isfinite(b[i]) && b[i] < b[i + 1]))
      throw std::invalid_argument(
          "Subdivision: breakpoints must be finite and strictly increasing");
  }
  if (!std::isfinite(b.back()))
    throw std::invalid_argument("Subdivision: non-finite breakpoint");
}

}  // namespace

bool gaps_satisfy(const std::vector<double>& b, SparsityMode mode, double eta) {
  std::size_t last = b.size() - 1;
  std::size_t constrained = (mode == SparsityMode::eta_bar_sparse)
                                ? last
                                : (last > 0 ? last - 1 : 0);
  for (std::size_t i = 0; i < constrained; ++i)
    if (!(b[i + 1] - b[i] > eta)) return false;
  return true;
}

Subdivision::Subdivision(std::vector<double> breakpoints)
    : breakpoints_(std::move(breakpoints)) {
  validate_increasing(breakpoints_);
}

Subdivision::Subdivision(std::vector<double> breakpoints, SparsityMode mode,
                         double eta)
    : breakpoints_(std::move(breakpoints)) {
  validate_increasing(breakpoints_);
  if (!(eta > 0)) throw std::invalid_argument("Subdivision: eta must be > 0");
  if (!gaps_satisfy(breakpoints_, mode, eta))
    throw std::invalid_argument(
        mode == SparsityMode::eta_bar_sparse
            ? "Subdivision: eta-bar gap rule violated (some cell <= eta)"
            : "Subdivision: eta gap rule violated (non-final cell <= eta)");
  sparsity_ = SparsityTag{mode, eta};
}

double Subdivision::min_gap() const {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
    double d = breakpoints_[i + 1] - breakpoints_[i];
    if (d < g) g = d;
  }
  return g;
}

Subdivision glue_subdivisions(const std::vector<Subdivision>& parts,
                              double eta) {
  if (parts.empty())
    throw std::domain_error("glue_subdivisions: no parts");
  std::vector<double> merged = parts.front().breakpoints();
  for (std::size_t k = 1; k < parts.size(); ++k) {
    const std::vector<double>& b = parts[k].breakpoints();
    if (b.front() != merged.back())
      throw std::domain_error("glue_subdivisions: parts do not abut");
    merged.insert(merged.end(), b.begin() + 1, b.end());
  }
  return Subdivision(std::move(merged), SparsityMode::eta_bar_sparse, eta);
}

}  // namespace tightness
