#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tightness/rng.hpp"

namespace tightness {

/**
 * Rescaled logistic birth-death process on the lattice (1/n)Z. Individual
 * birth rate b = lambda + n*gamma and death rate d + c*z = mu + n*gamma +
 * (kappa/n)*z for population z = n*x. lambda and mu may be negative as long
 * as the derived per-capita rates stay nonnegative.
 */
struct LbpwcParams {
  double lambda = 0;
  double mu = 0;
  double kappa = 0;
  double gamma = 0;
  long n = 1;
  double x0 = 1;
  double T = 1;

  double birth_rate() const { return lambda + static_cast<double>(n) * gamma; }
  double death_rate() const { return mu + static_cast<double>(n) * gamma; }
  double competition() const { return kappa / static_cast<double>(n); }

  void validate() const;  // throws invalid_argument listing every problem
};

/**
 * Deterministic catastrophe times 0 < t_1 < ... <= T with survival factors
 * theta_k in [0, 1]: at t_k the state is multiplied by theta_k. The
 * geometric family t_k = T*(1 - r^k), k = 1..k_max, accumulates at T.
 */
class CatastropheSchedule {
 public:
  struct Atom {
    double time;
    double theta;
  };

  CatastropheSchedule() = default;
  explicit CatastropheSchedule(std::vector<Atom> atoms);

  static CatastropheSchedule geometric(double T, double r, double theta,
                                       int k_max);

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }

  // Smallest gap between consecutive catastrophe times; +inf for fewer than
  // two atoms.
  double min_inter_gap() const;

 private:
  std::vector<Atom> atoms_;
};

/**
 * Offspring distribution on {0, 1, ...} with finite support, sampled by
 * inverse CDF. Named families are truncated at `cap` offspring and
 * renormalized.
 */
class OffspringLaw {
 public:
  static OffspringLaw from_pmf(std::vector<double> pmf);
  static OffspringLaw geometric(double p, int cap = 256);
  static OffspringLaw truncated_poisson(double mean, int cap = 256);

  std::int64_t sample(RngStream& rng) const;
  double mean() const;
  const std::vector<double>& pmf() const { return pmf_; }

 private:
  explicit OffspringLaw(std::vector<double> pmf);

  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

// Total population exceeded the exact-integer cap; carries the generations
// simulated before the overflow.
struct GwOverflowError : std::runtime_error {
  explicit GwOverflowError(std::vector<std::int64_t> partial_trajectory);
  std::vector<std::int64_t> partial;
};

/**
 * Limit diffusion dX = (lambda - mu - kappa X) X dt + sqrt(gamma X) dB
 * between catastrophes, discretized by full-truncation Euler with step dt.
 */
struct DiffusionParams {
  double lambda = 0;
  double mu = 0;
  double kappa = 0;
  double gamma = 0;
  double x0 = 1;
  double T = 1;
  double dt = 1e-3;

  void validate() const;
};

}  // namespace tightness
