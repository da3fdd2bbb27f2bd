#include "tightness/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tightness {

void LbpwcParams::validate() const {
  std::ostringstream bad;
  auto flag = [&](const char* what) {
    if (bad.tellp() > 0) bad << "; ";
    bad << what;
  };
  if (!(n >= 1)) flag("n must be >= 1");
  if (!std::isfinite(lambda)) flag("lambda must be finite");
  if (!std::isfinite(mu)) flag("mu must be finite");
  if (!(kappa >= 0) || !std::isfinite(kappa)) flag("kappa must be >= 0");
  if (!(gamma >= 0) || !std::isfinite(gamma)) flag("gamma must be >= 0");
  if (!(x0 >= 0) || !std::isfinite(x0)) flag("x0 must be >= 0");
  if (!(T > 0) || !std::isfinite(T)) flag("T must be positive");
  if (n >= 1 && std::isfinite(lambda) && std::isfinite(gamma) &&
      !(birth_rate() >= 0)) {
    flag("birth rate lambda + n*gamma must be >= 0");
  }
  if (n >= 1 && std::isfinite(mu) && std::isfinite(gamma) &&
      !(death_rate() >= 0)) {
    flag("death rate mu + n*gamma must be >= 0");
  }
  if (bad.tellp() > 0) {
    throw std::invalid_argument("LbpwcParams: " + bad.str());
  }
}

CatastropheSchedule::CatastropheSchedule(std::vector<Atom> atoms)
    : atoms_(std::move(atoms)) {
  double prev = 0;
  for (const auto& a : atoms_) {
    if (!(a.time > prev) || !std::isfinite(a.time)) {
      throw std::invalid_argument(
          "CatastropheSchedule: times must be finite, positive and strictly "
          "increasing");
    }
    if (!(a.theta >= 0 && a.theta <= 1)) {
      throw std::invalid_argument(
          "CatastropheSchedule: theta must lie in [0, 1]");
    }
    prev = a.time;
  }
}

CatastropheSchedule CatastropheSchedule::geometric(double T, double r,
                                                   double theta, int k_max) {
  if (!(T > 0) || !std::isfinite(T)) {
    throw std::invalid_argument("CatastropheSchedule: T must be positive");
  }
  if (!(r > 0 && r < 1)) {
    throw std::invalid_argument("CatastropheSchedule: r must lie in (0, 1)");
  }
  if (k_max < 0) {
    throw std::invalid_argument("CatastropheSchedule: k_max must be >= 0");
  }
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(k_max));
  double rk = 1;
  for (int k = 1; k <= k_max; ++k) {
    rk *= r;
    atoms.push_back({T * (1 - rk), theta});
  }
  return CatastropheSchedule(std::move(atoms));
}

double CatastropheSchedule::min_inter_gap() const {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < atoms_.size(); ++i) {
    g = std::min(g, atoms_[i + 1].time - atoms_[i].time);
  }
  return g;
}

OffspringLaw::OffspringLaw(std::vector<double> pmf) : pmf_(std::move(pmf)) {
  cdf_.reserve(pmf_.size());
  double acc = 0;
  for (double p : pmf_) {
    acc += p;
    cdf_.push_back(acc);
  }
}

OffspringLaw OffspringLaw::from_pmf(std::vector<double> pmf) {
  if (pmf.empty()) {
    throw std::invalid_argument("OffspringLaw: pmf must be nonempty");
  }
  double sum = 0;
  for (double p : pmf) {
    if (!(p >= 0) || !std::isfinite(p)) {
      throw std::invalid_argument("OffspringLaw: pmf entries must be >= 0");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("OffspringLaw: pmf must sum to 1 within 1e-12");
  }
  return OffspringLaw(std::move(pmf));
}

OffspringLaw OffspringLaw::geometric(double p, int cap) {
  if (!(p > 0 && p <= 1)) {
    throw std::invalid_argument("OffspringLaw: geometric p must be in (0, 1]");
  }
  if (cap < 1) throw std::invalid_argument("OffspringLaw: cap must be >= 1");
  std::vector<double> pmf(static_cast<std::size_t>(cap) + 1);
  double q = 1;
  double sum = 0;
  for (auto& w : pmf) {
    w = p * q;
    sum += w;
    q *= 1 - p;
  }
  for (auto& w : pmf) w /= sum;
  return OffspringLaw(std::move(pmf));
}

OffspringLaw OffspringLaw::truncated_poisson(double mean, int cap) {
  if (!(mean >= 0) || !std::isfinite(mean)) {
    throw std::invalid_argument("OffspringLaw: poisson mean must be >= 0");
  }
  if (cap < 1) throw std::invalid_argument("OffspringLaw: cap must be >= 1");
  std::vector<double> pmf(static_cast<std::size_t>(cap) + 1);
  double w = std::exp(-mean);
  double sum = 0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    pmf[k] = w;
    sum += w;
    w *= mean / static_cast<double>(k + 1);
  }
  for (auto& v : pmf) v /= sum;
  return OffspringLaw(std::move(pmf));
}

std::int64_t OffspringLaw::sample(RngStream& rng) const {
  const double u = rng.unit();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;  // guards cdf.back() rounding below 1
  return static_cast<std::int64_t>(it - cdf_.begin());
}

double OffspringLaw::mean() const {
  double m = 0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    m += static_cast<double>(k) * pmf_[k];
  }
  return m;
}

GwOverflowError::GwOverflowError(std::vector<std::int64_t> partial_trajectory)
    : std::runtime_error(
          "Galton-Watson population exceeded the exact-integer cap"),
      partial(std::move(partial_trajectory)) {}

void DiffusionParams::validate() const {
  std::ostringstream bad;
  auto flag = [&](const char* what) {
    if (bad.tellp() > 0) bad << "; ";
    bad << what;
  };
  if (!std::isfinite(lambda)) flag("lambda must be finite");
  if (!std::isfinite(mu)) flag("mu must be finite");
  if (!(kappa >= 0) || !std::isfinite(kappa)) flag("kappa must be >= 0");
  if (!(gamma >= 0) || !std::isfinite(gamma)) flag("gamma must be >= 0");
  if (!(x0 >= 0) || !std::isfinite(x0)) flag("x0 must be >= 0");
  if (!(T > 0) || !std::isfinite(T)) flag("T must be positive");
  if (!(dt > 0) || !std::isfinite(dt)) flag("dt must be positive");
  if (bad.tellp() > 0) {
    throw std::invalid_argument("DiffusionParams: " + bad.str());
  }
}

}  // namespace tightness
