#include "tightness/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace tightness {

namespace detail {

void check_lbpwc_inputs(const LbpwcParams& p, const CatastropheSchedule& q) {
  p.validate();
  if (!q.empty() && q.atoms().back().time > p.T) {
    throw std::invalid_argument(
        "simulate: catastrophe schedule extends past the horizon T");
  }
}

}  // namespace detail

namespace {

// Initial lattice state: population round(x0 * n) on the 1/n grid.
double lattice_x0(const LbpwcParams& p) {
  const double n = static_cast<double>(p.n);
  return std::round(p.x0 * n) / n;
}

}  // namespace

StepPath simulate_lbpwc(const LbpwcParams& p, const CatastropheSchedule& q,
                        RngStream& rng) {
  detail::check_lbpwc_inputs(p, q);
  PathSink sink(0.0, lattice_x0(p));
  detail::run_lbpwc(p, q, rng, 0.0, lattice_x0(p), p.T, sink);
  return sink.take();
}

StepPath simulate_lbpwc_from(const LbpwcParams& p,
                             const CatastropheSchedule& q, RngStream& rng,
                             double start_time, double start_x, double until) {
  detail::check_lbpwc_inputs(p, q);
  if (!(0 <= start_time && start_time <= until && until <= p.T)) {
    throw std::invalid_argument(
        "simulate: need 0 <= start_time <= until <= T");
  }
  if (!(start_x >= 0) || !std::isfinite(start_x)) {
    throw std::invalid_argument("simulate: start state must be >= 0");
  }
  PathSink sink(start_time, start_x);
  detail::run_lbpwc(p, q, rng, start_time, start_x, until, sink);
  return sink.take();
}

double simulate_lbpwc_value(const LbpwcParams& p, const CatastropheSchedule& q,
                            RngStream& rng, double start_time, double start_x,
                            double until) {
  detail::check_lbpwc_inputs(p, q);
  if (!(0 <= start_time && start_time <= until && until <= p.T)) {
    throw std::invalid_argument(
        "simulate: need 0 <= start_time <= until <= T");
  }
  if (!(start_x >= 0) || !std::isfinite(start_x)) {
    throw std::invalid_argument("simulate: start state must be >= 0");
  }
  TerminalSink sink(start_x);
  detail::run_lbpwc(p, q, rng, start_time, start_x, until, sink);
  return sink.value();
}

std::vector<double> simulate_lbpwc_grid(const LbpwcParams& p,
                                        const CatastropheSchedule& q,
                                        RngStream& rng,
                                        const std::vector<double>& times) {
  detail::check_lbpwc_inputs(p, q);
  double prev = 0;
  for (double t : times) {
    if (!(t >= prev) || t > p.T) {
      throw std::invalid_argument(
          "simulate: query times must be sorted within [0, T]");
    }
    prev = t;
  }
  GridSink sink(times, lattice_x0(p));
  detail::run_lbpwc(p, q, rng, 0.0, lattice_x0(p), p.T, sink);
  return sink.values();
}

double simulate_lbpwc_sup(const LbpwcParams& p, const CatastropheSchedule& q,
                          RngStream& rng) {
  detail::check_lbpwc_inputs(p, q);
  SupSink sink(lattice_x0(p));
  detail::run_lbpwc(p, q, rng, 0.0, lattice_x0(p), p.T, sink);
  return sink.sup();
}

std::vector<std::int64_t> simulate_gw(std::int64_t z0,
                                      const std::vector<OffspringLaw>& laws,
                                      int generations, RngStream& rng,
                                      std::int64_t cap) {
  if (z0 < 0) throw std::invalid_argument("simulate_gw: z0 must be >= 0");
  if (generations < 0) {
    throw std::invalid_argument("simulate_gw: generations must be >= 0");
  }
  if (laws.size() != static_cast<std::size_t>(generations)) {
    throw std::invalid_argument(
        "simulate_gw: need one offspring law per generation");
  }
  if (cap <= 0) throw std::invalid_argument("simulate_gw: cap must be > 0");

  std::vector<std::int64_t> traj;
  traj.reserve(static_cast<std::size_t>(generations) + 1);
  traj.push_back(z0);
  for (int g = 0; g < generations; ++g) {
    const OffspringLaw& law = laws[static_cast<std::size_t>(g)];
    std::int64_t next = 0;
    for (std::int64_t i = 0; i < traj.back(); ++i) {
      next += law.sample(rng);
      if (next > cap) throw GwOverflowError(std::move(traj));
    }
    traj.push_back(next);
  }
  return traj;
}

StepPath simulate_limit_diffusion(const DiffusionParams& p,
                                  const CatastropheSchedule& q,
                                  RngStream& rng) {
  p.validate();
  if (!q.empty() && q.atoms().back().time > p.T) {
    throw std::invalid_argument(
        "simulate_limit_diffusion: schedule extends past the horizon T");
  }
  if (!(p.dt < q.min_inter_gap())) {
    throw std::invalid_argument(
        "simulate_limit_diffusion: dt must be smaller than the smallest "
        "inter-catastrophe gap");
  }

  const auto& atoms = q.atoms();
  PathSink sink(0.0, p.x0);
  double x = p.x0;
  double t = 0;
  std::size_t ai = 0;
  long k = 1;
  while (t < p.T) {
    double g = static_cast<double>(k) * p.dt;
    while (g <= t) g = static_cast<double>(++k) * p.dt;
    double next = std::min(g, p.T);
    bool at_cat = false;
    if (ai < atoms.size() && atoms[ai].time <= next) {
      next = atoms[ai].time;
      at_cat = true;
      if (next == g) ++k;  // one boundary, both roles
    } else if (next == g) {
      ++k;
    }
    const double h = next - t;
    const double xp = std::max(x, 0.0);
    // Quadratic variation rate 2*gamma*x: the chain jumps +-1/n at rate
    // ~n*gamma*z on each side, so both sides contribute.
    x += (p.lambda - p.mu - p.kappa * xp) * xp * h +
         std::sqrt(2.0 * p.gamma * xp * h) * rng.normal();
    x = std::max(x, 0.0);
    t = next;
    if (at_cat) {
      x = atoms[ai].theta * x;
      ++ai;
    }
    sink.event(t, x);
  }
  sink.finish(p.T, x);
  return sink.take();
}

MonotoneControl build_Fn(const CatastropheSchedule& q, double T) {
  if (!(T > 0) || !std::isfinite(T)) {
    throw std::invalid_argument("build_Fn: T must be positive");
  }
  std::vector<MonotoneControl::Atom> atoms;
  for (const auto& a : q.atoms()) {
    if (a.time > T) break;
    const double size = 1.0 - a.theta;
    if (size > 0) atoms.push_back({a.time, size});
  }
  return MonotoneControl(1.0, std::move(atoms), T);
}

}  // namespace tightness
