#include "tightness/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tightness/control_partition.hpp"
#include "tightness/modulus.hpp"
#include "tightness/rng.hpp"
#include "tightness/simulate.hpp"

namespace tightness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZ99 = 2.576;  // two-sided normal 99% quantile

// Fixed stream tags; every check draws from its own family of stream
// indices so adding a check never perturbs another one's randomness.
constexpr std::uint64_t kTagA1 = 0x5c8d91e4a1a1a1a1ull;
constexpr std::uint64_t kTagA2 = 0x2f34b7c9a2a2a2a2ull;
constexpr std::uint64_t kTagTightness = 0x7d11355171717171ull;
constexpr std::uint64_t kTagMProxy = 0x91e2034dc3c3c3c3ull;

// Recurse all the way to pairs: every merge then adds two equal partial sums
// when the samples are identical, so a power-of-two count of identical
// samples has an exact mean and exactly zero variance. A sequential base
// case would round at odd multiples and break that.
double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 2) return n == 0 ? 0.0 : n == 1 ? v[0] : v[0] + v[1];
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

double pairwise_dev2(const double* v, std::size_t n, double mean) {
  if (n <= 2) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = v[i] - mean;
      s += d * d;
    }
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_dev2(v, h, mean) + pairwise_dev2(v + h, n - h, mean);
}

void require_min_replicas(std::size_t replicas, const char* who) {
  if (replicas < 100) {
    throw std::invalid_argument(std::string(who) +
                                ": fewer than 100 replicas gives a "
                                "meaningless confidence interval");
  }
}

std::uint64_t stream_index(std::uint64_t tag, std::uint64_t outer,
                           std::uint64_t replica) {
  return hash_combine(hash_combine(tag, outer), replica);
}

}  // namespace

MCEstimate summarize_samples(const std::vector<double>& samples,
                             std::uint64_t seed) {
  if (samples.size() < 2) {
    throw std::invalid_argument("summarize_samples: need at least 2 samples");
  }
  MCEstimate e;
  e.count = samples.size();
  e.seed = seed;
  const double n = static_cast<double>(e.count);
  e.mean = pairwise_sum(samples.data(), samples.size()) / n;
  e.variance =
      pairwise_dev2(samples.data(), samples.size(), e.mean) / (n - 1.0);
  e.ci_halfwidth = kZ99 * std::sqrt(e.variance / n);
  return e;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("ks_statistic: samples must be non-empty");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }
  return d;
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  std::atomic<std::size_t> next{0};
  std::mutex err_mtx;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mtx);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

double StoppingTimeTrace::upsilon_at(std::size_t i) const {
  return i < upsilon.size() ? upsilon[i] : kInf;
}

StoppingTimeTrace compute_stopping_times(const StepPath& path, double b_lo,
                                         double b_hi, double epsilon,
                                         double eta, Metric metric) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    throw std::domain_error("compute_stopping_times: epsilon must be > 0");
  }
  if (!(eta > 0) || !std::isfinite(eta)) {
    throw std::domain_error("compute_stopping_times: eta must be > 0");
  }
  if (!(path.t0() <= b_lo && b_lo < b_hi && b_hi <= path.horizon())) {
    throw std::domain_error(
        "compute_stopping_times: window must lie inside the path domain");
  }
  const double anchor = b_hi - 2 * eta;
  if (!(anchor >= path.t0())) {
    throw std::domain_error(
        "compute_stopping_times: b_hi - 2*eta falls before the path start");
  }

  const Metric dprime = capped_metric(metric);
  const StepPath frozen = freeze_before(path, b_hi);
  const auto& jumps = frozen.jumps();
  const auto first_after = [&](double t) {
    return static_cast<std::size_t>(
        std::upper_bound(jumps.begin(), jumps.end(), t,
                         [](double v, const StepPath::Jump& j) {
                           return v < j.time;
                         }) -
        jumps.begin());
  };

  StoppingTimeTrace tr;
  tr.epsilon = epsilon;
  tr.eta = eta;
  tr.b_lo = b_lo;
  tr.b_hi = b_hi;
  tr.upsilon.push_back(b_lo);
  double cur = frozen.value_at(b_lo);
  std::size_t k = first_after(b_lo);
  for (;;) {
    double next = kInf;
    double next_val = cur;
    for (; k < jumps.size(); ++k) {
      if (metric_distance(dprime, jumps[k].value, cur) >= epsilon) {
        next = jumps[k].time;
        next_val = jumps[k].value;
        ++k;
        break;
      }
    }
    tr.upsilon.push_back(next);
    if (!std::isfinite(next)) break;
    assert(metric_distance(dprime, next_val, cur) >= epsilon);
    cur = next_val;
  }

  tr.upsilon_bar = kInf;
  const double anchor_val = frozen.value_at(anchor);
  for (std::size_t i = first_after(anchor); i < jumps.size(); ++i) {
    if (metric_distance(dprime, jumps[i].value, anchor_val) >= epsilon) {
      tr.upsilon_bar = jumps[i].time;
      break;
    }
  }
  return tr;
}

LemmaReport check_lemma_decomposition(const StepPath& path,
                                      const Subdivision& bn, double epsilon,
                                      double eta, int m, Metric metric) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument(
        "check_lemma_decomposition: epsilon must be > 0");
  }
  const double eta0 = bn.min_gap();
  if (!(eta > 0 && eta < eta0 / 2)) {
    throw std::invalid_argument(
        "check_lemma_decomposition: need 0 < eta < (smallest window)/2");
  }
  if (m < 1) {
    throw std::invalid_argument("check_lemma_decomposition: need m >= 1");
  }
  if (!(path.t0() <= bn.begin_point() && bn.end_point() <= path.horizon())) {
    throw std::invalid_argument(
        "check_lemma_decomposition: subdivision outside the path domain");
  }

  const Metric dprime = capped_metric(metric);
  LemmaReport rep;
  rep.all_hold = true;
  const auto& pts = bn.breakpoints();
  for (std::size_t l = 0; l + 1 < pts.size(); ++l) {
    LemmaWindow w;
    w.b_lo = pts[l];
    w.b_hi = pts[l + 1];
    // Half-open cells never see a jump exactly at b_hi, so the modulus of
    // the unfrozen path over the window equals that of the frozen one.
    w.lhs = modulus(path, eta, w.b_lo, w.b_hi, dprime,
                    SparsityMode::eta_bar_sparse)
                .value;
    const StoppingTimeTrace tr =
        compute_stopping_times(path, w.b_lo, w.b_hi, epsilon, eta, metric);
    w.indicator_m = tr.upsilon_at(static_cast<std::size_t>(m)) <= w.b_hi;
    w.small_gap_count = 0;
    for (int i = 0; i < m; ++i) {
      const double cur = tr.upsilon_at(static_cast<std::size_t>(i));
      const double nxt = tr.upsilon_at(static_cast<std::size_t>(i) + 1);
      const double gap = std::isinf(nxt) ? kInf : nxt - cur;
      if (gap <= eta) ++w.small_gap_count;
    }
    w.indicator_bar = tr.upsilon_bar <= w.b_hi;
    w.rhs = (w.indicator_m ? 1.0 : 0.0) + w.small_gap_count + 6 * epsilon +
            2.0 * (w.indicator_bar ? 1.0 : 0.0);
    w.holds = w.lhs <= w.rhs;
    rep.all_hold = rep.all_hold && w.holds;
    rep.windows.push_back(w);
  }
  return rep;
}

A1Result check_a1(const ModelFamily& family, const std::vector<long>& n_grid,
                  const std::vector<double>& K_grid, std::size_t replicas,
                  std::uint64_t seed, const std::vector<double>& eps_levels,
                  int threads) {
  require_min_replicas(replicas, "check_a1");
  if (n_grid.empty() || K_grid.empty()) {
    throw std::invalid_argument("check_a1: grids must be non-empty");
  }
  for (std::size_t i = 0; i + 1 < K_grid.size(); ++i) {
    if (!(K_grid[i] < K_grid[i + 1])) {
      throw std::invalid_argument("check_a1: K grid must be increasing");
    }
  }
  for (std::size_t i = 0; i + 1 < n_grid.size(); ++i) {
    if (!(n_grid[i] < n_grid[i + 1])) {
      throw std::invalid_argument("check_a1: n grid must be increasing");
    }
  }

  A1Result out;
  // One sup sample set per n, shared by every K: the table is then exactly
  // non-increasing in K, not merely up to MC noise.
  std::vector<std::vector<double>> sups(
      n_grid.size(), std::vector<double>(replicas));
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    const LbpwcParams p = family.params_for(n_grid[ni]);
    parallel_for(replicas, threads, [&, ni](std::size_t r) {
      RngStream rng(seed, stream_index(kTagA1, ni, r));
      sups[ni][r] = simulate_lbpwc_sup(p, family.schedule, rng);
    });
  }

  std::vector<double> ind(replicas);
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    for (double K : K_grid) {
      for (std::size_t r = 0; r < replicas; ++r) {
        ind[r] = sups[ni][r] >= K ? 1.0 : 0.0;
      }
      out.rows.push_back({n_grid[ni], K, summarize_samples(ind, seed)});
    }
  }

  const std::size_t tail = std::min<std::size_t>(2, n_grid.size());
  for (double eps : eps_levels) {
    A1Verdict v;
    v.eps_level = eps;
    for (std::size_t ki = 0; ki < K_grid.size() && !v.found; ++ki) {
      double worst = 0;
      for (std::size_t ni = n_grid.size() - tail; ni < n_grid.size(); ++ni) {
        worst = std::max(worst,
                         out.rows[ni * K_grid.size() + ki].est.mean);
      }
      if (worst <= eps) {
        v.found = true;
        v.K = K_grid[ki];
      }
    }
    out.verdicts.push_back(v);
  }
  return out;
}

A2Result check_a2(const ModelFamily& family, long n, double K,
                  const MonotoneControl& Fn,
                  const std::vector<std::array<double, 3>>& grid,
                  std::size_t replicas, std::uint64_t seed,
                  std::optional<double> eta_bar0, std::optional<double> c_k,
                  int threads) {
  if (replicas < 2) {
    throw std::invalid_argument("check_a2: need at least 2 replicas");
  }
  if (grid.empty()) {
    throw std::invalid_argument("check_a2: grid must be non-empty");
  }
  const LbpwcParams p = family.params_for(n);
  if (Fn.horizon() < p.T) {
    throw std::invalid_argument("check_a2: control must cover [0, T]");
  }
  for (const auto& g : grid) {
    if (!(0 <= g[0] && g[0] <= g[1] && g[1] <= p.T)) {
      throw std::invalid_argument(
          "check_a2: grid needs 0 <= s <= t <= T at every point");
    }
    if (!(g[2] >= 0 && g[2] <= K)) {
      throw std::invalid_argument(
          "check_a2: grid start states must lie in [0, K]");
    }
  }

  A2Result out;
  out.c_k = c_k;
  std::vector<std::array<double, 3>> kept;
  for (const auto& g : grid) {
    const double inc = Fn.value(g[1]) - Fn.value(g[0]);
    if (eta_bar0 && !(inc <= *eta_bar0)) {
      ++out.dropped;
      continue;
    }
    kept.push_back(g);
  }

  std::vector<double> samples(replicas);
  for (std::size_t gi = 0; gi < kept.size(); ++gi) {
    const double s = kept[gi][0];
    const double t = kept[gi][1];
    const double x0 = kept[gi][2];
    parallel_for(replicas, threads, [&, gi](std::size_t r) {
      RngStream rng(seed, stream_index(kTagA2, gi, r));
      const double xt =
          simulate_lbpwc_value(p, family.schedule, rng, s, x0, t);
      const double diff = xt - x0;
      const double d2 = diff * diff;
      samples[r] = d2 < 1.0 ? d2 : 1.0;
    });
    A2Point pt;
    pt.s = s;
    pt.t = t;
    pt.x0 = x0;
    pt.est = summarize_samples(samples, seed);
    pt.f_increment = Fn.value(t) - Fn.value(s);
    if (pt.f_increment > 0) {
      pt.ratio = pt.est.mean / pt.f_increment;
      out.max_ratio = std::max(out.max_ratio, pt.ratio);
      out.max_ratio_minus_ci =
          std::max(out.max_ratio_minus_ci,
                   (pt.est.mean - pt.est.ci_halfwidth) / pt.f_increment);
    } else {
      pt.hard_violation = pt.est.mean - pt.est.ci_halfwidth > 0;
      out.any_hard_violation = out.any_hard_violation || pt.hard_violation;
    }
    out.points.push_back(pt);
  }
  if (c_k) out.within_c_k = out.max_ratio_minus_ci <= *c_k;
  return out;
}

TightnessResult tightness_curve(const ModelFamily& family,
                                const std::vector<long>& n_grid,
                                const std::vector<double>& eta_grid,
                                double delta, std::size_t replicas,
                                std::uint64_t seed, int threads) {
  require_min_replicas(replicas, "tightness_curve");
  if (n_grid.empty() || eta_grid.empty()) {
    throw std::invalid_argument("tightness_curve: grids must be non-empty");
  }
  if (!(delta > 0)) {
    throw std::invalid_argument("tightness_curve: delta must be > 0");
  }
  for (double e : eta_grid) {
    if (!(e > 0)) {
      throw std::invalid_argument("tightness_curve: eta must be > 0");
    }
  }

  TightnessResult out;
  out.delta = delta;
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    const LbpwcParams p = family.params_for(n_grid[ni]);
    // One path per replica, all eta evaluated on it: the row over eta is
    // exactly monotone because the modulus is monotone in eta pathwise.
    std::vector<std::vector<double>> ind(
        eta_grid.size(), std::vector<double>(replicas));
    parallel_for(replicas, threads, [&, ni](std::size_t r) {
      RngStream rng(seed, stream_index(kTagTightness, ni, r));
      const StepPath path = simulate_lbpwc(p, family.schedule, rng);
      for (std::size_t ei = 0; ei < eta_grid.size(); ++ei) {
        const bool big =
            modulus_at_least(path, eta_grid[ei], 0.0, p.T,
                             Metric::bounded_euclidean,
                             SparsityMode::eta_sparse, delta);
        ind[ei][r] = big ? 1.0 : 0.0;
      }
    });
    for (std::size_t ei = 0; ei < eta_grid.size(); ++ei) {
      out.rows.push_back(
          {n_grid[ni], eta_grid[ei], summarize_samples(ind[ei], seed)});
    }
  }
  return out;
}

MProxyResult m_proxy(const ModelFamily& family, long n,
                     const MonotoneControl& Fn, double b_lo, double b_hi,
                     double eta, double K,
                     const std::vector<double>& eps_family,
                     std::size_t replicas, std::uint64_t seed, int threads) {
  if (replicas < 2) {
    throw std::invalid_argument("m_proxy: need at least 2 replicas");
  }
  const LbpwcParams p = family.params_for(n);
  if (!(0 <= b_lo && b_lo < b_hi && b_hi <= p.T)) {
    throw std::invalid_argument("m_proxy: need 0 <= b_lo < b_hi <= T");
  }
  if (!(eta > 0) || !(K > 0)) {
    throw std::invalid_argument("m_proxy: eta and K must be > 0");
  }
  if (!(b_hi - 2 * eta >= 0)) {
    throw std::invalid_argument("m_proxy: b_hi - 2*eta must be >= 0");
  }
  if (eps_family.empty()) {
    throw std::invalid_argument("m_proxy: eps family must be non-empty");
  }
  for (double e : eps_family) {
    if (!(e > 0)) {
      throw std::invalid_argument("m_proxy: eps levels must be > 0");
    }
  }
  if (Fn.horizon() < b_hi) {
    throw std::invalid_argument("m_proxy: control must cover the window");
  }

  // Stopping-time rules: a handful of deterministic times across the window
  // plus the first few marker times of each epsilon level.
  struct Rule {
    bool deterministic;
    double t;          // deterministic rules
    std::size_t eps;   // hitting rules: index into eps_family
    int i;             //   and marker number
  };
  constexpr int kDetCount = 5;
  constexpr int kMarkersPerEps = 4;
  std::vector<Rule> rules;
  for (int j = 0; j < kDetCount; ++j) {
    const double y =
        b_lo + (b_hi - b_lo) * static_cast<double>(j) / (kDetCount - 1);
    rules.push_back({true, y, 0, 0});
  }
  for (std::size_t e = 0; e < eps_family.size(); ++e) {
    for (int i = 0; i < kMarkersPerEps; ++i) {
      rules.push_back({false, 0, e, i});
    }
  }

  const std::size_t pair_count = rules.size() * rules.size();
  std::vector<std::vector<double>> samples(
      pair_count, std::vector<double>(replicas, 0.0));

  parallel_for(replicas, threads, [&](std::size_t r) {
    RngStream rng(seed, stream_index(kTagMProxy, 0, r));
    const StepPath path = simulate_lbpwc(p, family.schedule, rng);
    const StepPath frozen = freeze_before(path, b_hi);
    std::vector<StoppingTimeTrace> traces;
    traces.reserve(eps_family.size());
    for (double e : eps_family) {
      traces.push_back(
          compute_stopping_times(path, b_lo, b_hi, e, eta, Metric::euclidean));
    }
    const auto rule_time = [&](const Rule& rule) {
      return rule.deterministic
                 ? rule.t
                 : traces[rule.eps].upsilon_at(
                       static_cast<std::size_t>(rule.i));
    };
    const auto rule_value = [&](double t) {
      return frozen.value_at(std::isfinite(t) ? std::min(t, b_hi) : b_hi);
    };
    for (std::size_t a = 0; a < rules.size(); ++a) {
      const double ta = rule_time(rules[a]);
      const double va = rule_value(ta);
      for (std::size_t b = 0; b < rules.size(); ++b) {
        const double tb = rule_time(rules[b]);
        if (!(ta <= tb && tb <= ta + eta)) continue;
        const double vb = rule_value(tb);
        if (!(va >= 0 && va <= K && vb >= 0 && vb <= K)) continue;
        const double d = metric_distance(Metric::bounded_euclidean, va, vb);
        samples[a * rules.size() + b][r] = d * d;
      }
    }
  });

  MProxyResult out;
  const MonotoneControl frozen_control = freeze_control(Fn, b_hi);
  out.bound = 5.0 * window_increment_sup(frozen_control, b_lo, b_hi, eta);
  std::size_t best = 0;
  bool have = false;
  for (std::size_t pr = 0; pr < pair_count; ++pr) {
    const MCEstimate est = summarize_samples(samples[pr], seed);
    if (!have || est.mean > out.est.mean) {
      out.est = est;
      best = pr;
      have = true;
    }
  }
  const auto describe = [&](const Rule& rule) {
    std::ostringstream os;
    if (rule.deterministic) {
      os << "t=" << rule.t;
    } else {
      os << "marker(eps=" << eps_family[rule.eps] << ", i=" << rule.i << ")";
    }
    return os.str();
  };
  out.best_pair = describe(rules[best / rules.size()]) + " -> " +
                  describe(rules[best % rules.size()]);
  out.within = out.est.mean <= out.bound + out.est.ci_halfwidth;
  return out;
}

}  // namespace tightness
