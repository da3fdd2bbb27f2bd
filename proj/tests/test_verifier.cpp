#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "tightness/models.hpp"
#include "tightness/rng.hpp"
#include "tightness/simulate.hpp"
#include "tightness/verify.hpp"

using namespace tightness;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("summarize_samples computes the 99% interval") {
  const MCEstimate e = summarize_samples({1.0, 2.0, 3.0, 4.0}, 77);
  CHECK(e.count == 4);
  CHECK(e.mean == 2.5);
  CHECK(e.variance == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(e.ci_halfwidth ==
        doctest::Approx(2.576 * std::sqrt(5.0 / 3.0 / 4.0)).epsilon(1e-15));
  CHECK(e.seed == 77);
  CHECK_THROWS_AS(summarize_samples({1.0}, 0), std::invalid_argument);
}

TEST_CASE("ks_statistic on hand-computable samples") {
  CHECK(ks_statistic({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_statistic({0, 1}, {10, 11}) == 1.0);
  CHECK(ks_statistic({1, 2}, {1, 2, 3}) == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("ks_statistic separates shifted uniforms") {
  RngStream r(30, 0);
  std::vector<double> a(4000), b(4000), c(4000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = r.unit();
    b[i] = r.unit();
    c[i] = r.unit() + 0.5;
  }
  CHECK(ks_statistic(a, b) < 0.05);
  CHECK(ks_statistic(a, c) > 0.4);
}

TEST_CASE("parallel_for is deterministic and propagates exceptions") {
  std::vector<double> one(200), four(200);
  parallel_for(200, 1, [&](std::size_t i) { one[i] = std::sqrt(double(i)); });
  parallel_for(200, 4, [&](std::size_t i) { four[i] = std::sqrt(double(i)); });
  CHECK(one == four);
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [&](std::size_t i) {
                                 if (i == 50) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("stopping times of a constant path never fire") {
  const StepPath f = StepPath::constant(0.0, 1.0, 1.0);
  const auto tr =
      compute_stopping_times(f, 0.0, 1.0, 0.3, 0.1, Metric::euclidean);
  CHECK(tr.upsilon.size() == 2);
  CHECK(tr.upsilon_at(0) == 0.0);
  CHECK(tr.upsilon_at(1) == kInf);
  CHECK(tr.upsilon_at(7) == kInf);
  CHECK(tr.upsilon_bar == kInf);
}

TEST_CASE("a single large jump fires exactly once") {
  const StepPath f(0.0, 0.0, {{0.5, 1.0}}, 1.0);
  const auto tr =
      compute_stopping_times(f, 0.0, 1.0, 0.3, 0.1, Metric::euclidean);
  CHECK(tr.upsilon_at(1) == 0.5);
  CHECK(tr.upsilon_at(2) == kInf);
  CHECK(tr.upsilon_bar == kInf);  // nothing moves after b_hi - 2*eta = 0.8
}

TEST_CASE("accumulating jumps fire in sequence") {
  const StepPath f(0.0, 0.0, {{0.5, 1.0}, {0.55, 2.0}}, 1.0);
  const auto tr =
      compute_stopping_times(f, 0.0, 1.0, 0.3, 0.1, Metric::euclidean);
  CHECK(tr.upsilon_at(1) == 0.5);
  CHECK(tr.upsilon_at(2) == 0.55);
  CHECK(tr.upsilon_at(3) == kInf);
}

TEST_CASE("sub-threshold drift fires only once accumulated") {
  const StepPath f(0.0, 0.0, {{0.2, 0.2}, {0.4, 0.4}, {0.6, 0.6}}, 1.0);
  const auto tr =
      compute_stopping_times(f, 0.0, 1.0, 0.3, 0.05, Metric::euclidean);
  CHECK(tr.upsilon_at(1) == 0.4);   // first time at distance >= 0.3 from 0
  CHECK(tr.upsilon_at(2) == kInf);  // 0.6 is only 0.2 away from 0.4
}

TEST_CASE("the scan uses the capped companion metric") {
  const StepPath f(0.0, 10.0, {{0.5, 11.5}}, 1.0);
  // euclidean jump 1.5, capped distance 1 < epsilon = 2: never fires
  const auto tr =
      compute_stopping_times(f, 0.0, 1.0, 2.0, 0.1, Metric::euclidean);
  CHECK(tr.upsilon_at(1) == kInf);
}

TEST_CASE("a jump exactly at the window end is invisible") {
  const StepPath f(0.0, 0.0, {{1.0, 5.0}}, 2.0);
  const auto tr =
      compute_stopping_times(f, 0.0, 1.0, 0.3, 0.1, Metric::euclidean);
  CHECK(tr.upsilon_at(1) == kInf);
}

TEST_CASE("upsilon_bar anchors at b_hi - 2*eta") {
  const StepPath f(0.0, 0.0, {{0.85, 1.0}}, 1.0);
  const auto tr =
      compute_stopping_times(f, 0.0, 1.0, 0.3, 0.1, Metric::euclidean);
  CHECK(tr.upsilon_bar == 0.85);  // anchored at 0.8, fires at the jump
  const auto tr2 =
      compute_stopping_times(f, 0.0, 1.0, 0.3, 0.04, Metric::euclidean);
  CHECK(tr2.upsilon_bar == kInf);  // anchored at 0.92, past the jump
}

TEST_CASE("stopping time preconditions") {
  const StepPath f = StepPath::constant(0.0, 1.0, 1.0);
  CHECK_THROWS_AS(
      compute_stopping_times(f, 0.0, 0.1, 0.3, 0.2, Metric::euclidean),
      std::domain_error);  // b_hi - 2*eta < t0
  CHECK_THROWS_AS(
      compute_stopping_times(f, 0.5, 0.5, 0.3, 0.1, Metric::euclidean),
      std::domain_error);  // empty window
}

TEST_CASE("finite stopping times always lie within the window") {
  LbpwcParams p;
  p.lambda = 2;
  p.mu = 1;
  p.gamma = 0.5;
  p.n = 30;
  p.x0 = 1.0;
  const CatastropheSchedule q({{0.4, 0.5}, {0.7, 0.5}});
  for (int rep = 0; rep < 30; ++rep) {
    RngStream r(31, static_cast<std::uint64_t>(rep));
    const StepPath f = simulate_lbpwc(p, q, r);
    const auto tr =
        compute_stopping_times(f, 0.1, 0.9, 0.15, 0.05, Metric::euclidean);
    for (std::size_t i = 1; i < tr.upsilon.size(); ++i) {
      const double u = tr.upsilon[i];
      if (std::isfinite(u)) {
        REQUIRE(u > 0.1);
        REQUIRE(u < 0.9);  // jumps at b_hi are frozen away
        REQUIRE(u >= tr.upsilon[i - 1]);
      } else {
        REQUIRE(i + 1 == tr.upsilon.size());
      }
    }
  }
}

TEST_CASE("lemma bound holds trivially for a constant path") {
  const StepPath f = StepPath::constant(0.0, 1.0, 1.0);
  const Subdivision bn({0.0, 0.5, 1.0});
  const LemmaReport rep = check_lemma_decomposition(f, bn, 0.1, 0.1, 3);
  CHECK(rep.all_hold);
  REQUIRE(rep.windows.size() == 2);
  CHECK(rep.windows[0].lhs == 0.0);
  CHECK(rep.windows[0].rhs == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("a single mid-window jump leaves the sparse modulus at zero") {
  const StepPath f(0.0, 0.0, {{0.5, 1.0}}, 1.0);
  const Subdivision bn({0.0, 1.0});
  const LemmaReport rep = check_lemma_decomposition(f, bn, 0.1, 0.2, 1);
  CHECK(rep.all_hold);
  REQUIRE(rep.windows.size() == 1);
  CHECK(rep.windows[0].lhs == 0.0);
  CHECK(rep.windows[0].indicator_m);      // upsilon(1) = 0.5 <= 1
  CHECK(rep.windows[0].small_gap_count == 0);
}

TEST_CASE("lemma preconditions refuse bad eta and m") {
  const StepPath f = StepPath::constant(0.0, 1.0, 1.0);
  const Subdivision bn({0.0, 0.5, 1.0});
  CHECK_THROWS_AS(check_lemma_decomposition(f, bn, 0.1, 0.25, 3),
                  std::invalid_argument);  // eta >= min_gap / 2
  CHECK_THROWS_AS(check_lemma_decomposition(f, bn, 0.1, 0.1, 0),
                  std::invalid_argument);
}

TEST_CASE("lemma inequality fuzz on simulated paths") {
  LbpwcParams p;
  p.lambda = 1;
  p.mu = 1;
  p.kappa = 1;
  p.gamma = 1;
  p.n = 20;
  p.x0 = 1.0;
  const CatastropheSchedule q({{0.4, 0.6}, {0.7, 0.2}});
  RngStream pick(32, 999);
  for (int rep = 0; rep < 300; ++rep) {
    RngStream r(32, static_cast<std::uint64_t>(rep));
    const StepPath f = simulate_lbpwc(p, q, r);
    // random window structure and parameters
    const double mid = 0.3 + 0.4 * pick.unit();
    const Subdivision bn({0.0, mid, 1.0});
    const double eta0 = bn.min_gap();
    const double eta = eta0 * (0.05 + 0.4 * pick.unit());
    const double eps = 0.05 + 0.3 * pick.unit();
    const int m = 1 + static_cast<int>(pick.unit() * 4);
    const LemmaReport rep2 = check_lemma_decomposition(f, bn, eps, eta, m);
    REQUIRE(rep2.all_hold);
  }
}

TEST_CASE("a1 on the zero-rate family is exact") {
  ModelFamily fam;
  fam.x0 = 1.0;
  const A1Result res =
      check_a1(fam, {10, 20}, {0.5, 2.0}, 100, 5, {0.25});
  REQUIRE(res.rows.size() == 4);
  for (const auto& row : res.rows) {
    if (row.K <= 1.0) {
      CHECK(row.est.mean == 1.0);  // sup == x0 always
    } else {
      CHECK(row.est.mean == 0.0);
    }
    CHECK(row.est.variance == 0.0);
  }
  REQUIRE(res.verdicts.size() == 1);
  CHECK(res.verdicts[0].found);
  CHECK(res.verdicts[0].K == 2.0);
}

TEST_CASE("a1 tables are exactly monotone in K") {
  ModelFamily fam;
  fam.lambda = 2;
  fam.mu = 1;
  fam.gamma = 0.5;
  fam.x0 = 1.0;
  fam.schedule = CatastropheSchedule({{0.5, 0.5}});
  const std::vector<double> Ks{1.0, 1.5, 2.0, 3.0, 5.0};
  const A1Result res = check_a1(fam, {10, 20}, Ks, 200, 6, {0.25, 0.05});
  for (std::size_t ni = 0; ni < 2; ++ni) {
    for (std::size_t ki = 0; ki + 1 < Ks.size(); ++ki) {
      REQUIRE(res.rows[ni * Ks.size() + ki].est.mean >=
              res.rows[ni * Ks.size() + ki + 1].est.mean);
    }
  }
}

TEST_CASE("a1 refuses thin replica counts and disordered grids") {
  ModelFamily fam;
  CHECK_THROWS_AS(check_a1(fam, {10}, {1.0}, 99, 5, {0.25}),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_a1(fam, {20, 10}, {1.0}, 100, 5, {0.25}),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_a1(fam, {10, 20}, {2.0, 1.0}, 100, 5, {0.25}),
                  std::invalid_argument);
}

TEST_CASE("a2 on the catastrophe-only family is exact") {
  ModelFamily fam;
  fam.x0 = 1.0;
  fam.schedule = CatastropheSchedule({{0.6, 0.5}});
  const MonotoneControl Fn = build_Fn(fam.schedule, 1.0);
  const A2Result res = check_a2(fam, 50, 8.0, Fn,
                                {{{0.5, 0.7, 1.0}}, {{0.5, 0.5, 1.0}}}, 100, 7);
  REQUIRE(res.points.size() == 2);
  const A2Point& moving = res.points[0];
  CHECK(moving.est.mean == 0.25);  // (0.5 - 1)^2 exactly, every replica
  CHECK(moving.est.variance == 0.0);
  CHECK(moving.f_increment == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(moving.ratio == doctest::Approx(0.25 / 0.7).epsilon(1e-12));
  CHECK(!moving.hard_violation);

  const A2Point& vacuous = res.points[1];
  CHECK(vacuous.est.mean == 0.0);  // s == t
  CHECK(vacuous.f_increment == 0.0);
  CHECK(!vacuous.hard_violation);
  CHECK(!res.any_hard_violation);
  CHECK(res.max_ratio == doctest::Approx(0.25 / 0.7).epsilon(1e-12));
}

TEST_CASE("a2 flags movement against a flat control as a hard violation") {
  ModelFamily fam;
  fam.lambda = 5;
  fam.x0 = 1.0;
  const MonotoneControl flat(0.0, {}, 1.0);
  const A2Result res =
      check_a2(fam, 10, 8.0, flat, {{{0.0, 0.5, 1.0}}}, 200, 8);
  REQUIRE(res.points.size() == 1);
  CHECK(res.points[0].f_increment == 0.0);
  CHECK(res.points[0].hard_violation);
  CHECK(res.any_hard_violation);
}

TEST_CASE("a2 small-increment filter drops large-increment grid points") {
  ModelFamily fam;
  fam.x0 = 1.0;
  fam.schedule = CatastropheSchedule({{0.6, 0.5}});
  const MonotoneControl Fn = build_Fn(fam.schedule, 1.0);
  // increments: (0.5, 0.7) -> 0.7, (0.0, 0.2) -> 0.2
  const A2Result res = check_a2(fam, 50, 8.0, Fn,
                                {{{0.5, 0.7, 1.0}}, {{0.0, 0.2, 1.0}}}, 100, 9,
                                /*eta_bar0=*/0.5);
  CHECK(res.dropped == 1);
  REQUIRE(res.points.size() == 1);
  CHECK(res.points[0].t == 0.2);
}

TEST_CASE("a2 verdict against a configured constant") {
  ModelFamily fam;
  fam.x0 = 1.0;
  fam.schedule = CatastropheSchedule({{0.6, 0.5}});
  const MonotoneControl Fn = build_Fn(fam.schedule, 1.0);
  const std::vector<std::array<double, 3>> grid{{{0.5, 0.7, 1.0}}};
  const A2Result pass = check_a2(fam, 50, 8.0, Fn, grid, 100, 10,
                                 std::nullopt, /*c_k=*/0.5);
  CHECK(pass.within_c_k);
  const A2Result fail = check_a2(fam, 50, 8.0, Fn, grid, 100, 10,
                                 std::nullopt, /*c_k=*/0.1);
  CHECK(!fail.within_c_k);
}

TEST_CASE("a2 validates its grid") {
  ModelFamily fam;
  const MonotoneControl Fn(1.0, {}, 1.0);
  CHECK_THROWS_AS(
      check_a2(fam, 10, 8.0, Fn, {{{0.7, 0.5, 1.0}}}, 100, 11),
      std::invalid_argument);  // s > t
  CHECK_THROWS_AS(
      check_a2(fam, 10, 8.0, Fn, {{{0.0, 0.5, 9.0}}}, 100, 11),
      std::invalid_argument);  // x0 > K
}

TEST_CASE("tightness curve on deterministic families is exact") {
  ModelFamily fam;
  fam.x0 = 1.0;

  // no movement at all: every estimate is exactly zero
  const TightnessResult still =
      tightness_curve(fam, {10}, {0.1, 0.3}, 0.1, 100, 12);
  for (const auto& row : still.rows) CHECK(row.est.mean == 0.0);

  // one catastrophe of capped size 0.5 at t = 0.5
  fam.schedule = CatastropheSchedule({{0.5, 0.5}});
  const TightnessResult sep =
      tightness_curve(fam, {10}, {0.3}, 0.4, 100, 12);
  CHECK(sep.rows[0].est.mean == 0.0);  // (0, 0.5, 1) separates the jump
  const TightnessResult stuck =
      tightness_curve(fam, {10}, {0.6}, 0.4, 100, 12);
  CHECK(stuck.rows[0].est.mean == 1.0);  // no 0.6-sparse subdivision helps
  const TightnessResult big_delta =
      tightness_curve(fam, {10}, {0.6}, 0.6, 100, 12);
  CHECK(big_delta.rows[0].est.mean == 0.0);  // jump size 0.5 < delta
}

TEST_CASE("tightness curve is exactly monotone in eta on shared paths") {
  ModelFamily fam;
  fam.lambda = 1;
  fam.mu = 1;
  fam.kappa = 1;
  fam.gamma = 1;
  fam.x0 = 1.0;
  fam.schedule = CatastropheSchedule::geometric(1.0, 0.5, 0.7, 5);
  const std::vector<double> etas{0.02, 0.05, 0.1, 0.2};
  const TightnessResult res =
      tightness_curve(fam, {20}, etas, 0.15, 150, 13);
  REQUIRE(res.rows.size() == etas.size());
  for (std::size_t i = 0; i + 1 < etas.size(); ++i) {
    REQUIRE(res.rows[i].est.mean <= res.rows[i + 1].est.mean);
  }
}

TEST_CASE("tightness curve is monotone in delta on the same seed") {
  ModelFamily fam;
  fam.lambda = 1;
  fam.mu = 1;
  fam.gamma = 1;
  fam.x0 = 1.0;
  const TightnessResult lo =
      tightness_curve(fam, {20}, {0.1}, 0.1, 150, 14);
  const TightnessResult hi =
      tightness_curve(fam, {20}, {0.1}, 0.3, 150, 14);
  CHECK(lo.rows[0].est.mean >= hi.rows[0].est.mean);
}

TEST_CASE("m_proxy on the catastrophe-only family") {
  ModelFamily fam;
  fam.x0 = 1.0;
  fam.schedule = CatastropheSchedule({{0.5, 0.5}});
  const MonotoneControl Fn = build_Fn(fam.schedule, 1.0);
  // eta = 0.3 lets the deterministic pair (0.25, 0.5) straddle the jump
  const MProxyResult res =
      m_proxy(fam, 20, Fn, 0.0, 1.0, 0.3, 8.0, {0.1}, 100, 15);
  CHECK(res.est.mean == 0.25);  // capped distance 0.5 squared, every path
  CHECK(res.bound == doctest::Approx(5.0 * 1.1).epsilon(1e-12));
  CHECK(res.within);
  CHECK(!res.best_pair.empty());

  // a tiny state cap excludes the pre-catastrophe level 1.0 entirely
  const MProxyResult capped =
      m_proxy(fam, 20, Fn, 0.0, 1.0, 0.3, 0.6, {0.1}, 100, 15);
  CHECK(capped.est.mean == 0.0);
  CHECK(capped.within);
}

TEST_CASE("m_proxy stays within its bound on a busy family") {
  ModelFamily fam;
  fam.lambda = 1;
  fam.mu = 1;
  fam.kappa = 1;
  fam.gamma = 1;
  fam.x0 = 1.0;
  fam.schedule = CatastropheSchedule::geometric(1.0, 0.5, 0.8, 4);
  const MonotoneControl Fn = build_Fn(fam.schedule, 1.0);
  const MProxyResult res =
      m_proxy(fam, 50, Fn, 0.0, 1.0, 0.1, 8.0, {0.1, 0.2}, 200, 16);
  CHECK(res.est.mean <= res.bound + res.est.ci_halfwidth);
  CHECK(res.within);
}

TEST_CASE("m_proxy validates the window") {
  ModelFamily fam;
  const MonotoneControl Fn(1.0, {}, 1.0);
  CHECK_THROWS_AS(m_proxy(fam, 10, Fn, 0.0, 1.0, 0.6, 8.0, {0.1}, 100, 17),
                  std::invalid_argument);  // b_hi - 2*eta < 0
  CHECK_THROWS_AS(m_proxy(fam, 10, Fn, 0.5, 0.5, 0.1, 8.0, {0.1}, 100, 17),
                  std::invalid_argument);  // empty window
}
