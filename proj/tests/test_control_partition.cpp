#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "tightness/control_partition.hpp"
#include "tightness/monotone_control.hpp"
#include "tightness/rng.hpp"

using namespace tightness;

TEST_CASE("mesh partition of the identity control") {
  const MonotoneControl F(1.0, {}, 1.0);
  const MeshCertificate cert = build_mesh_partition(F, 1.0, 0.5);
  CHECK(cert.ok);
  CHECK(cert.mesh_bound ==
        doctest::Approx(0.125 / std::cbrt(2.0)).epsilon(1e-15));
  CHECK(cert.missed_jump_mass == 0.0);
  CHECK(cert.max_increment <= cert.mesh_bound);
  const auto& b = cert.subdivision.breakpoints();
  CHECK(b.front() == 0.0);
  CHECK(b.back() == 1.0);
  // verify the certificate inequalities independently
  for (std::size_t l = 0; l + 1 < b.size(); ++l) {
    CHECK(F.left_value(b[l + 1]) - F.value(b[l]) <= cert.mesh_bound);
  }
}

TEST_CASE("an atom heavier than epsilon^3 forces a breakpoint at its time") {
  const MonotoneControl F(0.0, {{0.5, 1.0}}, 1.0);
  const MeshCertificate cert = build_mesh_partition(F, 1.0, 0.5);
  CHECK(cert.ok);
  const auto& b = cert.subdivision.breakpoints();
  CHECK(std::binary_search(b.begin(), b.end(), 0.5));
  CHECK(cert.missed_jump_mass == 0.0);
  CHECK(cert.max_increment <= cert.mesh_bound);
}

TEST_CASE("the zero control needs no interior breakpoints") {
  const MonotoneControl F(0.0, {}, 2.0);
  const MeshCertificate cert = build_mesh_partition(F, 2.0, 0.5);
  CHECK(cert.ok);
  CHECK(cert.subdivision.breakpoints() == std::vector<double>{0.0, 2.0});
}

TEST_CASE("repair adds missed atoms largest-first until the mass fits") {
  // nine atoms of dyadic size 1/16 so every partial sum is exact
  std::vector<MonotoneControl::Atom> atoms;
  for (int k = 1; k <= 9; ++k) atoms.push_back({k / 10.0, 0.0625});
  const MonotoneControl F(0.0, atoms, 1.0);
  const MeshCertificate cert = build_mesh_partition(F, 1.0, 0.5);
  CHECK(cert.ok);
  // sweep lands on (0, .2, .4, .6, .8, 1); equal sizes tie-break to earlier
  // times, so repair adds 0.1, 0.3, 0.5 and stops at mass 0.125 = eps^3
  CHECK(cert.subdivision.breakpoints() ==
        std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0});
  CHECK(cert.missed_jump_mass == 0.125);
  CHECK(cert.max_increment <= cert.mesh_bound);
}

TEST_CASE("certificate inequalities hold on random controls") {
  RngStream r(8675309, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<MonotoneControl::Atom> atoms;
    double t = 0;
    const int na = static_cast<int>(r.unit() * 6);
    for (int i = 0; i < na; ++i) {
      t += 0.05 + r.unit() * 0.3;
      if (t >= 2.0) break;
      atoms.push_back({t, r.unit() * 0.8});
    }
    const MonotoneControl F(r.unit() * 2.0, atoms, 2.0);
    for (const double eps : {0.3, 0.6, 1.0}) {
      const MeshCertificate cert = build_mesh_partition(F, 2.0, eps);
      REQUIRE(cert.ok);
      const auto& b = cert.subdivision.breakpoints();
      for (std::size_t l = 0; l + 1 < b.size(); ++l) {
        REQUIRE(F.left_value(b[l + 1]) - F.value(b[l]) <= cert.mesh_bound);
      }
      REQUIRE(cert.missed_jump_mass <= eps * eps * eps);
    }
  }
}

TEST_CASE("match_partition is the identity when the controls coincide") {
  const MonotoneControl F(1.0, {{1.0, 0.5}}, 2.0);
  const Subdivision b({0.0, 1.0, 2.0});
  const MatchedPartition m = match_partition(F, F, b);
  CHECK(m.bn.breakpoints() == b.breakpoints());
  CHECK(m.lambda(0.5) == 0.5);
  CHECK(m.Fn_at_bn == std::vector<double>{0.0, 1.5, 2.5});
}

TEST_CASE("a displaced atom shifts the matched partition") {
  const MonotoneControl F(1.0, {{1.0, 0.5}}, 2.0);
  const MonotoneControl Fn(1.0, {{1.05, 0.5}}, 2.0);
  const Subdivision b({0.0, 1.0, 2.0});
  const MatchedPartition m = match_partition(F, Fn, b);
  CHECK(m.bn.breakpoints() == std::vector<double>{0.0, 1.05, 2.0});
  CHECK(m.lambda(0.5) == doctest::Approx(0.525).epsilon(1e-15));
  CHECK(m.lambda(1.0) == 1.05);

  // the lattice-displacement form: the atom sits at 1 + 1/n
  const double n = 20.0;
  const MonotoneControl Fn2(1.0, {{1.0 + 1.0 / n, 0.5}}, 2.0);
  const MatchedPartition m2 = match_partition(F, Fn2, b);
  CHECK(m2.bn.breakpoints() ==
        std::vector<double>{0.0, 1.0 + 1.0 / n, 2.0});
}

TEST_CASE("breakpoints without atoms pass through the interpolation") {
  const MonotoneControl F(1.0, {{1.0, 0.5}}, 2.0);
  const MonotoneControl Fn(1.0, {{1.05, 0.5}}, 2.0);
  const Subdivision b({0.0, 0.5, 1.0, 2.0});
  const MatchedPartition m = match_partition(F, Fn, b);
  CHECK(m.bn.breakpoints()[1] == doctest::Approx(0.525).epsilon(1e-15));
}

TEST_CASE("matching fails loudly when no admissible partner exists") {
  const MonotoneControl F(0.0, {{0.5, 1.0}, {1.5, 1.0}}, 2.0);
  const Subdivision b({0.0, 0.5, 1.5, 2.0});
  // partner too far: window is half the minimal F gap = 0.5
  const MonotoneControl far(0.0, {{0.5, 1.0}, {0.9, 1.0}}, 2.0);
  CHECK_THROWS_AS(match_partition(F, far, b), MatchingError);
  // partner at the right spot but the wrong mass (|0.4 - 1| >= 0.5)
  const MonotoneControl light(0.0, {{0.5, 1.0}, {1.5, 0.4}}, 2.0);
  CHECK_THROWS_AS(match_partition(F, light, b), MatchingError);
  // both constraints satisfied: matches
  const MonotoneControl near(0.0, {{0.5, 1.0}, {1.3, 0.8}}, 2.0);
  const MatchedPartition m = match_partition(F, near, b);
  CHECK(m.bn.breakpoints() == std::vector<double>{0.0, 0.5, 1.3, 2.0});
}

TEST_CASE("window_increment_sup on a pure slope") {
  const MonotoneControl F(1.0, {}, 2.0);
  CHECK(window_increment_sup(F, 0.0, 0.5, 0.1) == 0.2);
  // degenerate window: just the increment at lo
  CHECK(window_increment_sup(F, 0.25, 0.25, 0.1) ==
        F.value(0.45) - F.value(0.25));
}

TEST_CASE("window_increment_sup captures an interior atom") {
  const MonotoneControl F(0.0, {{0.5, 0.5}}, 1.0);
  CHECK(window_increment_sup(F, 0.0, 1.0, 0.01) == 0.5);
  // window too early or too late misses it
  CHECK(window_increment_sup(F, 0.6, 1.0, 0.01) == 0.0);
}

TEST_CASE("window_increment_sup shrinks to the largest interior atom") {
  const MonotoneControl F(1.0, {{0.3, 0.2}, {0.7, 0.6}}, 1.0);
  const double tiny = window_increment_sup(F, 0.0, 1.0, 1e-9);
  CHECK(tiny == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("window_increment_sup is monotone in eta") {
  RngStream r(5551212, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<MonotoneControl::Atom> atoms;
    double t = 0;
    for (int i = 0; i < 4; ++i) {
      t += 0.1 + 0.4 * r.unit();
      if (t >= 2.0) break;
      atoms.push_back({t, r.unit()});
    }
    const MonotoneControl F(r.unit(), atoms, 2.0);
    double prev = -1;
    for (const double eta : {0.01, 0.05, 0.1, 0.3}) {
      const double s = window_increment_sup(F, 0.0, 2.0, eta);
      REQUIRE(s >= prev - 1e-12);
      prev = s;
    }
  }
}

TEST_CASE("window_increment_sup respects the freeze cap") {
  const MonotoneControl F(1.0, {{1.5, 3.0}}, 2.0);
  const MonotoneControl G = freeze_control(F, 1.0);
  // frozen at 1: nothing accrues past it, so the best window ends there
  CHECK(window_increment_sup(G, 0.0, 2.0, 0.1) == 0.2);
  CHECK(window_increment_sup(G, 1.0, 2.0, 0.1) == 0.0);
}
