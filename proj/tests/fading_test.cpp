#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "cmaccm/allocator.hpp"
#include "cmaccm/fading.hpp"
#include "cmaccm/rates.hpp"
#include "doctest.h"

using namespace cmaccm;

TEST_CASE("state sampling is deterministic in the seed") {
  RayleighSpec spec;
  spec.sigma1 = 1.5;
  spec.sigma3 = 0.7;
  spec.n_samples = 512;
  spec.seed = 12345;
  const std::vector<FadingState> first = sample_states(spec);
  const std::vector<FadingState> second = sample_states(spec);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].h1sq == second[i].h1sq);
    CHECK(first[i].h2sq == second[i].h2sq);
    CHECK(first[i].g1sq == second[i].g1sq);
  }

  spec.seed = 12346;
  const std::vector<FadingState> other = sample_states(spec);
  CHECK(other[0].h1sq != first[0].h1sq);
}

TEST_CASE("sampled squared gains have the configured means") {
  RayleighSpec spec;
  spec.sigma1 = 2.0;
  spec.sigma2 = 0.5;
  spec.n_samples = 100000;
  spec.seed = 2024;
  const std::vector<FadingState> states = sample_states(spec);
  double m1 = 0.0, m2 = 0.0, m3 = 0.0;
  for (const FadingState& st : states) {
    m1 += st.h1sq;
    m2 += st.h2sq;
    m3 += st.g1sq;
  }
  const double n = double(states.size());
  CHECK(m1 / n == doctest::Approx(2.0).epsilon(0.015));
  CHECK(m2 / n == doctest::Approx(0.5).epsilon(0.015));
  CHECK(m3 / n == doctest::Approx(1.0).epsilon(0.015));
}

TEST_CASE("symmetric legitimate and eavesdropper statistics split the states evenly") {
  // With sigma1 == sigma3 and nu == mu membership reduces to h1sq > g1sq,
  // a fair coin for iid exponentials.
  RayleighSpec spec;
  spec.nu = spec.mu = 2.0;
  spec.n_samples = 100000;
  spec.seed = 77;
  const std::vector<FadingState> states = sample_states(spec);
  const double frac =
      double(std::count_if(states.begin(), states.end(),
                           [](const FadingState& st) { return in_set_a(st); })) /
      double(states.size());
  CHECK(frac == doctest::Approx(0.5).epsilon(0.013));
}

TEST_CASE("ergodic boundary point reproduces frozen benchmark values") {
  RayleighSpec spec;
  spec.nu = spec.mu = 2.0;
  spec.n_samples = 4000;
  spec.seed = 7;

  struct Golden {
    double gamma1, r0, r1;
  };
  const Golden goldens[] = {
      {0.5, 4.05018920912, 0.0},
      {1.0, 4.05018920912, 0.0},
      {2.0, 3.42356280897, 0.450969586017},
      {4.0, 2.92076397734, 0.642913912868},
  };
  for (const Golden& g : goldens) {
    const ErgodicBoundaryPoint pt = ergodic_boundary_point(spec, g.gamma1, 10.0, 10.0);
    REQUIRE(pt.solve.converged);
    CHECK(pt.rates.r0 == doctest::Approx(g.r0).epsilon(1e-6));
    if (g.r1 == 0.0)
      CHECK(pt.rates.r1 == 0.0);
    else
      CHECK(pt.rates.r1 == doctest::Approx(g.r1).epsilon(1e-6));
    CHECK(std::abs(pt.solve.power_used_1 - 10.0) <= 10.0 * 1e-6 + 1e-12);
    CHECK(std::abs(pt.solve.power_used_2 - 10.0) <= 10.0 * 1e-6 + 1e-12);
    CHECK(pt.se_r0 > 0.0);
    CHECK(pt.se_r0 < 0.1);
    CHECK(pt.se_r1 >= 0.0);
  }
}

TEST_CASE("ergodic solve at zero weight beats every feasible fixed-price policy") {
  RayleighSpec spec;
  spec.nu = spec.mu = 2.0;
  spec.n_samples = 500;
  spec.seed = 11;
  const double P = 10.0;
  const ErgodicBoundaryPoint pt = ergodic_boundary_point(spec, 0.0, P, P);
  REQUIRE(pt.solve.converged);

  const std::vector<FadingState> states = sample_states(spec);
  double best = 0.0;
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 15; ++j) {
      const double l1 = std::pow(10.0, -3.0 + 5.0 * i / 14.0);
      const double l2 = std::pow(10.0, -3.0 + 5.0 * j / 14.0);
      double r0 = 0.0, u1 = 0.0, u2 = 0.0;
      for (const FadingState& st : states) {
        const PowerAllocation al = allocate_fading_state(st, 0.0, {l1, l2});
        const RatePair r = rate_contribution_fading(st, al);
        r0 += r.r0;
        u1 += al.a + al.b;
        u2 += al.p2;
      }
      const double n = double(states.size());
      if (u1 / n <= P * (1.0 + 1e-6) && u2 / n <= P * (1.0 + 1e-6))
        best = std::max(best, r0 / n);
    }
  }
  CHECK(pt.rates.r0 >= best - 1e-6);
}

TEST_CASE("sampling rejects malformed specifications") {
  RayleighSpec spec;
  spec.sigma1 = 0.0;
  CHECK_THROWS_AS(sample_states(spec), std::invalid_argument);
  spec.sigma1 = 1.0;
  spec.n_samples = 0;
  CHECK_THROWS_AS(sample_states(spec), std::invalid_argument);
  spec.n_samples = 10;
  spec.nu = -1.0;
  CHECK_THROWS_AS(sample_states(spec), std::invalid_argument);
}

TEST_CASE("thread count override never changes results") {
  RayleighSpec spec;
  spec.nu = 2.0;
  spec.mu = 2.0;
  spec.n_samples = 8192;  // large enough to actually engage the thread pool
  spec.seed = 7;

  ::setenv("CMACCM_THREADS", "1", 1);
  const ErgodicBoundaryPoint serial = ergodic_boundary_point(spec, 2.0, 10.0, 10.0);
  ::setenv("CMACCM_THREADS", "6", 1);
  const ErgodicBoundaryPoint threaded = ergodic_boundary_point(spec, 2.0, 10.0, 10.0);
  ::unsetenv("CMACCM_THREADS");

  REQUIRE(serial.solve.converged);
  REQUIRE(threaded.solve.converged);
  // bitwise agreement, not approximate: reductions are ordered by design
  CHECK(threaded.rates.r0 == serial.rates.r0);
  CHECK(threaded.rates.r1 == serial.rates.r1);
  CHECK(threaded.se_r0 == serial.se_r0);
  CHECK(threaded.se_r1 == serial.se_r1);
  CHECK(threaded.solve.multipliers.lambda1 == serial.solve.multipliers.lambda1);
  CHECK(threaded.solve.multipliers.lambda2 == serial.solve.multipliers.lambda2);
  CHECK(threaded.solve.power_used_1 == serial.solve.power_used_1);
  CHECK(threaded.solve.power_used_2 == serial.solve.power_used_2);
}
