#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nashseek/stats.hpp"
#include "nashseek/wireless.hpp"

using namespace nashseek;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

WirelessParams reference_params() {
  // two pairs, diagonal gain mean 1, cross mean 0.01
  return WirelessParams::uniform(2, 1.0, 0.01, 10.0, 2.0, 1.0);
}

}  // namespace

TEST_CASE("payoff fixtures") {
  auto params = reference_params();
  SECTION("zero power, zero payoff") {
    const std::vector<double> g{1.0, 0.3, 0.3, 1.0}, p{0.0, 0.0};
    CHECK(wireless_payoff(g, p, params, 0) == 0.0);
    CHECK(wireless_payoff(g, p, params, 1) == 0.0);
  }
  SECTION("identity gains, unit powers") {
    const std::vector<double> g{1.0, 0.0, 0.0, 1.0}, p{1.0, 1.0};
    // 10 ln 2 - 2
    CHECK_THAT(wireless_payoff(g, p, params, 0), WithinRel(4.93147180559945309417, 1e-15));
  }
  SECTION("dead direct link never pays") {
    const std::vector<double> g{0.0, 0.0, 0.0, 1.0}, p{0.7, 0.0};
    CHECK_THAT(wireless_payoff(g, p, params, 0), WithinRel(-2.0 * 0.7, 1e-15));
  }
  SECTION("negative power rejected") {
    const std::vector<double> g{1.0, 0.0, 0.0, 1.0}, p{-0.1, 1.0};
    CHECK_THROWS_AS(wireless_payoff(g, p, params, 0), std::domain_error);
    CHECK_THROWS_AS(wireless_payoff(g, p, params, 1), std::domain_error);
  }
}

TEST_CASE("payoff shape: interference hurts, own response is concave") {
  auto params = reference_params();
  Rng rng = make_rng(11);
  std::uniform_real_distribution<double> unif(0.2, 6.0);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> g{unif(rng), unif(rng), unif(rng), unif(rng)};
    std::vector<double> p{unif(rng), unif(rng)};
    const double h = 1e-4;
    // strictly decreasing in the interferer's power
    auto up = p, dn = p;
    up[1] += h;
    dn[1] -= h;
    CHECK(wireless_payoff(g, up, params, 0) < wireless_payoff(g, dn, params, 0));
    // strictly concave in own power
    auto po = p, mo = p;
    po[0] += h;
    mo[0] -= h;
    const double second = (wireless_payoff(g, po, params, 0) -
                           2.0 * wireless_payoff(g, p, params, 0) +
                           wireless_payoff(g, mo, params, 0)) /
                          (h * h);
    CHECK(second < 0.0);
  }
}

TEST_CASE("channel sampling") {
  auto params = reference_params();
  SECTION("zero-variance entry gives a dead link") {
    auto z = params;
    z.gain_var[1] = 0.0;  // tx 0 -> rx 1
    Rng rng = make_rng(3);
    for (int i = 0; i < 50; ++i) {
      const auto c = sample_channel(z, rng);
      CHECK(c.g(0, 1) == 0.0);
    }
  }
  SECTION("gain mean matches the configured variance") {
    Rng rng = make_rng(5);
    RunningStats st;
    const int n = 100000;
    for (int i = 0; i < n; ++i) st.push(sample_channel(params, rng).g(0, 0));
    // exponential(1): sd 1, so 3 sigma of the sample mean
    CHECK_THAT(st.mean(), WithinAbs(1.0, 3.0 / std::sqrt(static_cast<double>(n))));
  }
  SECTION("seed determinism") {
    Rng r1 = make_rng(9), r2 = make_rng(9);
    const auto a = sample_channel(params, r1);
    const auto b = sample_channel(params, r2);
    CHECK(a.coeff == b.coeff);
    CHECK(a.gain == b.gain);
  }
}

TEST_CASE("analytic equilibrium") {
  SECTION("identity system") {
    auto params = WirelessParams::uniform(3, 1.0, 0.0, 2.0, 2.0, 0.5);
    // target = 2*1/2 - 0.5 = 0.5 per node, identity matrix
    const auto p = analytic_equilibrium(params);
    for (double v : p) CHECK_THAT(v, WithinRel(0.5, 1e-14));
  }
  SECTION("reference two-pair instance") {
    const auto p = analytic_equilibrium(reference_params());
    CHECK_THAT(p[0], WithinAbs(3.96039603960396039604, 1e-12));
    CHECK_THAT(p[1], WithinAbs(3.96039603960396039604, 1e-12));
  }
  SECTION("random diagonally dominant instance passes the residual oracle") {
    Rng rng = make_rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
      WirelessParams params;
      params.pairs = 3;
      params.bandwidth = 8.0;
      params.price = 1.5;
      params.noise_var = 0.3;
      params.gain_var.resize(9);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
          params.gain_var[i * 3 + j] = i == j ? 2.0 + unif(rng) : 0.2 * unif(rng);
      REQUIRE(diagonal_dominance_check(params).ok);
      const auto p = analytic_equilibrium(params);
      const auto sys = equilibrium_system(params);
      double r2 = 0.0, t2 = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        double row = 0.0;
        for (std::size_t i = 0; i < 3; ++i) row += sys.matrix[j * 3 + i] * p[i];
        r2 += (row - sys.target[j]) * (row - sys.target[j]);
        t2 += sys.target[j] * sys.target[j];
      }
      CHECK(std::sqrt(r2) <= 1e-10 * std::sqrt(t2));
    }
  }
  SECTION("nonpositive target reported") {
    auto params = reference_params();
    params.price = 25.0;  // bandwidth*1/25 < noise_var
    try {
      analytic_equilibrium(params);
      FAIL("expected EquilibriumError");
    } catch (const EquilibriumError& e) {
      CHECK(e.kind() == EquilibriumError::Kind::NonpositiveTarget);
    }
  }
  SECTION("singular system reported") {
    WirelessParams params;
    params.pairs = 2;
    params.bandwidth = 10.0;
    params.price = 2.0;
    params.noise_var = 1.0;
    params.gain_var = {1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(analytic_equilibrium(params), EquilibriumError);
  }
}

TEST_CASE("diagonal dominance check") {
  SECTION("reference margins") {
    const auto rep = diagonal_dominance_check(reference_params());
    CHECK(rep.ok);
    CHECK_THAT(rep.margins[0], WithinRel(0.99, 1e-14));
    CHECK_THAT(rep.margins[1], WithinRel(0.99, 1e-14));
  }
  SECTION("violation flagged") {
    WirelessParams params;
    params.pairs = 2;
    params.bandwidth = 10.0;
    params.price = 2.0;
    params.noise_var = 1.0;
    params.gain_var = {1.0, 2.0, 2.0, 1.0};
    const auto rep = diagonal_dominance_check(params);
    CHECK_FALSE(rep.ok);
    CHECK_THAT(rep.margins[0], WithinRel(-1.0, 1e-14));
  }
  SECTION("single pair is vacuously dominant") {
    auto params = WirelessParams::uniform(1, 1.0, 0.0, 10.0, 2.0, 1.0);
    CHECK(diagonal_dominance_check(params).ok);
  }
  SECTION("dominance implies the solve succeeds") {
    Rng rng = make_rng(23);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
      auto params = WirelessParams::uniform(2, 1.0 + unif(rng), 0.4 * unif(rng), 10.0,
                                            2.0, 0.2);
      if (!diagonal_dominance_check(params).ok) continue;
      CHECK_NOTHROW(analytic_equilibrium(params));
    }
  }
}

TEST_CASE("expectation modes") {
  auto params = reference_params();
  const std::vector<double> p{3.0, 2.2};

  SECTION("exact matches a large monte carlo run") {
    WirelessGame exact(params, ExpectationMode::Exact);
    WirelessGame mc(params, ExpectationMode::MonteCarlo, 200000, 99);
    for (std::size_t j = 0; j < 2; ++j) {
      double se = mc.expectation_stderr(p, j);
      CHECK_THAT(exact.expected_payoff(p, j),
                 WithinAbs(mc.expected_payoff(p, j), 4.0 * se));
    }
  }
  SECTION("frozen channel: expectation equals the payoff at mean gains") {
    WirelessGame frozen(params, ExpectationMode::MeanField, 100, 1, true);
    CHECK(frozen.expected_payoff(p, 0) == wireless_payoff(params.gain_var, p, params, 0));
    Rng rng = make_rng(1);
    CHECK(frozen.sample_state(rng) == params.gain_var);
    CHECK_FALSE(frozen.is_stochastic());
  }
  SECTION("interface payoff equals the direct call") {
    WirelessGame g(params);
    Rng rng = make_rng(2);
    const auto s = g.sample_state(rng);
    CHECK(g.payoff(s, p, 0) == wireless_payoff(s, p, params, 0));
  }
  SECTION("monte carlo stderr shrinks like 1/sqrt(2) under doubling") {
    WirelessGame m1(params, ExpectationMode::MonteCarlo, 4000, 5);
    WirelessGame m2(params, ExpectationMode::MonteCarlo, 8000, 5);
    const double s1 = m1.expectation_stderr(p, 0);
    const double s2 = m2.expectation_stderr(p, 0);
    CHECK_THAT(s1 / s2, WithinAbs(std::sqrt(2.0), 0.12));
  }
  SECTION("seeded expectation is reproducible and responds to the seed") {
    WirelessGame mc(params, ExpectationMode::MonteCarlo, 500, 5);
    CHECK(mc.expected_payoff_seeded(p, 0, 77) == mc.expected_payoff_seeded(p, 0, 77));
    CHECK(mc.expected_payoff_seeded(p, 0, 77) != mc.expected_payoff_seeded(p, 0, 78));
    WirelessGame exact(params, ExpectationMode::Exact);
    CHECK(exact.expected_payoff_seeded(p, 0, 77) == exact.expected_payoff(p, 0));
  }
}

TEST_CASE("gradient/expectation exchange on the wireless payoff", "[invariant]") {
  auto params = reference_params();
  Rng rng = make_rng(31);
  std::uniform_real_distribution<double> unif(0.5, 5.0);
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<double> p{unif(rng), unif(rng)};
    const std::size_t j = trial % 2;
    const double h = 1e-3 * std::max(1.0, p[j]);
    auto up = p, dn = p;
    up[j] += h;
    dn[j] -= h;

    // per-realization analytic derivative vs the per-realization central
    // difference of the payoff (shared draws), each with its standard error
    const std::size_t m = 20000;
    Rng draw = make_rng(100 + trial);
    std::exponential_distribution<double> ex(1.0);
    RunningStats deriv, fd_mc;
    std::vector<double> g(4);
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t i = 0; i < 4; ++i) g[i] = params.gain_var[i] * ex(draw);
      deriv.push(wireless_payoff_own_derivative(g, p, params, j));
      fd_mc.push((wireless_payoff(g, up, params, j) - wireless_payoff(g, dn, params, j)) /
                 (2.0 * h));
    }
    const double combined =
        std::sqrt(deriv.stderr_mean() * deriv.stderr_mean() +
                  fd_mc.stderr_mean() * fd_mc.stderr_mean());
    CHECK_THAT(deriv.mean(), WithinAbs(fd_mc.mean(), 3.0 * combined + 1e-6));

    // and against the finite difference of the exact expectation
    WirelessGame exact(params, ExpectationMode::Exact);
    const double fd_exact = exact.expected_gradient(p, j, j);
    CHECK_THAT(deriv.mean(), WithinAbs(fd_exact, 3.0 * deriv.stderr_mean() + 1e-6));
  }
}

TEST_CASE("exact expectation fixture") {
  // E[payoff] at the symmetric equilibrium point, mpmath reference
  WirelessGame exact(reference_params(), ExpectationMode::Exact);
  const double ps = 3.96039603960396039604;
  const std::vector<double> p{ps, ps};
  CHECK_THAT(exact.expected_payoff(p, 0), WithinRel(5.17145164629959631709, 1e-12));
  CHECK_THAT(exact.expected_payoff(p, 1), WithinRel(5.17145164629959631709, 1e-12));
}
