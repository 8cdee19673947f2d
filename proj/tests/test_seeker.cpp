#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "nashseek/builtin_games.hpp"
#include "nashseek/seeker.hpp"

using namespace nashseek;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SeekerConfig quadratic_config() {
  SeekerConfig sc;
  sc.perturbation = {{0.1}, {1.0}, {0.0}, {1.0}};
  sc.schedule = {ScheduleKind::Constant, 0.05};
  sc.horizon = 100;
  sc.initial = {0.0};
  sc.seed = 42;
  return sc;
}

}  // namespace

TEST_CASE("single update arithmetic") {
  PerturbationParams p{{0.9}, {0.9}, {0.0}, {0.9}};
  const std::vector<double> payoffs{2.0};
  const std::vector<double> start{1.0};
  // 1 + 1 * 0.9 * 0.9 sin(0.9) * 2, high-precision reference
  const auto next = seeker_step(start, 1.0, 1.0, payoffs, p);
  CHECK_THAT(next[0], WithinRel(2.26898959359652308931, 1e-15));

  SECTION("zero growth freezes") {
    PerturbationParams z0{{0.9}, {0.9}, {0.0}, {0.0}};
    CHECK(seeker_step(start, 1.0, 1.0, payoffs, z0)[0] == 1.0);
  }
  SECTION("zero rate freezes") {
    CHECK(seeker_step(start, 1.0, 0.0, payoffs, p)[0] == 1.0);
  }
}

TEST_CASE("horizon zero yields exactly the initial record") {
  ConstantGame game({1.0});
  auto sc = quadratic_config();
  sc.horizon = 0;
  const auto traj = run_seeker(game, sc);
  REQUIRE(traj.records.size() == 1);
  CHECK(traj.records[0].k == 0);
  CHECK(traj.records[0].clock == 0.0);
  CHECK(traj.records[0].intermediary[0] == 0.0);
}

TEST_CASE("action decomposition is exact", "[invariant]") {
  QuadraticGame game({2.0}, {1.0}, 0.5);
  auto sc = quadratic_config();
  sc.horizon = 500;
  const auto traj = run_seeker(game, sc);
  for (const auto& rec : traj.records) {
    // bitwise: the same expression the runner evaluates
    CHECK(rec.actions[0] == rec.intermediary[0] + sc.perturbation.signal(0, rec.clock));
  }
}

TEST_CASE("update identity holds record by record", "[invariant]") {
  QuadraticGame game({2.0}, {1.0}, 0.5);
  auto sc = quadratic_config();
  sc.horizon = 300;
  const auto traj = run_seeker(game, sc);
  for (std::size_t k = 0; k + 1 < traj.records.size(); ++k) {
    const auto& cur = traj.records[k];
    const auto& nxt = traj.records[k + 1];
    const double moved = (nxt.intermediary[0] - cur.intermediary[0]) / cur.rate;
    const double direction =
        sc.perturbation.growth[0] * sc.perturbation.signal(0, cur.clock) * cur.payoffs[0];
    CHECK_THAT(moved, WithinAbs(direction, 1e-10 * std::max(1.0, std::abs(direction))));
  }
}

TEST_CASE("seed determinism is bitwise") {
  QuadraticGame game({2.0}, {1.0}, 1.0);
  auto sc = quadratic_config();
  sc.horizon = 400;
  const auto a = run_seeker(game, sc);
  const auto b = run_seeker(game, sc);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].intermediary == b.records[k].intermediary);
    CHECK(a.records[k].actions == b.records[k].actions);
    CHECK(a.records[k].payoffs == b.records[k].payoffs);
  }
  SECTION("another seed moves the noise") {
    auto sc2 = sc;
    sc2.seed = 43;
    const auto c = run_seeker(game, sc2);
    CHECK(c.records.back().intermediary != a.records.back().intermediary);
  }
}

TEST_CASE("zero payoff freezes the iterate") {
  ConstantGame game({0.0});
  auto sc = quadratic_config();
  sc.horizon = 250;
  sc.initial = {1.25};
  const auto traj = run_seeker(game, sc);
  for (const auto& rec : traj.records) CHECK(rec.intermediary[0] == 1.25);
}

TEST_CASE("quadratic peak is found") {
  // deterministic single-node quadratic with peak at 2
  QuadraticGame game({2.0}, {1.0}, 0.0);
  SeekerConfig sc;
  sc.perturbation = {{0.1}, {1.0}, {0.0}, {1.0}};
  sc.schedule = {ScheduleKind::Constant, 0.05};
  sc.horizon = 20000;
  sc.initial = {0.0};
  sc.seed = 7;
  const auto traj = run_seeker(game, sc);
  const auto mean = traj.windowed_mean(2000);
  CHECK_THAT(mean[0], WithinAbs(2.0, 0.05));
}

TEST_CASE("non-finite payoff aborts with node and iteration") {
  // curvature large + huge start overflows the quadratic payoff to -inf
  QuadraticGame game({0.0}, {1.0}, 0.0);
  auto sc = quadratic_config();
  sc.initial = {1e200};
  try {
    run_seeker(game, sc);
    FAIL("expected NumericalAbort");
  } catch (const NumericalAbort& e) {
    CHECK(e.node() == 0);
    CHECK(std::string(e.what()).find("node 0") != std::string::npos);
  }
}

TEST_CASE("nonnegativity clamp") {
  ConstantGame game({0.0});
  auto sc = quadratic_config();
  sc.perturbation = {{1.0}, {1.0}, {0.0}, {1.0}};
  sc.initial = {0.1};
  sc.horizon = 100;
  sc.clamp_nonnegative = true;
  const auto traj = run_seeker(game, sc);
  for (const auto& rec : traj.records) CHECK(rec.actions[0] >= 0.0);
}

TEST_CASE("config validation catches mismatches") {
  ConstantGame game({0.0});
  auto sc = quadratic_config();
  sc.initial = {0.0, 0.0};
  CHECK_THROWS_AS(run_seeker(game, sc), std::invalid_argument);
  auto sc2 = quadratic_config();
  sc2.initial = {std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(run_seeker(game, sc2), std::invalid_argument);
}

TEST_CASE("projected gradient ascent baseline") {
  SECTION("zero gradient keeps the trajectory constant") {
    ConstantGame game({3.0});
    StepSchedule s{ScheduleKind::Constant, 0.1};
    const std::vector<double> start{0.7};
    const auto traj = baseline_gradient_ascent(game, s, start, 10.0, 50);
    for (const auto& rec : traj.records) CHECK(rec.actions[0] == 0.7);
  }
  SECTION("linear contraction on the quadratic") {
    QuadraticGame game({2.0}, {1.0}, 0.0);
    StepSchedule s{ScheduleKind::Constant, 0.1};
    const std::vector<double> start{0.0};
    const auto traj = baseline_gradient_ascent(game, s, start, 10.0, 200);
    CHECK_THAT(traj.records.back().actions[0], WithinAbs(2.0, 1e-6));
  }
  SECTION("iterates stay inside the box") {
    QuadraticGame game({5.0}, {1.0}, 0.0);
    StepSchedule s{ScheduleKind::Constant, 0.4};
    const std::vector<double> start{3.9};
    const auto traj = baseline_gradient_ascent(game, s, start, 3.0, 60);
    for (const auto& rec : traj.records) {
      CHECK(rec.actions[0] >= 0.0);
      CHECK(rec.actions[0] <= 3.0);
    }
  }
}
