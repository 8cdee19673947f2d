#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nashseek/harness.hpp"

using namespace nashseek;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("nashseek_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

ExperimentConfig quadratic_cfg(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.game = GameKind::Quadratic;
  cfg.quadratic.peak = {2.0};
  cfg.quadratic.curvature = {1.0};
  cfg.quadratic.noise_sd = 0.5;
  cfg.perturbation = {{0.2}, {1.0}, {0.0}, {1.0}};
  cfg.schedule = {ScheduleKind::Constant, 0.05};
  cfg.horizon = 400;
  cfg.init_mode = InitMode::Values;
  cfg.init_values = {0.5};
  cfg.seed = 11;
  cfg.out_dir = out.string();
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NASHSEEK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cmd_run writes a reproducible trajectory and summary") {
  const auto dir = fresh_dir("run");
  auto cfg = quadratic_cfg(dir);
  const auto rep = harness::cmd_run(cfg);
  CHECK(fs::exists(rep.trajectory_path));
  CHECK(fs::exists(dir / "summary.txt"));
  CHECK(fs::exists(dir / "report.csv"));
  CHECK(rep.windowed_mean.size() == 1);
  CHECK(rep.equilibrium.has_value());

  SECTION("same config and seed: byte-identical csv") {
    const std::string first = slurp(rep.trajectory_path);
    harness::cmd_run(cfg);
    CHECK(slurp(rep.trajectory_path) == first);
  }
  SECTION("horizon zero gives exactly one data row") {
    auto cfg0 = quadratic_cfg(fresh_dir("run0"));
    cfg0.horizon = 0;
    const auto rep0 = harness::cmd_run(cfg0);
    std::istringstream is(slurp(rep0.trajectory_path));
    std::string line;
    std::size_t rows = 0;
    std::getline(is, line);  // header
    while (std::getline(is, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 1);
  }
  SECTION("baseline toggle writes a projected-ascent trajectory") {
    auto cfgb = quadratic_cfg(fresh_dir("runb"));
    cfgb.baseline = true;
    cfgb.baseline_max = 5.0;
    cfgb.horizon = 300;
    const auto repb = harness::cmd_run(cfgb);
    REQUIRE(repb.baseline_path.has_value());
    const auto base = read_trajectory_csv(*repb.baseline_path);
    CHECK_THAT(base.records.back().actions[0], WithinAbs(2.0, 1e-4));
  }
  SECTION("ode-compare toggle reports the windowed sup gap") {
    auto cfgc = quadratic_cfg(fresh_dir("runc"));
    cfgc.analysis.ode_compare = true;
    cfgc.analysis.compare_t0 = 0.0;
    cfgc.analysis.compare_window = 5.0;
    const auto repc = harness::cmd_run(cfgc);
    REQUIRE(repc.compare_sup_gap.has_value());
    CHECK(*repc.compare_sup_gap > 0.0);
    CHECK(std::isfinite(*repc.compare_sup_gap));
  }
}

TEST_CASE("averaging window aligns to whole dither periods") {
  auto cfg = quadratic_cfg(fresh_dir("win"));
  cfg.horizon = 20000;
  cfg.schedule = {ScheduleKind::Constant, 0.05};
  cfg.perturbation = {{0.2}, {1.0}, {0.0}, {1.0}};
  // period = 2 pi / (1 * 0.05) ~ 125.66 iterations; 10% of 20001 = 2000
  const std::size_t w = harness::averaging_window(cfg, cfg.horizon + 1);
  CHECK(w <= 2000);
  const double period = 2.0 * std::numbers::pi / 0.05;
  const double periods = static_cast<double>(w) / period;
  CHECK_THAT(periods, WithinAbs(std::round(periods), 0.01));
}

TEST_CASE("cmd_compare") {
  SECTION("zero growth: both sides frozen, gap at integrator tolerance") {
    auto cfg = quadratic_cfg(fresh_dir("cmp0"));
    cfg.perturbation.growth = {0.0};
    cfg.perturbation.amplitude = {0.2};
    cfg.analysis.compare_t0 = 0.0;
    cfg.analysis.compare_window = 5.0;
    const auto rep = harness::cmd_compare(cfg);
    CHECK(rep.sup_gap_value <= 1e-8);
    CHECK(fs::exists(rep.gap_csv_path));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "ode.csv"));
  }
  SECTION("window outside the trajectory is a config error") {
    auto cfg = quadratic_cfg(fresh_dir("cmpw"));
    cfg.horizon = 10;  // clock reaches only 0.5
    cfg.analysis.compare_t0 = 0.0;
    cfg.analysis.compare_window = 5.0;
    CHECK_THROWS_AS(harness::cmd_compare(cfg), ConfigError);
  }
  SECTION("sweep mode emits one row per rate and fits the scaling") {
    auto cfg = quadratic_cfg(fresh_dir("cmps"));
    cfg.quadratic.noise_sd = 2.0;
    cfg.perturbation = {{0.5}, {1.0}, {0.0}, {1.0}};
    cfg.init_values = {1.0};
    cfg.analysis.compare_lambdas = {0.1, 0.05};
    cfg.analysis.compare_seeds = 8;
    cfg.analysis.compare_window = 3.0;
    const auto rep = harness::cmd_compare(cfg);
    REQUIRE(rep.fit_vs_sqrt_lambda.has_value());
    CHECK(rep.mean_gaps.size() == 2);
    CHECK(rep.mean_gaps[1] < rep.mean_gaps[0]);
    const auto text = slurp(rep.gap_csv_path);
    CHECK(text.rfind("lambda,sqrt_lambda,mean_sup_gap,stderr\n", 0) == 0);
  }
}

TEST_CASE("cmd_equilibrium reports the closed-form point and residuals") {
  ExperimentConfig cfg;  // defaults: two-pair wireless reference instance
  cfg.out_dir = fresh_dir("eq").string();
  const auto rep = harness::cmd_equilibrium(cfg);
  CHECK_THAT(rep.power[0], WithinAbs(3.96039603960396, 1e-10));
  CHECK(rep.system_residual <= 1e-10);
  CHECK(rep.dominance.ok);
  CHECK_THAT(rep.dominance.margins[0], WithinRel(0.99, 1e-12));
  // the exchange-of-expectation residual is reported, not asserted to vanish
  CHECK_THAT(rep.stationarity_exact[0], WithinAbs(-0.342, 0.01));
  CHECK_THAT(rep.stationarity_mc[0], WithinAbs(rep.stationarity_exact[0], 0.05));
  // expected payoff is concave with a dominant diagonal at p*
  CHECK(rep.assumptions.curvature_ok[0]);
  CHECK(rep.assumptions.curvature_ok[1]);
  CHECK(rep.assumptions.dominance_ok);
  CHECK_FALSE(rep.assumptions.stationary_ok[0]);  // the mean-field point is not
                                                  // a stationary point of E r

  SECTION("non-wireless games are rejected") {
    auto qcfg = quadratic_cfg(fresh_dir("eqq"));
    CHECK_THROWS_AS(harness::cmd_equilibrium(qcfg), ConfigError);
  }
  SECTION("dominance violation still solves when the system is invertible") {
    ExperimentConfig viol;
    viol.gain_var_cross = 2.0;  // rows [1, 2] / [2, 1]
    viol.out_dir = fresh_dir("eqv").string();
    const auto r = harness::cmd_equilibrium(viol);
    CHECK_FALSE(r.dominance.ok);
    CHECK_THAT(r.power[0], WithinRel(4.0 / 3.0, 1e-10));
    CHECK_THAT(r.power[1], WithinRel(4.0 / 3.0, 1e-10));
  }
}

TEST_CASE("cmd_analyze") {
  SECTION("deterministic game: noise identically zero") {
    auto cfg = quadratic_cfg(fresh_dir("and"));
    cfg.quadratic.noise_sd = 0.0;
    cfg.horizon = 300;
    const auto run = harness::cmd_run(cfg);
    const auto rep = harness::cmd_analyze(cfg, run.trajectory_path);
    CHECK(rep.diagnostics.mean[0] == 0.0);
    CHECK(rep.diagnostics.ratio_max == 0.0);
    CHECK(rep.diagnostics.all_mean_zero_ok);
    CHECK(rep.bounds.theorem1.value > 0.0);
  }
  SECTION("synthetic exponential-decay trajectory recovers the rate") {
    // build a trajectory whose gap to the quadratic peak decays at 0.35
    auto cfg = quadratic_cfg(fresh_dir("ane"));
    cfg.quadratic.noise_sd = 0.0;
    cfg.horizon = 700;
    cfg.schedule = {ScheduleKind::Constant, 0.05};

    QuadraticGame game(cfg.quadratic.peak, cfg.quadratic.curvature, 0.0);
    Trajectory traj;
    traj.nodes = 1;
    for (std::size_t k = 0; k <= cfg.horizon; ++k) {
      TrajectoryRecord rec;
      rec.k = k;
      rec.clock = cfg.schedule.khat(k);
      const double gap = 3.0 * std::exp(-0.35 * rec.clock) + 0.003;
      rec.intermediary = {2.0 + gap};
      rec.actions = {rec.intermediary[0] +
                     cfg.perturbation.signal(0, rec.clock)};
      rec.payoffs = {game.expected_payoff(rec.actions, 0)};
      rec.rate = cfg.schedule.lambda(k);
      traj.records.push_back(std::move(rec));
    }
    const auto path = fs::path(cfg.out_dir) / "synthetic.csv";
    write_trajectory_csv(path.string(), traj);
    cfg.init_values = {traj.records.front().intermediary[0]};
    const auto rep = harness::cmd_analyze(cfg, path.string());
    REQUIRE(rep.envelope.has_value());
    REQUIRE(rep.envelope->accepted);
    CHECK_THAT(rep.envelope->decay_rate, WithinRel(0.35, 0.1));
  }
  SECTION("mismatched config is an input error") {
    auto cfg = quadratic_cfg(fresh_dir("anm"));
    const auto run = harness::cmd_run(cfg);
    auto other = cfg;
    other.horizon = cfg.horizon + 1;
    CHECK_THROWS_AS(harness::cmd_analyze(other, run.trajectory_path), ConfigError);
    auto wrong_rate = cfg;
    wrong_rate.schedule.lambda0 = 0.07;
    CHECK_THROWS_AS(harness::cmd_analyze(wrong_rate, run.trajectory_path), ConfigError);
  }
}

TEST_CASE("large-dither wireless run: envelope falls back to the period average") {
  ExperimentConfig cfg;  // two-pair wireless defaults, horizon 2e5
  cfg.seed = 1;
  cfg.analysis.envelope = true;
  cfg.out_dir = fresh_dir("env").string();
  const auto rep = harness::cmd_run(cfg);
  REQUIRE(rep.envelope.has_value());
  // the raw gap oscillates with the dither and never decays past the floor
  CHECK_FALSE(rep.envelope->accepted);
  REQUIRE(rep.envelope_period_averaged.has_value());
  CHECK(rep.envelope_period_averaged->accepted);
  // the residual floor is of the scale of the cubed dither amplitude (0.729),
  // reported for comparison rather than asserted against it
  CHECK(rep.envelope_period_averaged->floor < 1.5);
}

TEST_CASE("cmd_plot renders nonempty deterministic svg files") {
  auto cfg = quadratic_cfg(fresh_dir("plot"));
  const auto run = harness::cmd_run(cfg);
  const auto rep = harness::cmd_plot(run.trajectory_path, cfg, cfg.out_dir);
  REQUIRE(fs::exists(rep.power_path));
  REQUIRE(fs::exists(rep.payoff_path));
  CHECK(fs::file_size(rep.power_path) > 500);
  CHECK(fs::file_size(rep.payoff_path) > 500);
  const std::string first = slurp(rep.power_path);
  harness::cmd_plot(run.trajectory_path, cfg, cfg.out_dir);
  CHECK(slurp(rep.power_path) == first);

  SECTION("malformed csv is an input error") {
    const auto bad = fs::path(cfg.out_dir) / "bad.csv";
    std::ofstream(bad) << "k,khat,hat_a_1,a_1,r_1,lambda\n0,0,zzz,0,0,0.1\n";
    CHECK_THROWS_AS(harness::cmd_plot(bad.string(), cfg, cfg.out_dir),
                    std::invalid_argument);
  }
  SECTION("empty trajectory is an input error") {
    const auto empty = fs::path(cfg.out_dir) / "empty.csv";
    std::ofstream(empty) << "k,khat,hat_a_1,a_1,r_1,lambda\n";
    CHECK_THROWS_AS(harness::cmd_plot(empty.string(), cfg, cfg.out_dir),
                    std::invalid_argument);
  }
}

TEST_CASE("cli exit codes", "[cli]") {
  const auto dir = fresh_dir("cli");

  // 0: a valid quadratic run
  auto cfg = quadratic_cfg(dir / "out");
  cfg.horizon = 50;
  const auto cfg_path = dir / "ok.ini";
  std::ofstream(cfg_path) << serialize_ini(cfg);
  CHECK(run_cli("run --config " + cfg_path.string()) == 0);

  // 2: config errors
  const auto bad_path = dir / "bad.ini";
  std::ofstream(bad_path) << "[game]\ntype = chess\n";
  CHECK(run_cli("run --config " + bad_path.string()) == 2);
  CHECK(run_cli("run --config " + (dir / "missing.ini").string()) == 2);

  // 2: compare window outside the trajectory
  auto cmpcfg = cfg;
  cmpcfg.horizon = 10;
  cmpcfg.analysis.compare_window = 100.0;
  cmpcfg.out_dir = (dir / "cmp").string();
  const auto cmp_path = dir / "cmp.ini";
  std::ofstream(cmp_path) << serialize_ini(cmpcfg);
  CHECK(run_cli("compare --config " + cmp_path.string()) == 2);

  // 3: numerical abort (overflowing quadratic)
  auto abort_cfg = cfg;
  abort_cfg.init_values = {1e200};
  abort_cfg.out_dir = (dir / "abort").string();
  const auto abort_path = dir / "abort.ini";
  std::ofstream(abort_path) << serialize_ini(abort_cfg);
  CHECK(run_cli("run --config " + abort_path.string()) == 3);

  // 4: equilibrium infeasibility (nonpositive target)
  ExperimentConfig eq;
  eq.price = 25.0;
  eq.out_dir = (dir / "eq").string();
  const auto eq_path = dir / "eq.ini";
  std::ofstream(eq_path) << serialize_ini(eq);
  CHECK(run_cli("equilibrium --config " + eq_path.string()) == 4);

  // 0: equilibrium on the reference instance
  ExperimentConfig good_eq;
  good_eq.out_dir = (dir / "eq2").string();
  const auto eq2_path = dir / "eq2.ini";
  std::ofstream(eq2_path) << serialize_ini(good_eq);
  CHECK(run_cli("equilibrium --config " + eq2_path.string()) == 0);

  // 2: plot on a malformed csv
  const auto bad_csv = dir / "bad.csv";
  std::ofstream(bad_csv) << "nonsense\n";
  CHECK(run_cli("plot --traj " + bad_csv.string() + " --out " + dir.string()) == 2);

  // flag overrides beat the config
  auto ov_out = (dir / "ov").string();
  CHECK(run_cli("run --config " + cfg_path.string() + " --horizon 10 --out " + ov_out) ==
        0);
  const auto ov_traj = read_trajectory_csv(ov_out + "/trajectory.csv");
  CHECK(ov_traj.records.size() == 11);
}
