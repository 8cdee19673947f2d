// Command-line front end: run / compare / equilibrium / analyze / plot.
// Exit codes: 0 success, 2 config or input error, 3 numerical abort,
// 4 equilibrium infeasibility.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nashseek/config.hpp"
#include "nashseek/harness.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> lambda;
  std::optional<std::size_t> horizon;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required = true) {
  auto* c = cmd->add_option("--config", o.config_path, "experiment config file");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "override run seed");
  cmd->add_option("--out", o.out_dir, "override output directory");
  cmd->add_option("--lambda", o.lambda, "override learning-rate scale");
  cmd->add_option("--horizon", o.horizon, "override iteration horizon");
}

nashseek::ExperimentConfig load_with_overrides(const CommonOpts& o) {
  auto cfg = nashseek::load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.lambda) cfg.schedule.lambda0 = *o.lambda;
  if (o.horizon) cfg.horizon = *o.horizon;
  nashseek::validate_config(cfg);
  return cfg;
}

int dispatch(const std::string& command, const CommonOpts& opts,
             const std::string& traj_path) {
  using namespace nashseek;
  if (command == "run") {
    const auto rep = harness::cmd_run(load_with_overrides(opts));
    std::cout << "trajectory: " << rep.trajectory_path << "\n";
    for (std::size_t j = 0; j < rep.windowed_mean.size(); ++j)
      std::cout << "windowed mean hat_a_" << (j + 1) << ": " << rep.windowed_mean[j]
                << "\n";
    if (rep.equilibrium)
      std::cout << "final gap to equilibrium: " << rep.final_gap << "\n";
    std::cout << "wall seconds: " << rep.wall_seconds << "\n";
  } else if (command == "compare") {
    const auto rep = harness::cmd_compare(load_with_overrides(opts));
    std::cout << "gap csv: " << rep.gap_csv_path << "\n";
    if (rep.fit_vs_sqrt_lambda) {
      for (std::size_t i = 0; i < rep.lambdas.size(); ++i)
        std::cout << "lambda " << rep.lambdas[i] << ": mean sup gap "
                  << rep.mean_gaps[i] << " (se " << rep.stderr_gaps[i] << ")\n";
      std::cout << "fit vs sqrt(lambda): slope " << rep.fit_vs_sqrt_lambda->slope
                << ", r^2 " << rep.fit_vs_sqrt_lambda->r_squared << "\n";
      std::cout << "strictly decreasing: "
                << (rep.strictly_decreasing ? "yes" : "no") << "\n";
    } else {
      std::cout << "sup gap: " << rep.sup_gap_value << "\n";
    }
  } else if (command == "equilibrium") {
    const auto rep = harness::cmd_equilibrium(load_with_overrides(opts));
    for (std::size_t j = 0; j < rep.power.size(); ++j)
      std::printf("p*_%zu = %.6f\n", j + 1, rep.power[j]);
    std::printf("system residual (relative) = %.3e\n", rep.system_residual);
    for (std::size_t j = 0; j < rep.dominance.margins.size(); ++j)
      std::printf("dominance margin row %zu = %.6f\n", j + 1, rep.dominance.margins[j]);
    std::printf("dominance: %s\n", rep.dominance.ok ? "ok" : "VIOLATED (solve still attempted)");
    for (std::size_t j = 0; j < rep.power.size(); ++j)
      std::printf("stationarity residual node %zu: monte-carlo %.5f, exact %.5f\n",
                  j + 1, rep.stationarity_mc[j], rep.stationarity_exact[j]);
    for (std::size_t j = 0; j < rep.power.size(); ++j)
      std::printf("expected payoff at p*, node %zu: own curvature %.4f (%s), "
                  "dominance margin %.4f (%s)\n",
                  j + 1, rep.assumptions.own_curvature[j],
                  rep.assumptions.curvature_ok[j] ? "concave" : "NOT concave",
                  rep.assumptions.dominance_margin[j],
                  rep.assumptions.dominance_ok ? "ok" : "VIOLATED");
  } else if (command == "analyze") {
    const auto cfg = load_with_overrides(opts);
    const auto rep = harness::cmd_analyze(cfg, traj_path);
    std::cout << "trajectory-vs-ode bound: " << rep.bounds.theorem1.value << "\n";
    if (rep.bounds.corollary2)
      std::cout << "distance-to-equilibrium bound: " << rep.bounds.corollary2->total
                << "\n";
    std::cout << "noise mean-zero: "
              << (rep.diagnostics.all_mean_zero_ok ? "ok" : "FAIL") << "\n";
    std::cout << "analysis written to " << cfg.out_dir << "/analysis.txt\n";
  } else if (command == "plot") {
    std::optional<nashseek::ExperimentConfig> cfg;
    if (!opts.config_path.empty()) cfg = load_with_overrides(opts);
    const std::string out = opts.out_dir.value_or(cfg ? cfg->out_dir : ".");
    const auto rep = harness::cmd_plot(traj_path, cfg, out);
    std::cout << rep.power_path << "\n" << rep.payoff_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed Nash-equilibrium seeking with sinusoidal dithers"};
  app.require_subcommand(1);

  CommonOpts run_opts, compare_opts, eq_opts, an_opts, plot_opts;
  std::string an_traj, plot_traj;

  add_common(app.add_subcommand("run", "run the learning algorithm"), run_opts);
  add_common(app.add_subcommand("compare", "trajectory vs limiting dynamics"),
             compare_opts);
  add_common(app.add_subcommand("equilibrium", "closed-form equilibrium report"),
             eq_opts);
  auto* an = app.add_subcommand("analyze", "bounds and diagnostics for a trajectory");
  add_common(an, an_opts);
  an->add_option("--traj", an_traj, "trajectory csv")->required();
  auto* pl = app.add_subcommand("plot", "render trajectory plots");
  add_common(pl, plot_opts, /*config_required=*/false);
  pl->add_option("--traj", plot_traj, "trajectory csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const CommonOpts& opts = command == "run"         ? run_opts
                           : command == "compare"   ? compare_opts
                           : command == "equilibrium" ? eq_opts
                           : command == "analyze"   ? an_opts
                                                    : plot_opts;
  const std::string traj = command == "analyze" ? an_traj : plot_traj;

  try {
    return dispatch(command, opts, traj);
  } catch (const nashseek::NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const nashseek::EquilibriumError& e) {
    std::cerr << "equilibrium infeasible: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
