#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nashseek/assumptions.hpp"
#include "nashseek/bounds.hpp"
#include "nashseek/builtin_games.hpp"
#include "nashseek/config.hpp"
#include "nashseek/csv_io.hpp"
#include "nashseek/envelope.hpp"
#include "nashseek/interpolation.hpp"
#include "nashseek/ode.hpp"
#include "nashseek/robbins_monro.hpp"
#include "nashseek/schedule.hpp"
#include "nashseek/seeker.hpp"
#include "nashseek/stats.hpp"
#include "nashseek/svg_plot.hpp"
#include "nashseek/wireless.hpp"

namespace nashseek::harness {

inline std::unique_ptr<GameModel> make_game(const ExperimentConfig& cfg) {
  switch (cfg.game) {
    case GameKind::Wireless:
      return std::make_unique<WirelessGame>(cfg.wireless_params(), cfg.expectation,
                                            cfg.mc_samples, mix_seed(cfg.seed, 0x4d43),
                                            cfg.frozen_channel);
    case GameKind::Quadratic:
      return std::make_unique<QuadraticGame>(cfg.quadratic.peak, cfg.quadratic.curvature,
                                             cfg.quadratic.noise_sd);
    default:
      return std::make_unique<ConstantGame>(cfg.constant.values);
  }
}

// Known equilibrium of the configured game, when one is available in closed
// form: the mean-field solve for wireless, the peaks for the quadratic.
inline std::optional<std::vector<double>> known_equilibrium(const ExperimentConfig& cfg) {
  if (cfg.game == GameKind::Wireless) return analytic_equilibrium(cfg.wireless_params());
  if (cfg.game == GameKind::Quadratic) return cfg.quadratic.peak;
  return std::nullopt;
}

inline std::vector<double> initial_vector(const ExperimentConfig& cfg) {
  if (cfg.init_mode == InitMode::Values) return cfg.init_values;
  const auto eq = known_equilibrium(cfg);
  if (!eq) throw ConfigError("config field run.init: no closed-form equilibrium available");
  std::vector<double> v = *eq;
  for (auto& x : v) x += cfg.init_offset;
  return v;
}

inline SeekerConfig make_seeker_config(const ExperimentConfig& cfg) {
  SeekerConfig sc;
  sc.perturbation = cfg.perturbation;
  sc.schedule = cfg.schedule;
  sc.horizon = cfg.horizon;
  sc.initial = initial_vector(cfg);
  sc.seed = cfg.seed;
  sc.clamp_nonnegative = cfg.clamp_nonnegative;
  return sc;
}

// Period of the slowest dither; the averaging scale for smoothed statistics.
inline double slowest_dither_period(const PerturbationParams& p) {
  double slowest = p.frequency.front();
  for (double f : p.frequency) slowest = std::min(slowest, f);
  return 2.0 * std::numbers::pi / slowest;
}

// Averaging window: window_fraction of the horizon, trimmed down to a whole
// number of periods of the slowest dither when the schedule is constant (a
// whole-period average suppresses the O(amplitude) oscillation).
inline std::size_t averaging_window(const ExperimentConfig& cfg, std::size_t records) {
  auto w = static_cast<std::size_t>(
      std::floor(cfg.analysis.window_fraction * static_cast<double>(records)));
  w = std::clamp<std::size_t>(w, 1, records);
  if (cfg.schedule.kind == ScheduleKind::Constant) {
    const double period_iters =
        slowest_dither_period(cfg.perturbation) / cfg.schedule.lambda0;
    if (period_iters >= 1.0 && static_cast<double>(w) >= period_iters) {
      const auto periods = static_cast<std::size_t>(static_cast<double>(w) / period_iters);
      const auto aligned =
          static_cast<std::size_t>(std::llround(static_cast<double>(periods) * period_iters));
      if (aligned >= 1 && aligned <= records) w = aligned;
    }
  }
  return w;
}

// Run a per-index job over a small worker pool; results keep index order and
// the first failure is rethrown after all workers stop.
inline std::vector<double> parallel_map(std::size_t count,
                                        const std::function<double(std::size_t)>& job,
                                        std::size_t workers = 0) {
  if (workers == 0)
    workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  std::vector<double> out(count, 0.0);
  if (count == 0) return out;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

inline double auto_ode_step(const AnalysisSpec& a, double lambda) {
  return a.ode_h > 0.0 ? a.ode_h : std::min(0.01, lambda / 10.0);
}

// ---------------------------------------------------------------------------
// run

struct BoundsSection {
  BoundConstants constants;
  LipschitzEstimate lipschitz;
  Theorem1Bound theorem1;
  std::optional<Corollary2Bound> corollary2;
  std::optional<ConvergenceTime> time_to_eps;
  double delta0 = 0.0;
  std::size_t window_start_iteration = 0;
};

struct RunReport {
  std::string trajectory_path;
  std::size_t window = 0;
  std::vector<double> windowed_mean;
  std::optional<std::vector<double>> equilibrium;
  double final_gap = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
  std::optional<MartingaleReport> diagnostics;
  std::optional<EnvelopeFit> envelope;
  std::optional<EnvelopeFit> envelope_period_averaged;
  std::optional<BoundsSection> bounds;
  std::optional<double> compare_sup_gap;
  std::optional<std::string> baseline_path;
};

// Envelope fit of a path against a reference point; when the raw gap does not
// decay (a large dither keeps it oscillating) the fit is retried on the
// period-averaged path.
inline std::pair<std::optional<EnvelopeFit>, std::optional<EnvelopeFit>>
envelope_fits(const InterpolatedPath& path, std::span<const double> a_star, double t0,
              double t1, const PerturbationParams& p) {
  std::pair<std::optional<EnvelopeFit>, std::optional<EnvelopeFit>> out;
  out.first = fit_stability_envelope(path, a_star, t0, t1);
  if (!out.first->accepted) {
    const double period = slowest_dither_period(p);
    if (t1 - t0 > 2.0 * period)
      out.second = fit_stability_envelope_period_averaged(path, a_star, t0, t1, period);
  }
  return out;
}

inline BoundsSection compute_bounds(const ExperimentConfig& cfg, const GameModel& model,
                                    const Trajectory& traj) {
  const auto& a = cfg.analysis;
  BoundsSection sec;

  Box box;
  box.lo.assign(traj.nodes, std::numeric_limits<double>::infinity());
  box.hi.assign(traj.nodes, -std::numeric_limits<double>::infinity());
  for (const auto& rec : traj.records)
    for (std::size_t j = 0; j < traj.nodes; ++j) {
      box.lo[j] = std::min(box.lo[j], rec.actions[j]);
      box.hi[j] = std::max(box.hi[j], rec.actions[j]);
    }
  for (std::size_t j = 0; j < traj.nodes; ++j) {
    if (cfg.game == GameKind::Wireless) box.lo[j] = std::max(box.lo[j], 0.0);
    if (box.hi[j] - box.lo[j] < 1e-6) box.hi[j] = box.lo[j] + 1e-6;
  }
  Rng rng = make_rng(cfg.seed, 0x4c4950u);
  sec.lipschitz = lipschitz_estimate(model, box, a.lipschitz_pairs, rng);

  double c0 = a.action_bound;
  if (c0 <= 0.0) {
    for (const auto& rec : traj.records) c0 = std::max(c0, l2_norm(rec.actions));
  }
  std::vector<double> zero(traj.nodes, 0.0), r0(traj.nodes);
  for (std::size_t j = 0; j < traj.nodes; ++j) r0[j] = model.expected_payoff(zero, j);

  sec.constants.lipschitz = sec.lipschitz.overall;
  sec.constants.action_bound = c0;
  sec.constants.window = a.bound_window;
  sec.constants.payoff_at_zero = l2_norm(r0);

  // Tail window starts where bound_window time units remain before the end.
  const double end_clock = traj.records.back().clock;
  std::size_t t_idx = 0;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    if (traj.records[i].clock >= end_clock - a.bound_window) {
      t_idx = i;
      break;
    }
  }
  sec.window_start_iteration = t_idx;

  const auto reseed =
      (cfg.game == GameKind::Wireless && cfg.expectation == ExpectationMode::MonteCarlo)
          ? std::optional<std::uint64_t>(mix_seed(cfg.seed, 0x5253u))
          : std::nullopt;
  const auto xi = cumulative_noise(traj, model, cfg.perturbation, reseed);
  const double delta_sup = sup_noise_increment(xi, t_idx);

  // Constant-rate tails diverge; truncate at the run's remaining iterations
  // (or the configured cap, whichever is shorter).
  const std::size_t remaining = traj.records.size() - t_idx;
  const double tail_sq = cfg.schedule.tail_sq_sum(
      t_idx, cfg.schedule.is_constant() ? std::min(a.tail_truncation, remaining) : 0);
  const double lambda_edge = traj.records.back().rate;
  sec.theorem1 = theorem1_bound(sec.constants, tail_sq, lambda_edge, delta_sup);

  const auto eq = known_equilibrium(cfg);
  if (eq) {
    sec.delta0 = l2_distance(traj.records.front().intermediary, *eq);
    double max_b = 0.0;
    for (double b : cfg.perturbation.amplitude) max_b = std::max(max_b, b);
    double Mbar = a.envelope_Mbar, mbar = a.envelope_mbar;
    if (!(Mbar > 0.0) || !(mbar > 0.0)) {
      const auto fits = envelope_fits(interpolate(traj), *eq,
                                      traj.records.front().clock, end_clock,
                                      cfg.perturbation);
      const EnvelopeFit* fit = nullptr;
      if (fits.first && fits.first->accepted) fit = &*fits.first;
      else if (fits.second && fits.second->accepted) fit = &*fits.second;
      if (fit) {
        Mbar = fit->amplitude;
        mbar = fit->decay_rate;
      }
    }
    if (Mbar > 0.0 && mbar > 0.0) {
      sec.corollary2 = corollary2_bound(Mbar, mbar, sec.delta0, a.bound_window, a.eps,
                                        max_b, sec.constants, tail_sq, lambda_edge,
                                        delta_sup);
      sec.time_to_eps = convergence_time(std::max(sec.delta0, 1e-300), Mbar, mbar, a.eps);
    }
  }
  return sec;
}

inline void append_bounds_text(std::ostream& os, const BoundsSection& b) {
  os << "bounds:\n";
  os << "  lipschitz estimate L = " << b.constants.lipschitz
     << " (sampled lower estimate)\n";
  os << "  action bound C0 = " << b.constants.action_bound << "\n";
  os << "  window T = " << b.constants.window << "\n";
  os << "  ||r(0)|| = " << b.constants.payoff_at_zero << "\n";
  os << "  C_T = " << b.theorem1.c_T << "\n";
  os << "  tail sum of squared rates = " << b.theorem1.lambda_tail_sq_sum << "\n";
  os << "  rate at window edge = " << b.theorem1.lambda_edge << "\n";
  os << "  sup noise increment = " << b.theorem1.delta_sup << "\n";
  os << "  trajectory-vs-ode bound = " << b.theorem1.value << "\n";
  if (b.corollary2) {
    os << "  envelope term y1 = " << b.corollary2->y1 << "\n";
    os << "  ode term y2 = " << b.corollary2->y2 << "\n";
    os << "  distance-to-equilibrium bound = " << b.corollary2->total << "\n";
  }
  if (b.time_to_eps) {
    os << "  time to eps-close = " << b.time_to_eps->time
       << (b.time_to_eps->already_within ? " (already within precision)" : "") << "\n";
  }
}

inline RunReport cmd_run(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto started = std::chrono::steady_clock::now();
  const auto model = make_game(cfg);
  const auto sc = make_seeker_config(cfg);
  const Trajectory traj = run_seeker(*model, sc);

  std::filesystem::create_directories(cfg.out_dir);
  RunReport rep;
  rep.trajectory_path = (std::filesystem::path(cfg.out_dir) / "trajectory.csv").string();
  write_trajectory_csv(rep.trajectory_path, traj);

  rep.window = averaging_window(cfg, traj.records.size());
  rep.windowed_mean = traj.windowed_mean(rep.window);
  rep.equilibrium = known_equilibrium(cfg);
  if (rep.equilibrium)
    rep.final_gap = l2_distance(traj.records.back().intermediary, *rep.equilibrium);

  if (cfg.analysis.diagnostics) {
    MartingaleOptions opts;
    if (cfg.game == GameKind::Wireless && cfg.expectation == ExpectationMode::MonteCarlo)
      opts.reseed_base = mix_seed(cfg.seed, 0x44474eu);
    rep.diagnostics = martingale_diagnostics(traj, *model, cfg.perturbation, opts);
  }
  if (cfg.analysis.envelope && rep.equilibrium) {
    const auto fits = envelope_fits(interpolate(traj), *rep.equilibrium,
                                    traj.records.front().clock,
                                    traj.records.back().clock, cfg.perturbation);
    rep.envelope = fits.first;
    rep.envelope_period_averaged = fits.second;
  }
  if (cfg.analysis.bounds) rep.bounds = compute_bounds(cfg, *model, traj);
  if (cfg.analysis.ode_compare) {
    const auto path = interpolate(traj);
    const double t0 = cfg.analysis.compare_t0;
    const double window = cfg.analysis.compare_window;
    if (t0 < path.t_begin() - 1e-12 || t0 + window > path.t_end() + 1e-9)
      throw ConfigError("compare window outside the trajectory clock range");
    const auto ode = integrate_deterministic(
        *model, cfg.perturbation, path.eval(std::clamp(t0, path.t_begin(), path.t_end())),
        t0, t0 + window, auto_ode_step(cfg.analysis, cfg.schedule.lambda0));
    rep.compare_sup_gap = sup_gap(path, ode, t0, window);
  }
  if (cfg.baseline) {
    const auto base_traj = baseline_gradient_ascent(*model, cfg.schedule, sc.initial,
                                                    cfg.baseline_max, cfg.horizon);
    rep.baseline_path = (std::filesystem::path(cfg.out_dir) / "baseline.csv").string();
    write_trajectory_csv(*rep.baseline_path, base_traj);
  }

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  // summary.txt is the human-readable record; report.csv carries every number
  // recomputable from (trajectory, config).
  std::ofstream sum(std::filesystem::path(cfg.out_dir) / "summary.txt");
  sum << "trajectory: " << rep.trajectory_path << "\n";
  sum << "records: " << traj.records.size() << "\n";
  sum << "averaging window: " << rep.window << " iterations\n";
  for (std::size_t j = 0; j < rep.windowed_mean.size(); ++j)
    sum << "windowed mean hat_a_" << (j + 1) << ": " << rep.windowed_mean[j] << "\n";
  if (rep.equilibrium) {
    for (std::size_t j = 0; j < rep.equilibrium->size(); ++j)
      sum << "equilibrium_" << (j + 1) << ": " << (*rep.equilibrium)[j] << "\n";
    sum << "final gap to equilibrium: " << rep.final_gap << "\n";
  }
  if (rep.diagnostics) {
    sum << "noise diagnostics over " << rep.diagnostics->iterations << " records:\n";
    for (std::size_t j = 0; j < rep.diagnostics->mean.size(); ++j)
      sum << "  node " << (j + 1) << ": mean " << rep.diagnostics->mean[j] << " (se "
          << rep.diagnostics->stderr_[j] << ", zero-mean "
          << (rep.diagnostics->mean_zero_ok[j] ? "ok" : "FAIL") << ")\n";
    sum << "  max ||noise||^2/(1+||a||^2) = " << rep.diagnostics->ratio_max << "\n";
  }
  auto envelope_line = [&](const char* label, const EnvelopeFit& fit) {
    sum << label
        << (fit.accepted ? "decay rate " + format_double(fit.decay_rate) +
                               ", amplitude " + format_double(fit.amplitude) +
                               ", floor " + format_double(fit.floor)
                         : "rejected (" + fit.diagnostic + ")")
        << "\n";
  };
  if (rep.envelope) {
    double max_b = 0.0;
    for (double b : cfg.perturbation.amplitude) max_b = std::max(max_b, b);
    envelope_line("envelope fit: ", *rep.envelope);
    if (rep.envelope_period_averaged)
      envelope_line("envelope fit (period-averaged gap): ",
                    *rep.envelope_period_averaged);
    sum << "  dither-cubed reference max_b^3 = " << max_b * max_b * max_b << "\n";
  }
  if (rep.bounds) append_bounds_text(sum, *rep.bounds);
  if (rep.compare_sup_gap)
    sum << "sup gap to the averaged limit on [" << cfg.analysis.compare_t0 << ", "
        << cfg.analysis.compare_t0 + cfg.analysis.compare_window
        << "]: " << *rep.compare_sup_gap << "\n";
  if (rep.baseline_path) sum << "oracle-gradient baseline: " << *rep.baseline_path << "\n";
  sum << "wall seconds: " << rep.wall_seconds << "\n";

  std::vector<std::pair<std::string, double>> rows;
  rows.emplace_back("window", static_cast<double>(rep.window));
  for (std::size_t j = 0; j < rep.windowed_mean.size(); ++j)
    rows.emplace_back("windowed_mean_" + std::to_string(j + 1), rep.windowed_mean[j]);
  if (rep.equilibrium) {
    for (std::size_t j = 0; j < rep.equilibrium->size(); ++j)
      rows.emplace_back("equilibrium_" + std::to_string(j + 1), (*rep.equilibrium)[j]);
    rows.emplace_back("final_gap", rep.final_gap);
  }
  if (rep.diagnostics) {
    for (std::size_t j = 0; j < rep.diagnostics->mean.size(); ++j) {
      rows.emplace_back("noise_mean_" + std::to_string(j + 1), rep.diagnostics->mean[j]);
      rows.emplace_back("noise_se_" + std::to_string(j + 1), rep.diagnostics->stderr_[j]);
    }
    rows.emplace_back("noise_ratio_max", rep.diagnostics->ratio_max);
  }
  if (rep.envelope && rep.envelope->accepted) {
    rows.emplace_back("envelope_decay_rate", rep.envelope->decay_rate);
    rows.emplace_back("envelope_amplitude", rep.envelope->amplitude);
    rows.emplace_back("envelope_floor", rep.envelope->floor);
  }
  if (rep.envelope_period_averaged && rep.envelope_period_averaged->accepted) {
    rows.emplace_back("envelope_pa_decay_rate", rep.envelope_period_averaged->decay_rate);
    rows.emplace_back("envelope_pa_floor", rep.envelope_period_averaged->floor);
  }
  if (rep.bounds) {
    rows.emplace_back("lipschitz", rep.bounds->constants.lipschitz);
    rows.emplace_back("c_T", rep.bounds->theorem1.c_T);
    rows.emplace_back("theorem1_bound", rep.bounds->theorem1.value);
    if (rep.bounds->corollary2)
      rows.emplace_back("corollary2_total", rep.bounds->corollary2->total);
    if (rep.bounds->time_to_eps)
      rows.emplace_back("time_to_eps", rep.bounds->time_to_eps->time);
  }
  if (rep.compare_sup_gap) rows.emplace_back("compare_sup_gap", *rep.compare_sup_gap);
  write_report_csv((std::filesystem::path(cfg.out_dir) / "report.csv").string(), rows);
  return rep;
}

// ---------------------------------------------------------------------------
// compare

struct CompareReport {
  double sup_gap_value = 0.0;
  std::string gap_csv_path;
  // populated in sweep mode
  std::vector<double> lambdas;
  std::vector<double> mean_gaps;
  std::vector<double> stderr_gaps;
  std::optional<LinearFit> fit_vs_sqrt_lambda;
  bool strictly_decreasing = false;
};

// One seeker run vs the averaged limit restarted from the interpolated value
// at the window's left edge.
inline double single_gap(const ExperimentConfig& cfg, const GameModel& model,
                         std::uint64_t seed, double t0, double window) {
  ExperimentConfig local = cfg;
  local.seed = seed;
  auto sc = make_seeker_config(local);
  sc.seed = seed;
  const Trajectory traj = run_seeker(model, sc);
  const auto path = interpolate(traj);
  if (t0 < path.t_begin() - 1e-12 || t0 + window > path.t_end() + 1e-9)
    throw ConfigError("compare window outside the trajectory clock range");
  const double h = auto_ode_step(cfg.analysis, cfg.schedule.lambda0);
  const auto start = path.eval(std::clamp(t0, path.t_begin(), path.t_end()));
  const auto ode = integrate_deterministic(model, cfg.perturbation, start, t0,
                                           t0 + window, h);
  return sup_gap(path, ode, t0, window);
}

struct GapScalingResult {
  std::vector<double> lambdas, mean_gaps, stderr_gaps;
  LinearFit fit;  // mean gap vs sqrt(lambda)
  bool strictly_decreasing = true;
};

// Multi-seed mean of the windowed sup-gap per constant learning rate, with a
// linear regression of the means against sqrt(rate).
inline GapScalingResult gap_scaling_experiment(const ExperimentConfig& base,
                                               std::span<const double> lambdas,
                                               std::size_t seeds, double window) {
  if (lambdas.size() < 2) throw ConfigError("gap scaling: need >= 2 rates");
  if (seeds == 0) throw ConfigError("gap scaling: need >= 1 seed");
  GapScalingResult out;
  const auto model = make_game(base);
  for (double lambda : lambdas) {
    ExperimentConfig cfg = base;
    cfg.schedule.kind = ScheduleKind::Constant;
    cfg.schedule.lambda0 = lambda;
    cfg.horizon = static_cast<std::size_t>(std::ceil(window / lambda)) + 1;
    const auto gaps = parallel_map(seeds, [&](std::size_t i) {
      return single_gap(cfg, *model, base.seed + i, 0.0, window);
    });
    RunningStats st;
    for (double g : gaps) st.push(g);
    out.lambdas.push_back(lambda);
    out.mean_gaps.push_back(st.mean());
    out.stderr_gaps.push_back(st.stderr_mean());
  }
  for (std::size_t i = 1; i < out.mean_gaps.size(); ++i)
    if (!(out.mean_gaps[i] < out.mean_gaps[i - 1])) out.strictly_decreasing = false;
  std::vector<double> sq(out.lambdas.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::sqrt(out.lambdas[i]);
  out.fit = linear_fit(sq, out.mean_gaps);
  return out;
}

inline CompareReport cmd_compare(const ExperimentConfig& cfg) {
  validate_config(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  CompareReport rep;

  if (!cfg.analysis.compare_lambdas.empty()) {
    const auto res = gap_scaling_experiment(cfg, cfg.analysis.compare_lambdas,
                                            cfg.analysis.compare_seeds,
                                            cfg.analysis.compare_window);
    rep.lambdas = res.lambdas;
    rep.mean_gaps = res.mean_gaps;
    rep.stderr_gaps = res.stderr_gaps;
    rep.fit_vs_sqrt_lambda = res.fit;
    rep.strictly_decreasing = res.strictly_decreasing;
    rep.gap_csv_path = (std::filesystem::path(cfg.out_dir) / "gap_sweep.csv").string();
    std::ofstream f(rep.gap_csv_path, std::ios::binary);
    f << "lambda,sqrt_lambda,mean_sup_gap,stderr\n";
    for (std::size_t i = 0; i < res.lambdas.size(); ++i)
      f << format_double(res.lambdas[i]) << ',' << format_double(std::sqrt(res.lambdas[i]))
        << ',' << format_double(res.mean_gaps[i]) << ','
        << format_double(res.stderr_gaps[i]) << "\n";
    return rep;
  }

  const auto model = make_game(cfg);
  const auto sc = make_seeker_config(cfg);
  const Trajectory traj = run_seeker(*model, sc);
  const auto path = interpolate(traj);
  const double t0 = cfg.analysis.compare_t0;
  const double window = cfg.analysis.compare_window;
  if (t0 < path.t_begin() - 1e-12 || t0 + window > path.t_end() + 1e-9)
    throw ConfigError("compare window outside the trajectory clock range");
  const double h = auto_ode_step(cfg.analysis, cfg.schedule.lambda0);
  const auto start = path.eval(std::clamp(t0, path.t_begin(), path.t_end()));
  const auto ode =
      integrate_deterministic(*model, cfg.perturbation, start, t0, t0 + window, h);
  write_ode_csv((std::filesystem::path(cfg.out_dir) / "ode.csv").string(), ode);

  rep.gap_csv_path = (std::filesystem::path(cfg.out_dir) / "gap.csv").string();
  std::ofstream f(rep.gap_csv_path, std::ios::binary);
  f << "t";
  for (std::size_t j = 1; j <= traj.nodes; ++j) f << ",path_" << j << ",ode_" << j;
  f << ",gap\n";
  for (std::size_t i = 0; i < ode.t.size(); ++i) {
    const double t = std::clamp(ode.t[i], path.t_begin(), path.t_end());
    const auto pv = path.eval(t);
    const double g = l2_distance(pv, ode.intermediary[i]);
    rep.sup_gap_value = std::max(rep.sup_gap_value, g);
    f << format_double(ode.t[i]);
    for (std::size_t j = 0; j < traj.nodes; ++j)
      f << ',' << format_double(pv[j]) << ',' << format_double(ode.intermediary[i][j]);
    f << ',' << format_double(g) << "\n";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// equilibrium

struct EquilibriumReport {
  std::vector<double> power;
  double system_residual = 0.0;  // relative residual of the linear solve
  DominanceReport dominance;
  std::vector<double> stationarity_mc;     // d E r_j / d p_j at p*, sampled E
  std::vector<double> stationarity_exact;  // same under the exact expectation
  AssumptionReport assumptions;            // checks at p* under the exact expectation
};

inline EquilibriumReport cmd_equilibrium(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.game != GameKind::Wireless)
    throw ConfigError("equilibrium command requires the wireless game");
  const auto params = cfg.wireless_params();
  EquilibriumReport rep;
  rep.dominance = diagonal_dominance_check(params);
  rep.power = analytic_equilibrium(params);

  const auto sys = equilibrium_system(params);
  double r2 = 0.0, t2 = 0.0;
  for (std::size_t j = 0; j < params.pairs; ++j) {
    double row = 0.0;
    for (std::size_t i = 0; i < params.pairs; ++i)
      row += sys.matrix[j * params.pairs + i] * rep.power[i];
    r2 += (row - sys.target[j]) * (row - sys.target[j]);
    t2 += sys.target[j] * sys.target[j];
  }
  rep.system_residual = std::sqrt(r2) / std::sqrt(t2);

  const WirelessGame mc(params, ExpectationMode::MonteCarlo, cfg.mc_samples,
                        mix_seed(cfg.seed, 0x4d43));
  const WirelessGame exact(params, ExpectationMode::Exact);
  rep.stationarity_mc.resize(params.pairs);
  rep.stationarity_exact.resize(params.pairs);
  for (std::size_t j = 0; j < params.pairs; ++j) {
    rep.stationarity_mc[j] = mc.expected_gradient(rep.power, j, j);
    rep.stationarity_exact[j] = exact.expected_gradient(rep.power, j, j);
  }
  Box box;
  box.lo.assign(params.pairs, 0.0);
  box.hi.assign(params.pairs, 0.0);
  for (std::size_t j = 0; j < params.pairs; ++j) box.hi[j] = 4.0 * rep.power[j];
  rep.assumptions =
      validate_assumptions(exact, cfg.schedule, rep.power, box, cfg.analysis.probe_budget);
  return rep;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeReport {
  BoundsSection bounds;
  MartingaleReport diagnostics;
  std::optional<EnvelopeFit> envelope;
  std::optional<EnvelopeFit> envelope_period_averaged;
};

inline AnalyzeReport cmd_analyze(const ExperimentConfig& cfg,
                                 const std::string& trajectory_csv) {
  validate_config(cfg);
  const Trajectory traj = read_trajectory_csv(trajectory_csv);
  if (traj.nodes != cfg.node_count())
    throw ConfigError("trajectory file does not match config: node count differs");
  if (traj.records.size() != cfg.horizon + 1)
    throw ConfigError("trajectory file does not match config: record count differs");
  // The clock column must reproduce the configured schedule.
  for (std::size_t k = 0; k < std::min<std::size_t>(traj.records.size(), 16); ++k) {
    const double want = cfg.schedule.khat(k);
    if (std::abs(traj.records[k].clock - want) >
        1e-9 * std::max(1.0, std::abs(want)))
      throw ConfigError("trajectory file does not match config: clock column differs "
                        "from the schedule");
  }

  const auto model = make_game(cfg);
  AnalyzeReport rep;
  rep.bounds = compute_bounds(cfg, *model, traj);
  MartingaleOptions opts;
  if (cfg.game == GameKind::Wireless && cfg.expectation == ExpectationMode::MonteCarlo)
    opts.reseed_base = mix_seed(cfg.seed, 0x44474eu);
  rep.diagnostics = martingale_diagnostics(traj, *model, cfg.perturbation, opts);
  const auto eq = known_equilibrium(cfg);
  if (eq && traj.records.size() >= 10) {
    const auto fits =
        envelope_fits(interpolate(traj), *eq, traj.records.front().clock,
                      traj.records.back().clock, cfg.perturbation);
    rep.envelope = fits.first;
    rep.envelope_period_averaged = fits.second;
  }

  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream sum(std::filesystem::path(cfg.out_dir) / "analysis.txt");
  append_bounds_text(sum, rep.bounds);
  sum << "noise diagnostics over " << rep.diagnostics.iterations << " records:\n";
  for (std::size_t j = 0; j < rep.diagnostics.mean.size(); ++j)
    sum << "  node " << (j + 1) << ": mean " << rep.diagnostics.mean[j] << " (se "
        << rep.diagnostics.stderr_[j] << ", zero-mean "
        << (rep.diagnostics.mean_zero_ok[j] ? "ok" : "FAIL") << ")\n";
  sum << "  max ||noise||^2/(1+||a||^2) = " << rep.diagnostics.ratio_max << "\n";
  if (rep.envelope) {
    double max_b = 0.0;
    for (double b : cfg.perturbation.amplitude) max_b = std::max(max_b, b);
    if (rep.envelope->accepted)
      sum << "envelope fit: decay rate " << rep.envelope->decay_rate << ", amplitude "
          << rep.envelope->amplitude << ", floor " << rep.envelope->floor
          << " (dither-cubed reference " << max_b * max_b * max_b << ")\n";
    else
      sum << "envelope fit rejected: " << rep.envelope->diagnostic << "\n";
    if (rep.envelope_period_averaged && rep.envelope_period_averaged->accepted)
      sum << "envelope fit (period-averaged gap): decay rate "
          << rep.envelope_period_averaged->decay_rate << ", floor "
          << rep.envelope_period_averaged->floor << " (dither-cubed reference "
          << max_b * max_b * max_b << ")\n";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// plot

struct PlotReport {
  std::string power_path, payoff_path;
};

inline PlotReport cmd_plot(const std::string& trajectory_csv,
                           const std::optional<ExperimentConfig>& cfg,
                           const std::string& out_dir) {
  const Trajectory traj = read_trajectory_csv(trajectory_csv);
  std::filesystem::create_directories(out_dir);
  const std::string stem = std::filesystem::path(trajectory_csv).stem().string();

  std::vector<double> ks(traj.records.size());
  for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = static_cast<double>(i);

  SvgPlot power("action evolution", "iteration", "action");
  SvgPlot payoff("payoff evolution", "iteration", "payoff");
  for (std::size_t j = 0; j < traj.nodes; ++j) {
    std::vector<double> aj(traj.records.size()), rj(traj.records.size());
    for (std::size_t i = 0; i < traj.records.size(); ++i) {
      aj[i] = traj.records[i].intermediary[j];
      rj[i] = traj.records[i].payoffs[j];
    }
    power.add_series("hat_a_" + std::to_string(j + 1), ks, aj);
    payoff.add_series("r_" + std::to_string(j + 1), ks, rj);
  }
  if (cfg) {
    const auto eq = known_equilibrium(*cfg);
    if (eq) {
      std::vector<double> drawn;
      for (double v : *eq) {
        bool dup = false;
        for (double d : drawn)
          if (std::abs(d - v) < 1e-9 * std::max(1.0, std::abs(v))) dup = true;
        if (!dup) {
          power.add_reference(v, "equilibrium");
          drawn.push_back(v);
        }
      }
    }
  }
  PlotReport rep;
  rep.power_path = (std::filesystem::path(out_dir) / (stem + "_power.svg")).string();
  rep.payoff_path = (std::filesystem::path(out_dir) / (stem + "_payoff.svg")).string();
  power.write(rep.power_path);
  payoff.write(rep.payoff_path);
  return rep;
}

}  // namespace nashseek::harness
