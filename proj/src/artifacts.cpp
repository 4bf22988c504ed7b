#include "ranklab/artifacts.hpp"

#include <chrono>
#include <unistd.h>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "ranklab/convergence.hpp"
#include "ranklab/errors.hpp"

namespace ranklab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

struct Staging {
  fs::path stage;
  fs::path target;
  std::vector<std::string> artifacts;

  explicit Staging(const fs::path& out_dir) : target(out_dir) {
    const auto stamp =
        std::chrono::steady_clock::now().time_since_epoch().count();
    stage = out_dir.parent_path().empty() ? fs::path(".") : out_dir.parent_path();
    stage /= ".stage-" + std::to_string(::getpid()) + "-" +
             std::to_string(stamp);
    fs::create_directories(stage);
  }

  ~Staging() {
    std::error_code ec;
    fs::remove_all(stage, ec);
  }

  std::ofstream open(const std::string& name) {
    artifacts.push_back(name);
    std::ofstream out(stage / name, std::ios::binary);
    if (!out) throw IoError("cannot open staged artifact " + name);
    return out;
  }

  // Moves every staged file into the target directory.
  void commit() {
    fs::create_directories(target);
    for (const auto& name : artifacts) {
      fs::rename(stage / name, target / name);
    }
  }
};

json gap_summary(const ConvergenceReport& report) {
  json j;
  j["n"] = report.n_values;
  j["mean_sup_w1"] = report.mean_w1;
  j["mean_sup_cdf"] = report.mean_cdf;
  j["slope"] = report.slope;
  j["slope_stderr"] = report.slope_stderr;
  j["slope_confidence_band"] = {report.slope - 2.0 * report.slope_stderr,
                                report.slope + 2.0 * report.slope_stderr};
  j["c_star"] = report.pme_c_star;
  return j;
}

// Evenly spaced row indices, always including the first and last.
std::vector<Eigen::Index> selected_rows(Eigen::Index count,
                                        Eigen::Index at_most) {
  std::vector<Eigen::Index> rows;
  if (count <= at_most) {
    for (Eigen::Index i = 0; i < count; ++i) rows.push_back(i);
    return rows;
  }
  for (Eigen::Index i = 0; i < at_most; ++i) {
    rows.push_back(i * (count - 1) / (at_most - 1));
  }
  return rows;
}

void write_slices_csv(std::ofstream out, const ArrayXd& times,
                      const MatrixXd& field, double x_min, double dx) {
  out << "t,x,F\n";
  const auto rows = selected_rows(times.size(), 11);
  for (const auto k : rows) {
    for (Eigen::Index j = 0; j < field.cols(); ++j) {
      out << format_float(times[k]) << ',' << format_float(x_min + j * dx)
          << ',' << format_float(field(k, j)) << '\n';
    }
  }
}

ArrayXd sde_times(const RunConfig& config) {
  const int steps = static_cast<int>(std::llround(config.horizon / config.dt));
  ArrayXd times(steps + 1);
  for (int j = 0; j <= steps; ++j) times[j] = j * config.dt;
  return times;
}

PmeSolution solve_configured_pme(const RunConfig& config) {
  const auto [x_min, x_max] = config.domain();
  const auto grid =
      PmeGrid::with_cfl(x_min, x_max, config.m, config.horizon,
                        config.coefficients.b, config.coefficients.sigma,
                        config.cfl_safety);
  return solve_pme(config.initial_law.grid_cdf(x_min, x_max, config.m),
                   config.coefficients.b, config.coefficients.sigma, grid,
                   sde_times(config));
}

int run_solve_pme(const RunConfig& config, Staging& staging, json& manifest) {
  const auto sol = solve_configured_pme(config);
  write_slices_csv(staging.open("pme_slices.csv"), sol.times, sol.field,
                   sol.x_min, sol.dx());
  json summary;
  summary["grid"] = {{"x_min", sol.x_min},
                     {"x_max", sol.x_max},
                     {"m", sol.m()},
                     {"dx", sol.dx()},
                     {"dt_pde", sol.dt_pde}};
  summary["c_star"] = sol.c_star;
  summary["max_monotonicity_violation"] = sol.max_monotonicity_violation;
  summary["times_stored"] = sol.times.size();
  staging.open("summary.json") << summary.dump(2) << "\n";
  manifest["c_star"] = sol.c_star;
  return kExitOk;
}

SimConfig simulation_config(const RunConfig& config) {
  SimConfig sim;
  sim.n = config.n;
  sim.horizon = config.horizon;
  sim.dt = config.dt;
  sim.seed = config.seed;
  sim.coefficients = config.coefficients;
  sim.initial_law = config.initial_law;
  sim.retain_positions = config.retain_positions || config.dump_positions;
  sim.validate_steps();
  return sim;
}

int run_simulate(const RunConfig& config, Staging& staging, json& manifest) {
  const SimConfig sim = simulation_config(config);
  const auto traj = simulate(sim);

  auto out = staging.open("trajectory.csv");
  out << "t,gamma_integral,q05,q25,q50,q75,q95\n";
  for (Eigen::Index j = 0; j < traj.times.size(); ++j) {
    const auto& state = traj.states[j];
    out << format_float(traj.times[j]) << ','
        << format_float(traj.gamma_integral[j]);
    for (double u : {0.05, 0.25, 0.5, 0.75, 0.95}) {
      out << ',' << format_float(state.quantile(u));
    }
    out << '\n';
  }

  if (config.dump_positions) {
    const MatrixXd x = traj.raw_positions();
    auto bin = staging.open("positions.bin");
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const double v = x(j, i);
        bin.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
    }
    json sidecar;
    sidecar["layout"] = "row-major time x particle";
    sidecar["byte_order"] = "little-endian";
    sidecar["dtype"] = "float64";
    sidecar["rows"] = x.rows();
    sidecar["cols"] = x.cols();
    sidecar["seed"] = config.seed;
    sidecar["seed_lineage"] = traj.lineage;
    staging.open("positions_meta.json") << sidecar.dump(2) << "\n";
  }
  manifest["steps"] = traj.times.size() - 1;
  return kExitOk;
}

int run_fixed_point(const RunConfig& config, Staging& staging,
                    json& manifest) {
  const auto pme = solve_configured_pme(config);
  const int steps = static_cast<int>(std::llround(config.horizon / config.dt));
  const NoiseBundle bundle(config.seed, config.dt, steps);

  std::vector<double> log;
  int exit_code = kExitOk;
  try {
    const auto limit =
        fixed_point_solve(pme, config.coefficients.gamma,
                          bundle.common_increments(), config.fixed_point,
                          nullptr, config.seed);
    log = limit.iteration_log;
    write_slices_csv(staging.open("limit_slices.csv"), limit.times,
                     limit.field, limit.x_min, limit.dx());
    auto gamma_csv = staging.open("gamma_path.csv");
    gamma_csv << "t,gamma_integral\n";
    for (Eigen::Index j = 0; j < limit.times.size(); ++j) {
      gamma_csv << format_float(limit.times[j]) << ','
                << format_float(limit.gamma_integral[j]) << '\n';
    }
    manifest["converged"] = true;
  } catch (const NonConvergenceError& e) {
    log = e.distances();
    manifest["converged"] = false;
    manifest["error"] = e.what();
    exit_code = kExitNonConvergence;
  }

  auto iters = staging.open("iterations.csv");
  iters << "iter,sup_w1\n";
  for (std::size_t k = 0; k < log.size(); ++k) {
    iters << (k + 1) << ',' << format_float(log[k]) << '\n';
  }
  json summary;
  summary["iterations"] = log.size();
  summary["final_distance"] = log.empty() ? 0.0 : log.back();
  summary["tol"] = config.fixed_point.tol;
  summary["converged"] = exit_code == kExitOk;
  summary["c_star"] = pme.c_star;
  staging.open("fixed_point_summary.json") << summary.dump(2) << "\n";
  return exit_code;
}

int run_converge(const RunConfig& config, Staging& staging, json& manifest) {
  ConvergenceConfig harness;
  harness.n_ladder = config.n_ladder;
  harness.replicas = config.replicas;
  harness.horizon = config.horizon;
  harness.dt = config.dt;
  harness.seed = config.seed;
  harness.coefficients = config.coefficients;
  harness.initial_law = config.initial_law;
  harness.x_min = config.x_min;
  harness.x_max = config.x_max;
  harness.m = config.m;
  harness.fixed_point = config.fixed_point;
  harness.workers = config.workers;
  harness.validate = false;  // parse_config already ran the checks

  const auto report = run_convergence(harness);

  // wall_ms is the one nondeterministic column, so it lives in its own
  // file and report.csv stays byte-stable across reruns.
  auto out = staging.open("report.csv");
  out << "n,replica,sup_w1,sup_cdf,sup_gamma_gap\n";
  for (const auto& row : report.rows) {
    out << row.n << ',' << row.replica << ',' << format_float(row.sup_w1)
        << ',' << format_float(row.sup_cdf) << ','
        << format_float(row.sup_gamma_gap) << '\n';
  }
  auto timing = staging.open("timings.csv");
  timing << "n,replica,wall_ms\n";
  for (const auto& row : report.rows) {
    timing << row.n << ',' << row.replica << ','
           << format_float(row.wall_ms) << '\n';
  }
  staging.open("converge_summary.json") << gap_summary(report).dump(2) << "\n";
  manifest["slope"] = report.slope;
  return kExitOk;
}

int run_spde_residual(const RunConfig& config, Staging& staging,
                      json& manifest) {
  const auto [x_min, x_max] = config.domain();
  const auto bumps =
      default_bumps(x_min, x_max, config.residual_test_functions);

  const int base_steps =
      static_cast<int>(std::llround(config.horizon / config.dt));
  BrownianPath path = BrownianPath::from_bundle(
      NoiseBundle(config.seed, config.dt, base_steps));

  json levels = json::array();
  std::vector<double> maxima;
  Eigen::Index m = config.m;
  double dt = config.dt;
  for (int level = 0; level < config.residual_levels; ++level) {
    const auto steps = path.increments().size();
    ArrayXd times(steps + 1);
    for (Eigen::Index j = 0; j <= steps; ++j) times[j] = j * dt;
    const auto grid =
        PmeGrid::with_cfl(x_min, x_max, m, config.horizon,
                          config.coefficients.b, config.coefficients.sigma,
                          config.cfl_safety);
    const auto pme = solve_pme(
        config.initial_law.grid_cdf(x_min, x_max, m), config.coefficients.b,
        config.coefficients.sigma, grid, times);
    const auto limit =
        fixed_point_solve(pme, config.coefficients.gamma, path.increments(),
                          config.fixed_point, nullptr, config.seed);
    // one defect per test function
    json defects = json::array();
    double level_max = 0.0;
    for (const auto& bump : bumps) {
      const double defect = spde_weak_residual(
          limit, config.coefficients.b, config.coefficients.sigma,
          config.coefficients.gamma, path.increments(),
          std::span(&bump, 1));
      defects.push_back(defect);
      level_max = std::max(level_max, defect);
    }
    maxima.push_back(level_max);
    levels.push_back({{"level", level},
                      {"dt", dt},
                      {"dx", grid.dx()},
                      {"m", m},
                      {"defects", defects},
                      {"max_defect", level_max}});
    path = path.refined();
    m = 2 * m - 1;
    dt *= 0.5;
  }

  json report;
  report["levels"] = levels;
  json ratios = json::array();
  for (std::size_t k = 0; k + 1 < maxima.size(); ++k) {
    ratios.push_back(maxima[k] / maxima[k + 1]);
  }
  report["ratios"] = ratios;
  staging.open("residuals.json") << report.dump(2) << "\n";
  manifest["ratios"] = ratios;
  return kExitOk;
}

}  // namespace

int run(const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  json manifest;
  manifest["version"] = kVersion;
  manifest["experiment"] = to_string(config.experiment);
  manifest["config_hash"] = config.config_hash();
  manifest["seed"] = config.seed;
  manifest["seed_lineage"] =
      NoiseBundle(config.seed, config.dt,
                  static_cast<int>(std::llround(config.horizon / config.dt)))
          .lineage();
  manifest["warnings"] = config.warnings;

  int exit_code = kExitOk;
  std::string error;
  try {
    Staging staging(fs::path(config.output_dir));
    switch (config.experiment) {
      case ExperimentKind::kSolvePme:
        exit_code = run_solve_pme(config, staging, manifest);
        break;
      case ExperimentKind::kSimulate:
        exit_code = run_simulate(config, staging, manifest);
        break;
      case ExperimentKind::kFixedPoint:
        exit_code = run_fixed_point(config, staging, manifest);
        break;
      case ExperimentKind::kConverge:
        exit_code = run_converge(config, staging, manifest);
        break;
      case ExperimentKind::kSpdeResidual:
        exit_code = run_spde_residual(config, staging, manifest);
        break;
    }
    staging.commit();
    manifest["artifacts"] = staging.artifacts;
  } catch (const BlowupError& e) {
    exit_code = kExitBlowup;
    error = e.what();
  } catch (const NonConvergenceError& e) {
    exit_code = kExitNonConvergence;
    error = e.what();
  } catch (const ConfigError& e) {
    exit_code = kExitValidation;
    error = e.what();
  } catch (const DomainError& e) {
    exit_code = kExitValidation;
    error = e.what();
  } catch (const SpecViolationError& e) {
    exit_code = kExitValidation;
    error = e.what();
  } catch (const TruncationOverflowError& e) {
    exit_code = kExitValidation;
    error = e.what();
  } catch (const GridMismatchError& e) {
    exit_code = kExitValidation;
    error = e.what();
  } catch (const Error& e) {
    exit_code = kExitInternal;
    error = e.what();
  }

  if (!error.empty()) manifest["error"] = error;
  manifest["exit_code"] = exit_code;
  manifest["wall_ms"] = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  manifest["written_at_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  try {
    fs::create_directories(config.output_dir);
    std::ofstream out(fs::path(config.output_dir) / "manifest.json",
                      std::ios::binary);
    out << manifest.dump(2) << "\n";
  } catch (...) {
    if (exit_code == kExitOk) exit_code = kExitInternal;
  }
  if (!config.quiet && !error.empty()) {
    std::cerr << "ranklab: " << error << "\n";
  }
  return exit_code;
}

}  // namespace ranklab
