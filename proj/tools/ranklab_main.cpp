#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ranklab/artifacts.hpp"
#include "ranklab/config.hpp"
#include "ranklab/errors.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool quiet = false;
};

void attach_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "path to a JSON config")
      ->required();
  cmd->add_option("--out", flags.out_dir, "output directory override");
  cmd->add_option("--seed", flags.seed, "seed override");
  cmd->add_option("--workers", flags.workers,
                  "worker thread count (0 = all cores)");
  cmd->add_flag("--quiet", flags.quiet, "suppress progress output");
}

int dispatch(ranklab::ExperimentKind kind, const CommonFlags& flags) {
  ranklab::RunConfig config;
  try {
    config = ranklab::parse_config_file(flags.config_path);
  } catch (const ranklab::ConfigError& e) {
    std::cerr << "ranklab: " << e.what() << "\n";
    for (const auto& issue : e.issues()) {
      std::cerr << "  - " << issue << "\n";
    }
    return ranklab::kExitValidation;
  } catch (const ranklab::IoError& e) {
    std::cerr << "ranklab: " << e.what() << "\n";
    return ranklab::kExitInternal;
  }
  config.experiment = kind;
  if (!flags.out_dir.empty()) config.output_dir = flags.out_dir;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.workers) config.workers = *flags.workers;
  config.quiet = flags.quiet;
  if (!flags.quiet) {
    for (const auto& warning : config.warnings) {
      std::cerr << "ranklab: warning: " << warning << "\n";
    }
  }
  return ranklab::run(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rank-based interacting diffusions with common noise"};
  app.require_subcommand(1);

  CommonFlags flags;
  const std::pair<const char*, ranklab::ExperimentKind> kinds[] = {
      {"solve-pme", ranklab::ExperimentKind::kSolvePme},
      {"simulate", ranklab::ExperimentKind::kSimulate},
      {"fixed-point", ranklab::ExperimentKind::kFixedPoint},
      {"converge", ranklab::ExperimentKind::kConverge},
      {"spde-residual", ranklab::ExperimentKind::kSpdeResidual},
  };
  for (const auto& [name, kind] : kinds) {
    auto* cmd = app.add_subcommand(name);
    attach_flags(cmd, flags);
    const auto k = kind;
    cmd->callback([&flags, k]() { std::exit(dispatch(k, flags)); });
  }

  CLI11_PARSE(app, argc, argv);
  return 0;
}
