#pragma once

#include <string>

#include "ranklab/config.hpp"

namespace ranklab {

// Exit codes of run(); the CLI forwards them as the process status.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBlowup = 3;
inline constexpr int kExitNonConvergence = 4;

// Executes the configured experiment. All data artifacts are written to a
// staging directory and moved into `config.output_dir` only on success; the
// run manifest (config hash, seed lineage, version, wall time, exit code) is
// written in every case. Data CSVs carry 17 significant digits and no
// timestamps, so reruns with the same config and seed are byte-identical.
int run(const RunConfig& config);

// 17-significant-digit float formatting shared by every CSV writer.
std::string format_float(double v);

}  // namespace ranklab
