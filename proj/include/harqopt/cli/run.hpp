#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "harqopt/cli/config.hpp"
#include "harqopt/cli/csv.hpp"

namespace harqopt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitValidationTripped = 4;

/// |z| above this makes `validate` exit with kExitValidationTripped.
inline constexpr double kValidationZLimit = 4.0;

/// One row: the policy and its analytic breakdown.
CsvTable analyze_table(const RunConfig& config);

struct OptimizeTables {
    CsvTable solution;
    CsvTable trace;  ///< iteration, throughput
};
OptimizeTables optimize_tables(const RunConfig& config);

CsvTable simulate_table(const RunConfig& config);

struct ValidationTable {
    CsvTable table;  ///< quantity, analytic, gaussian, monte_carlo, stderr, z
    double max_abs_z = 0.0;
};
/// Analytic values use the convolution failure model; the gaussian column
/// shows the closed-form approximation next to them.
ValidationTable validate_table(const RunConfig& config);

/// One row per sweep value, computed on up to `config.workers` threads and
/// emitted in sweep order.
CsvTable sweep_table(const RunConfig& config);

/// Runs the configured command and writes its CSV to config.output_path (or
/// `out` when empty). The optimize trace goes next to the output file as
/// <stem>_trace.csv. Returns the process exit code; errors propagate.
int run(const RunConfig& config, std::ostream& out);

/// Entry point for the `harqopt` executable: parses arguments, maps errors
/// to exit codes and reports them on stderr.
int main_entry(int argc, char** argv);

}  // namespace harqopt::cli
