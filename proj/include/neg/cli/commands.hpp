#pragma once

// Command-line front end: solve, sweep, freeness, calibrate-epsilon.
// Exit codes: 0 ok, 2 solver non-convergence, 3 invalid input or config.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "neg/freeness.hpp"
#include "neg/model.hpp"
#include "neg/sweep.hpp"

namespace neg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNoConvergence = 2;
inline constexpr int kExitInvalidInput = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Column schemas of every emitted CSV.
const std::vector<std::string>& equilibrium_columns();
const std::vector<std::string>& sweep_long_columns();
const std::vector<std::string>& sweep_summary_columns();
std::vector<std::string> freeness_columns(bool with_sector);

void write_equilibrium_csv(std::ostream& out, const EconomyState& state, const ModelParams& params);
void write_sweep_long_csv(std::ostream& out, const SweepTrajectory& traj);
void write_sweep_summary_csv(std::ostream& out, const SweepTrajectory& traj);
void write_freeness_csv(std::ostream& out, std::span<const PanelCell> panel, bool with_sector);

// Turning points of the ratio and share series over converged records.
std::string turning_point_summary(const SweepTrajectory& traj);

// Reads `reporter,partner,period,import_value[,sector]` and
// `reporter,period,gross_output,total_exports[,sector]`. Throws InvalidInput
// with file, line and column diagnostics.
TradeFlowTable load_trade_tables(const std::filesystem::path& flows,
                                 const std::filesystem::path& outputs);

}  // namespace neg::cli
