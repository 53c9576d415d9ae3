#pragma once

// Run configuration: one JSON document, all keys optional, unknown keys
// rejected. Precedence is built-in defaults < config file < command-line flags.
//
// {
//   "params":     {"sigma", "gamma", "mu", "theta"},
//   "endowments": {"labor_1990": [W, B, H], "land": [W, B, H]},
//   "migration":  {"enabled", "epsilon", "damping", "tolerance", "max_iterations"},
//   "solver":     {"tol_price", "tol_wage", "tol_profit", "tol_walras", "consistency_tol",
//                  "damping_wage", "damping_variety", "entrant_mass",
//                  "max_price_iterations", "max_wage_iterations",
//                  "max_variety_iterations", "wage_method": "newton" | "tatonnement"},
//   "scenario":   {"phi_wb", "phi_bh"},
//   "sweep":      {"points", "reverse", "parallel", "threads"},
//   "output":     {"dir", "format": "csv" | "csv+svg"}
// }

#include <cstddef>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "neg/migration.hpp"
#include "neg/model.hpp"
#include "neg/solver.hpp"
#include "neg/sweep.hpp"

namespace neg::cli {

struct RunConfig {
    ModelParams params{};
    RegionEndowments endowments{};
    SolverConfig solver{};
    MigrationParams migration{};

    double phi_wb = 0.0;
    double phi_bh = 0.01;
    std::size_t sweep_points = 201;
    bool reverse = false;
    bool parallel = false;
    unsigned threads = 0;

    std::filesystem::path out_dir = ".";
    bool svg = false;

    // Throws InvalidInput naming the first bad field.
    void validate() const;
    SweepPlan sweep_plan() const;
};

// Overlays the keys present in `doc` onto `base`.
RunConfig parse_config(const nlohmann::json& doc, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// Parses "csv" or "csv+svg"; returns true for csv+svg.
bool parse_format(const std::string& format);

// Removes a country's share of the three-region totals from the Hinterland
// and renormalizes. The data file holds the country and total figures.
RegionEndowments exclude_country_preset(const RegionEndowments& base,
                                        const std::filesystem::path& data_file);

std::filesystem::path default_data_dir();

}  // namespace neg::cli
