#pragma once

// Trade-liberalization experiment: phi_WB rises over a grid while phi_BH stays
// fixed and phi_WH = phi_WB * phi_BH. Each grid point is warm-started from the
// previous equilibrium, so the trajectory follows one equilibrium branch.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "neg/migration.hpp"
#include "neg/model.hpp"
#include "neg/solver.hpp"

namespace neg {

// `points` evenly spaced values on [0, 1] with exact endpoints.
std::vector<double> uniform_grid(std::size_t points);

struct SweepPlan {
    std::vector<double> grid = uniform_grid(201);
    double phi_bh = 0.01;
    ModelParams params{};
    RegionEndowments endowments{};
    MigrationParams migration{};
    SolverConfig solver{};
    bool reverse = false;  // sweep phi_WB downwards to expose hysteresis
    // Solve every point independently from autarky. Results can differ from
    // the continuation path wherever several equilibria coexist.
    bool parallel_cold_start = false;
    unsigned threads = 0;  // 0: hardware concurrency

    void validate() const;
};

struct BlocMetrics {
    double west_real_gdp_pc = 0.0;
    double east_real_gdp_pc = 0.0;  // each region deflated by its own q^gamma
    double ew_ratio = 0.0;          // East / West real GDP per capita
    double hb_ratio = 0.0;          // Hinterland / Border real GDP per capita
    double west_ind_share = 0.0;
    double east_ind_share = 0.0;
};

BlocMetrics bloc_aggregates(const EconomyState& state, const ModelParams& params);

struct SweepRecord {
    std::size_t index = 0;  // position in the ascending grid
    double phi_wb = 0.0;
    EquilibriumReport report{};
    LaborAllocation allocation{};
    RealMetrics metrics{};
    BlocMetrics bloc{};
    bool converged = false;
    std::string error;  // why the point failed, empty when converged
};

struct SweepTrajectory {
    std::vector<SweepRecord> records;  // ascending phi_WB

    std::size_t failures() const;
    std::vector<double> phi() const;
    std::vector<double> ew_ratio() const;
    std::vector<double> hb_ratio() const;
    std::vector<double> ind_share(RegionId region) const;
};

SweepTrajectory run_sweep(const SweepPlan& plan);

enum class TurningKind { Min, Max };

struct TurningPoint {
    double phi = 0.0;
    TurningKind kind = TurningKind::Min;
    std::size_t first = 0;  // index range of the (possibly flat) extremum
    std::size_t last = 0;
};

// Interior local extrema found by sign changes of first differences. Steps with
// |difference| <= flat_tolerance count as flat; a flat run collapses to one
// extremum located at the midpoint of the run. Throws InvalidInput("series too
// short") for fewer than three points.
std::vector<TurningPoint> detect_turning_points(std::span<const double> grid,
                                                std::span<const double> values,
                                                double flat_tolerance = 0.0);

std::string_view turning_kind_name(TurningKind kind) noexcept;

}  // namespace neg
