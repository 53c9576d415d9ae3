#pragma once

// Border<->West migration with Pareto-distributed home bias. Hinterland labor
// never moves. Migrants carry labor only; land stays with the region.

#include <functional>

#include "neg/model.hpp"
#include "neg/solver.hpp"

namespace neg {

struct MigrationParams {
    double epsilon = 0.00672;  // mobility propensity
    bool enabled = false;      // migration openness m
    double damping = 0.5;      // retention-fraction update weight
    double tolerance = 1e-8;   // on retention fractions
    int max_iterations = 1000;

    void validate() const;
};

struct LaborAllocation {
    Vec3 labor{};
    double psi_border = 1.0;  // share of 1990 Border population staying home
    double psi_west = 1.0;    // share of 1990 West population staying home
};

// min{(rw_home / rw_abroad)^epsilon, 1}
double retention_fraction(double real_wage_home, double real_wage_abroad, double epsilon);

// epsilon such that a home/abroad real-GDP ratio r leaves 99% at home.
// Throws InvalidInput unless 0 < r < 1.
double calibrate_epsilon(double ratio);

LaborAllocation reallocate_labor(double psi_border, double psi_west,
                                 const RegionEndowments& endowments);

struct MigrationEquilibrium {
    EquilibriumReport report{};
    LaborAllocation allocation{};
    int iterations = 0;
    bool converged = false;  // report converged and retention fixed point reached
};

// Called with every labor allocation the migration loop tries.
using MigrationObserver = std::function<void(int iteration, const LaborAllocation&)>;

// Joint fixed point of the labor allocation and the equilibrium it induces.
// With migration disabled this is solve_equilibrium on 1990 labor.
// Throws ConvergenceError("migration loop diverged") past max_iterations.
MigrationEquilibrium solve_with_migration(const FreenessMatrix& phi, const ModelParams& params,
                                          const RegionEndowments& endowments,
                                          const MigrationParams& migration,
                                          const SolverConfig& cfg,
                                          const std::optional<EquilibriumGuess>& guess = std::nullopt,
                                          const std::optional<LaborAllocation>& start = std::nullopt,
                                          const MigrationObserver& observe = {});

}  // namespace neg
