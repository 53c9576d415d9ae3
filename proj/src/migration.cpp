#include "neg/migration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace neg {

void MigrationParams::validate() const {
    if (!(std::isfinite(epsilon) && epsilon > 0.0))
        throw InvalidInput("migration.epsilon must be > 0");
    if (!(damping > 0.0 && damping <= 1.0))
        throw InvalidInput("migration.damping must lie in (0, 1]");
    if (!(tolerance > 0.0)) throw InvalidInput("migration.tolerance must be > 0");
    if (max_iterations <= 0) throw InvalidInput("migration.max_iterations must be > 0");
}

double retention_fraction(double real_wage_home, double real_wage_abroad, double epsilon) {
    if (!(real_wage_home > 0.0 && real_wage_abroad > 0.0))
        throw InvalidInput("real wages must be > 0");
    if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be > 0");
    if (real_wage_home >= real_wage_abroad) return 1.0;
    return std::pow(real_wage_home / real_wage_abroad, epsilon);
}

double calibrate_epsilon(double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidInput("ratio must be in (0,1)");
    return std::log(0.99) / std::log(ratio);
}

LaborAllocation reallocate_labor(double psi_border, double psi_west,
                                 const RegionEndowments& endowments) {
    auto check = [](double psi, const char* name) {
        if (!(psi > 0.0 && psi <= 1.0))
            throw InvalidInput(std::string(name) + " must lie in (0, 1]");
    };
    check(psi_border, "psi_border");
    check(psi_west, "psi_west");

    const auto& l90 = endowments.labor_1990;
    constexpr auto W = idx(RegionId::West), B = idx(RegionId::Border),
                   H = idx(RegionId::Hinterland);
    LaborAllocation out;
    out.psi_border = psi_border;
    out.psi_west = psi_west;
    out.labor[W] = psi_west * l90[W] + (1.0 - psi_border) * l90[B];
    out.labor[B] = psi_border * l90[B] + (1.0 - psi_west) * l90[W];
    out.labor[H] = l90[H];
    return out;
}

MigrationEquilibrium solve_with_migration(const FreenessMatrix& phi, const ModelParams& params,
                                          const RegionEndowments& endowments,
                                          const MigrationParams& migration,
                                          const SolverConfig& cfg,
                                          const std::optional<EquilibriumGuess>& guess,
                                          const std::optional<LaborAllocation>& start,
                                          const MigrationObserver& observe) {
    MigrationEquilibrium out;
    if (!migration.enabled) {
        out.allocation = reallocate_labor(1.0, 1.0, endowments);
        out.report = solve_equilibrium(out.allocation.labor, endowments.land, phi, params, cfg, guess);
        out.converged = out.report.converged;
        return out;
    }

    constexpr auto W = idx(RegionId::West), B = idx(RegionId::Border);
    double psi_b = start ? start->psi_border : 1.0;
    double psi_w = start ? start->psi_west : 1.0;
    std::optional<EquilibriumGuess> seed = guess;

    for (int iter = 1; iter <= migration.max_iterations; ++iter) {
        out.allocation = reallocate_labor(psi_b, psi_w, endowments);
        if (observe) observe(iter, out.allocation);
        out.report =
            solve_equilibrium(out.allocation.labor, endowments.land, phi, params, cfg, seed);
        seed = guess_from(out.report.state);
        out.iterations = iter;

        const auto& s = out.report.state;
        const double rw_w = s[W].w / s[W].q;
        const double rw_b = s[B].w / s[B].q;
        const double target_b = retention_fraction(rw_b, rw_w, migration.epsilon);
        const double target_w = retention_fraction(rw_w, rw_b, migration.epsilon);

        const double gap = std::max(std::abs(target_b - psi_b), std::abs(target_w - psi_w));
        if (gap <= migration.tolerance) {
            out.converged = out.report.converged;
            return out;
        }
        psi_b += migration.damping * (target_b - psi_b);
        psi_w += migration.damping * (target_w - psi_w);
    }
    throw ConvergenceError("migration loop diverged", 0.0, migration.max_iterations);
}

}  // namespace neg
