#pragma once

// General-equilibrium solver for fixed labor stocks and trade freeness.
//
// Three nested loops:
//   prices    p_i = q_i^mu w_i^(1-mu) together with the CES price index
//             (a contraction with modulus mu);
//   wages     clear every regional labor market given the variety masses;
//   varieties n_i <- n_i * x_i^delta_n until free entry holds, with idle
//             regions re-entering when a small test entrant would sell x > 1.
//
// The solver returns the equilibrium reached from the supplied seed; it does
// not search for other equilibria.

#include <optional>

#include "neg/model.hpp"

namespace neg {

enum class WageMethod {
    Newton,       // Newton steps in log-wages, finite-difference Jacobian, backtracking
    Tatonnement,  // w <- w * (demand / supply)^delta_w, step halved when the residual grows
};

struct SolverConfig {
    double tol_price = 1e-12;
    double tol_wage = 1e-10;
    double tol_profit = 1e-10;
    double tol_walras = 1e-6;
    double consistency_tol = 1e-10;  // linkage-matrix column sums
    double damping_wage = 0.5;
    double damping_variety = 0.25;
    double entrant_mass = 1e-8;
    int max_price_iterations = 1000;
    int max_wage_iterations = 5000;
    int max_variety_iterations = 20000;
    WageMethod wage_method = WageMethod::Newton;

    void validate() const;
};

struct EquilibriumGuess {
    Vec3 w{};
    Vec3 n{};
};

struct PriceSolution {
    Vec3 p{};
    Vec3 q{};  // +inf where no variety reaches the region
    int iterations = 0;
};

struct WageSolution {
    EconomyState state{};
    double residual = 0.0;  // max relative labor-market gap
    int iterations = 0;
    int price_iterations = 0;
};

// Price/price-index fixed point for given variety masses and wages. Regions
// reached by no variety get p = q = +inf. `p_seed` warm-starts the iteration.
PriceSolution solve_prices(const Vec3& n, const Vec3& w, const FreenessMatrix& phi,
                           const ModelParams& params, const SolverConfig& cfg,
                           const std::optional<Vec3>& p_seed = std::nullopt);

// Evaluates every derived quantity at given wages and variety masses (no
// market clearing).
EconomyState evaluate_state(const Vec3& w, const Vec3& n, const Vec3& labor, const Vec3& land,
                            const FreenessMatrix& phi, const ModelParams& params,
                            const SolverConfig& cfg, const std::optional<Vec3>& p_seed = std::nullopt,
                            int* price_iterations = nullptr);

// Labor demand over supply minus one, per region.
Vec3 labor_gap(const EconomyState& state);

// Clears the three labor markets for fixed variety masses.
// Throws ConvergenceError("wage iteration diverged") past max_wage_iterations.
WageSolution solve_wages(const Vec3& n, const Vec3& labor, const Vec3& land,
                         const FreenessMatrix& phi, const ModelParams& params,
                         const SolverConfig& cfg, const Vec3& w_guess);

// Exact single-region equilibrium (closed-form reduction, wage by bisection).
RegionalState autarky_equilibrium(double labor, double land, const ModelParams& params);

// Full equilibrium. Without a guess, each region starts from its own autarky.
// Inner-loop failures throw ConvergenceError; exhausting the outer loop
// returns a report with converged = false and the last residuals.
EquilibriumReport solve_equilibrium(const Vec3& labor, const Vec3& land,
                                    const FreenessMatrix& phi, const ModelParams& params,
                                    const SolverConfig& cfg,
                                    const std::optional<EquilibriumGuess>& guess = std::nullopt);

// Re-evaluates an equilibrium from scratch with the closed-form operations.
// Idle regions are tested with an entrant of mass cfg.entrant_mass.
struct EquilibriumCheck {
    Residuals residuals{};
    double price = 0.0;  // max relative gap of q vs price_index and p vs mill_price
};

EquilibriumCheck check_equilibrium(const EconomyState& state, const Vec3& land,
                                   const FreenessMatrix& phi, const ModelParams& params,
                                   const SolverConfig& cfg);

inline EquilibriumGuess guess_from(const EconomyState& state) {
    EquilibriumGuess g;
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        g.w[i] = state[i].w;
        g.n[i] = state[i].n;
    }
    return g;
}

}  // namespace neg
