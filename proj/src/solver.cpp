#include "neg/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace neg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const Vec3& v) {
    return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

Vec3 log_gap(const EconomyState& s) {
    Vec3 g{};
    for (std::size_t i = 0; i < kRegionCount; ++i) g[i] = std::log((s[i].L_M + s[i].L_F) / s[i].L);
    return g;
}

Vec3 wages_of(const EconomyState& s) { return {s[0].w, s[1].w, s[2].w}; }
Vec3 prices_of(const EconomyState& s) { return {s[0].p, s[1].p, s[2].p}; }

struct WageIterate {
    EconomyState state;
    Vec3 gap;  // log(demand / supply)
    double norm;
};

class WageProblem {
public:
    WageProblem(const Vec3& n, const Vec3& labor, const Vec3& land, const FreenessMatrix& phi,
                const ModelParams& params, const SolverConfig& cfg)
        : n_(n), labor_(labor), land_(land), phi_(phi), params_(params), cfg_(cfg) {}

    WageIterate at(const Vec3& w, const std::optional<Vec3>& p_seed) {
        int iters = 0;
        WageIterate it;
        it.state = evaluate_state(w, n_, labor_, land_, phi_, params_, cfg_, p_seed, &iters);
        price_iterations += iters;
        it.gap = log_gap(it.state);
        it.norm = max_abs(it.gap);
        return it;
    }

    // Trial points of a line search may overflow; they count as infinitely bad.
    WageIterate try_at(const Vec3& w, const std::optional<Vec3>& p_seed) {
        try {
            WageIterate it = at(w, p_seed);
            if (std::isfinite(it.norm)) return it;
        } catch (const ModelError&) {
        } catch (const ConvergenceError&) {
        }
        WageIterate bad;
        bad.norm = std::numeric_limits<double>::infinity();
        return bad;
    }

    bool cleared(const WageIterate& it) const {
        return max_abs(labor_gap(it.state)) <= cfg_.tol_wage;
    }

    int price_iterations = 0;

private:
    const Vec3& n_;
    const Vec3& labor_;
    const Vec3& land_;
    const FreenessMatrix& phi_;
    const ModelParams& params_;
    const SolverConfig& cfg_;
};

Vec3 exp_step(const Vec3& w, const Vec3& log_step, double scale) {
    Vec3 out{};
    for (std::size_t i = 0; i < kRegionCount; ++i) out[i] = w[i] * std::exp(scale * log_step[i]);
    return out;
}

WageSolution finish(const WageIterate& it, int iterations, int price_iterations) {
    WageSolution sol;
    sol.state = it.state;
    sol.residual = max_abs(labor_gap(it.state));
    sol.iterations = iterations;
    sol.price_iterations = price_iterations;
    return sol;
}

[[noreturn]] void wage_diverged(const WageIterate& it, int iterations) {
    throw ConvergenceError("wage iteration diverged (max labor gap " +
                               std::to_string(max_abs(labor_gap(it.state))) + ")",
                           max_abs(labor_gap(it.state)), iterations);
}

// Damped multiplicative updates until the labor markets clear or the log-gap
// norm drops to `stop_norm`. `iterations` accumulates the steps taken.
WageIterate tatonnement_run(WageProblem& problem, WageIterate cur, const SolverConfig& cfg,
                            double stop_norm, int& iterations) {
    double delta = cfg.damping_wage;
    while (!problem.cleared(cur) && cur.norm > stop_norm) {
        if (iterations >= cfg.max_wage_iterations) wage_diverged(cur, iterations);
        ++iterations;
        // w_i <- w_i * (demand_i / L_i)^delta
        WageIterate next =
            problem.try_at(exp_step(wages_of(cur.state), cur.gap, delta), prices_of(cur.state));
        if (!(next.norm <= cur.norm)) {
            delta *= 0.5;
            if (delta < 1e-12) wage_diverged(cur, iterations);
            continue;
        }
        delta = std::min(cfg.damping_wage, delta * 1.5);
        cur = std::move(next);
    }
    return cur;
}

WageSolution tatonnement_wages(WageProblem& problem, const Vec3& w_guess,
                               const SolverConfig& cfg) {
    int iterations = 0;
    const WageIterate cur =
        tatonnement_run(problem, problem.at(w_guess, std::nullopt), cfg, 0.0, iterations);
    return finish(cur, iterations, problem.price_iterations);
}

WageSolution newton_wages(WageProblem& problem, const Vec3& w_guess, const SolverConfig& cfg) {
    constexpr double kFdStep = 1e-7;
    constexpr int kMaxHalvings = 40;
    constexpr double kMaxLogStep = 1.0;
    constexpr int kMaxSlow = 5;

    WageIterate cur = problem.at(w_guess, std::nullopt);
    int slow = 0;
    int iterations = 0;
    while (!problem.cleared(cur)) {
        if (iterations >= cfg.max_wage_iterations) wage_diverged(cur, iterations);
        ++iterations;

        const Vec3 w = wages_of(cur.state);
        const Vec3 p = prices_of(cur.state);
        Eigen::Matrix3d jac;
        for (std::size_t k = 0; k < kRegionCount; ++k) {
            Vec3 wk = w;
            wk[k] *= std::exp(kFdStep);
            const WageIterate probe = problem.at(wk, p);
            for (std::size_t i = 0; i < kRegionCount; ++i)
                jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                    (probe.gap[i] - cur.gap[i]) / kFdStep;
        }
        const Eigen::Vector3d rhs(-cur.gap[0], -cur.gap[1], -cur.gap[2]);
        const Eigen::Vector3d d = jac.fullPivLu().solve(rhs);
        Vec3 step{d(0), d(1), d(2)};
        if (!std::isfinite(step[0]) || !std::isfinite(step[1]) || !std::isfinite(step[2])) {
            // Singular Jacobian: fall back to a plain tatonnement step.
            step = cur.gap;
            for (double& s : step) s *= cfg.damping_wage;
        }

        double scale = std::min(1.0, kMaxLogStep / max_abs(step));
        WageIterate next = problem.try_at(exp_step(w, step, scale), p);
        int halvings = 0;
        while (!(next.norm < cur.norm) && halvings < kMaxHalvings) {
            scale *= 0.5;
            ++halvings;
            next = problem.try_at(exp_step(w, step, scale), p);
        }

        // Far from the solution a near-singular Jacobian (almost homogeneous
        // labor demand) makes the Newton direction crawl. Damped multiplicative
        // updates get closer, then Newton takes over again.
        if (!(next.norm < cur.norm)) slow = kMaxSlow;
        else slow = next.norm > 0.99 * cur.norm ? slow + 1 : 0;
        if (next.norm < cur.norm) cur = std::move(next);
        if (slow >= kMaxSlow) {
            cur = tatonnement_run(problem, std::move(cur), cfg, 1e-3 * cur.norm, iterations);
            slow = 0;
        }
    }
    return finish(cur, iterations, problem.price_iterations);
}

// Demand a test entrant of mass cfg.entrant_mass would face in idle region i.
double entrant_demand(std::size_t i, const EconomyState& state, const Vec3& land,
                      const FreenessMatrix& phi, const ModelParams& params,
                      const SolverConfig& cfg) {
    Vec3 n{}, labor{};
    for (std::size_t k = 0; k < kRegionCount; ++k) {
        n[k] = state[k].n;
        labor[k] = state[k].L;
    }
    n[i] = cfg.entrant_mass;
    const EconomyState probe =
        evaluate_state(wages_of(state), n, labor, land, phi, params, cfg, prices_of(state));
    return probe[i].x;
}

}  // namespace

void SolverConfig::validate() const {
    auto positive = [](double v, const char* field) {
        if (!(std::isfinite(v) && v > 0.0))
            throw InvalidInput(std::string("solver.") + field + " must be > 0");
    };
    auto damping = [](double v, const char* field) {
        if (!(v > 0.0 && v <= 1.0))
            throw InvalidInput(std::string("solver.") + field + " must lie in (0, 1]");
    };
    auto count = [](int v, const char* field) {
        if (v <= 0) throw InvalidInput(std::string("solver.") + field + " must be > 0");
    };
    positive(tol_price, "tol_price");
    positive(tol_wage, "tol_wage");
    positive(tol_profit, "tol_profit");
    positive(tol_walras, "tol_walras");
    positive(consistency_tol, "consistency_tol");
    positive(entrant_mass, "entrant_mass");
    damping(damping_wage, "damping_wage");
    damping(damping_variety, "damping_variety");
    count(max_price_iterations, "max_price_iterations");
    count(max_wage_iterations, "max_wage_iterations");
    count(max_variety_iterations, "max_variety_iterations");
}

PriceSolution solve_prices(const Vec3& n, const Vec3& w, const FreenessMatrix& phi,
                           const ModelParams& params, const SolverConfig& cfg,
                           const std::optional<Vec3>& p_seed) {
    PriceSolution sol;
    sol.p = p_seed.value_or(w);
    for (std::size_t i = 0; i < kRegionCount; ++i)
        if (!(std::isfinite(sol.p[i]) && sol.p[i] > 0.0)) sol.p[i] = w[i];

    const double exponent = 1.0 / (1.0 - params.sigma);
    auto index_from = [&](const Vec3& p) {
        const Vec3 agg = price_aggregate(n, p, phi, params.sigma);
        Vec3 q{};
        for (std::size_t j = 0; j < kRegionCount; ++j)
            q[j] = agg[j] > 0.0 ? std::pow(agg[j], exponent) : kInf;
        return q;
    };

    for (int iter = 1; iter <= cfg.max_price_iterations; ++iter) {
        const Vec3 q = index_from(sol.p);
        double change = 0.0;
        for (std::size_t i = 0; i < kRegionCount; ++i) {
            const double next = std::isfinite(q[i]) ? mill_price(q[i], w[i], params.mu) : kInf;
            if (std::isfinite(next)) change = std::max(change, std::abs(next / sol.p[i] - 1.0));
            sol.p[i] = next;
        }
        if (change <= cfg.tol_price) {
            sol.q = index_from(sol.p);
            sol.iterations = iter;
            return sol;
        }
    }
    throw ConvergenceError("price iteration diverged", kInf, cfg.max_price_iterations);
}

EconomyState evaluate_state(const Vec3& w, const Vec3& n, const Vec3& labor, const Vec3& land,
                            const FreenessMatrix& phi, const ModelParams& params,
                            const SolverConfig& cfg, const std::optional<Vec3>& p_seed,
                            int* price_iterations) {
    const PriceSolution prices = solve_prices(n, w, phi, params, cfg, p_seed);
    if (price_iterations) *price_iterations = prices.iterations;

    EconomyState s{};
    Vec3 Y{};
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        auto& r = s[i];
        r.w = w[i];
        r.n = n[i];
        r.p = prices.p[i];
        r.q = prices.q[i];
        r.L = labor[i];
        r.R = land_rent(w[i], land[i], params.theta);
        r.L_F = agricultural_labor(w[i], land[i], params.theta);
        r.Y = nominal_income(w[i], labor[i], r.R);
        Y[i] = r.Y;
    }
    const Vec3 e =
        expenditure_system(Y, n, prices.p, prices.q, phi, params, cfg.consistency_tol);
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        auto& r = s[i];
        r.e = e[i];
        r.x = firm_demand(r.p, e, prices.q, phi.row(i), params.sigma);
        r.pi = std::isfinite(r.p) ? firm_profit(r.p, r.x, params.sigma) : 0.0;
        r.L_M = manufacturing_labor(r.n, r.p, r.x, r.w, params.mu, params.sigma);
    }
    return s;
}

Vec3 labor_gap(const EconomyState& state) {
    Vec3 g{};
    for (std::size_t i = 0; i < kRegionCount; ++i)
        g[i] = (state[i].L_M + state[i].L_F) / state[i].L - 1.0;
    return g;
}

WageSolution solve_wages(const Vec3& n, const Vec3& labor, const Vec3& land,
                         const FreenessMatrix& phi, const ModelParams& params,
                         const SolverConfig& cfg, const Vec3& w_guess) {
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        if (!(labor[i] > 0.0)) throw InvalidInput("labor stocks must be > 0");
        if (!(land[i] > 0.0)) throw InvalidInput("land shares must be > 0");
        if (!(n[i] >= 0.0)) throw InvalidInput("variety masses must be >= 0");
        if (!(w_guess[i] > 0.0)) throw InvalidInput("wage guess must be > 0");
    }
    WageProblem problem(n, labor, land, phi, params, cfg);
    return cfg.wage_method == WageMethod::Newton ? newton_wages(problem, w_guess, cfg)
                                                 : tatonnement_wages(problem, w_guess, cfg);
}

RegionalState autarky_equilibrium(double labor, double land, const ModelParams& params) {
    if (!(labor > 0.0 && land > 0.0))
        throw InvalidInput("autarky requires positive labor and land");
    const double g = params.gamma, th = params.theta, mu = params.mu, s = params.sigma;

    // With x = 1 and e = n p: L (1 - gamma) = L_F(w) (1 + gamma (1 - theta) / theta).
    // The left side is fixed and L_F is strictly decreasing, so bisect in log w.
    const double target = labor * (1.0 - g);
    const double factor = 1.0 + g * (1.0 - th) / th;
    auto excess = [&](double w) { return agricultural_labor(w, land, th) * factor - target; };

    double lo = 1.0, hi = 1.0;
    while (excess(lo) < 0.0) lo *= 0.5;
    while (excess(hi) > 0.0) hi *= 2.0;
    for (int i = 0; i < 200 && hi / lo - 1.0 > 1e-15; ++i) {
        const double mid = std::sqrt(lo * hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    const double w = std::sqrt(lo * hi);

    RegionalState r;
    r.w = w;
    r.L = labor;
    r.L_F = agricultural_labor(w, land, th);
    r.R = land_rent(w, land, th);
    r.Y = nominal_income(w, labor, r.R);
    r.e = g * r.Y / (1.0 - mu);
    // p = n^a w and n p = e.
    const double a = mu / ((1.0 - s) * (1.0 - mu));
    r.n = std::pow(r.e / w, 1.0 / (1.0 + a));
    r.p = std::pow(r.n, a) * w;
    r.q = std::pow(r.n, 1.0 / (1.0 - s)) * r.p;
    r.x = 1.0;
    r.pi = 0.0;
    r.L_M = manufacturing_labor(r.n, r.p, r.x, w, mu, s);
    return r;
}

EquilibriumReport solve_equilibrium(const Vec3& labor, const Vec3& land,
                                    const FreenessMatrix& phi, const ModelParams& params,
                                    const SolverConfig& cfg,
                                    const std::optional<EquilibriumGuess>& guess) {
    EquilibriumGuess seed;
    if (guess) {
        seed = *guess;
    } else {
        for (std::size_t i = 0; i < kRegionCount; ++i) {
            const RegionalState a = autarky_equilibrium(labor[i], land[i], params);
            seed.w[i] = a.w;
            seed.n[i] = a.n;
        }
    }
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        if (!(seed.w[i] > 0.0)) throw InvalidInput("guess wages must be > 0");
        if (!(seed.n[i] >= 0.0)) throw InvalidInput("guess variety masses must be >= 0");
    }

    EquilibriumReport report;
    Vec3 n = seed.n;
    Vec3 w = seed.w;
    const double delta = cfg.damping_variety;

    for (int iter = 0; iter <= cfg.max_variety_iterations; ++iter) {
        const WageSolution ws = solve_wages(n, labor, land, phi, params, cfg, w);
        report.iterations.wage += ws.iterations;
        report.iterations.price += ws.price_iterations;
        report.iterations.variety = iter;
        report.state = ws.state;
        w = wages_of(ws.state);

        double comp = 0.0;
        Vec3 entrant_x{};
        for (std::size_t i = 0; i < kRegionCount; ++i) {
            if (n[i] > 0.0) {
                comp = std::max(comp, std::abs(ws.state[i].x - 1.0));
            } else {
                entrant_x[i] = entrant_demand(i, ws.state, land, phi, params, cfg);
                comp = std::max(comp, std::max(entrant_x[i] - 1.0, 0.0));
            }
        }
        if (comp <= cfg.tol_profit) break;
        if (iter == cfg.max_variety_iterations) break;

        for (std::size_t i = 0; i < kRegionCount; ++i) {
            if (n[i] > 0.0) {
                const double x = ws.state[i].x;
                n[i] *= std::pow(x, delta);
                if (x < 1.0 && n[i] < cfg.entrant_mass) n[i] = 0.0;
            } else if (entrant_x[i] > 1.0 + cfg.tol_profit) {
                n[i] = cfg.entrant_mass;
            }
        }
    }

    const EquilibriumCheck check = check_equilibrium(report.state, land, phi, params, cfg);
    report.residuals = check.residuals;
    report.converged = check.residuals.labor <= cfg.tol_wage &&
                       check.residuals.complementarity <= cfg.tol_profit &&
                       check.residuals.walras <= cfg.tol_walras &&
                       check.residuals.linkage <= cfg.consistency_tol;
    return report;
}

EquilibriumCheck check_equilibrium(const EconomyState& state, const Vec3& land,
                                   const FreenessMatrix& phi, const ModelParams& params,
                                   const SolverConfig& cfg) {
    EquilibriumCheck out;
    Vec3 n{}, p{}, q{}, w{}, Y{}, agri{};
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        n[i] = state[i].n;
        p[i] = state[i].p;
        q[i] = state[i].q;
        w[i] = state[i].w;
        const double rent = land_rent(w[i], land[i], params.theta);
        agri[i] = agricultural_labor(w[i], land[i], params.theta);
        Y[i] = nominal_income(w[i], state[i].L, rent);
    }

    const Vec3 agg = price_aggregate(n, p, phi, params.sigma);
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        if (!(agg[i] > 0.0)) continue;
        const double q_re = std::pow(agg[i], 1.0 / (1.0 - params.sigma));
        out.price = std::max(out.price, std::abs(q_re / q[i] - 1.0));
        out.price = std::max(out.price, std::abs(mill_price(q[i], w[i], params.mu) / p[i] - 1.0));
    }

    const auto m = linkage_matrix(n, p, q, phi, params.sigma);
    for (std::size_t k = 0; k < kRegionCount; ++k) {
        if (!std::isfinite(q[k])) continue;
        out.residuals.linkage =
            std::max(out.residuals.linkage, std::abs(m[0][k] + m[1][k] + m[2][k] - 1.0));
    }

    // A larger consistency tolerance here keeps the check reporting instead of throwing.
    const Vec3 e = expenditure_system(Y, n, p, q, phi, params, 1.0);
    double food_demand = 0.0, food_supply = 0.0;
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        const double x = firm_demand(p[i], e, q, phi.row(i), params.sigma);
        const double manuf = manufacturing_labor(n[i], p[i], x, w[i], params.mu, params.sigma);
        out.residuals.labor =
            std::max(out.residuals.labor, std::abs((manuf + agri[i]) / state[i].L - 1.0));
        if (n[i] > 0.0) {
            out.residuals.complementarity =
                std::max(out.residuals.complementarity, std::abs(x - 1.0));
        } else {
            const double xe = entrant_demand(i, state, land, phi, params, cfg);
            out.residuals.complementarity =
                std::max(out.residuals.complementarity, std::max(xe - 1.0, 0.0));
        }
        food_demand += (1.0 - params.gamma) * Y[i];
        food_supply += food_output(agri[i], land[i], params.theta);
    }
    out.residuals.walras = std::abs(food_demand - food_supply);
    return out;
}

}  // namespace neg
