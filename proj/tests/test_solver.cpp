#include <doctest.h>

#include <cmath>
#include <cstring>

#include "neg/solver.hpp"
#include "support.hpp"

using namespace neg;
using negtest::rel_err;

namespace {

struct ClosedAutarky {
    double w, n, p, q;
};

// Single-region equilibrium derived by hand: food demand pins agricultural
// labor, free entry (x = 1) pins n through n p = e.
ClosedAutarky closed_autarky(double L, double K, const ModelParams& m) {
    const double lf = L * (1 - m.gamma) * m.theta / (m.theta + m.gamma * (1 - m.theta));
    const double w = m.theta * std::pow(K / lf, 1 - m.theta);
    const double Y = w * L + land_rent(w, K, m.theta);
    const double e = m.gamma * Y / (1 - m.mu);
    const double a = m.mu / ((1 - m.sigma) * (1 - m.mu));
    const double n = std::pow(e / w, 1 / (1 + a));
    const double p = std::pow(n, a) * w;
    return {w, n, p, std::pow(n, 1 / (1 - m.sigma)) * p};
}

const Vec3 kLabor{0.48, 0.15, 0.37};
const Vec3 kLand{0.12, 0.04, 0.84};

void check_contract(const EquilibriumReport& r, const Vec3& land, const FreenessMatrix& phi,
                    const ModelParams& params, const SolverConfig& cfg) {
    REQUIRE(r.converged);
    const auto c = check_equilibrium(r.state, land, phi, params, cfg);
    CHECK(c.residuals.labor <= 1e-8);
    CHECK(c.residuals.complementarity <= 1e-8);
    CHECK(c.residuals.walras <= 1e-6);
    CHECK(c.residuals.linkage <= 1e-10);
    CHECK(c.price <= 1e-10);
    for (const auto& s : r.state) {
        CHECK(s.w > 0);
        CHECK(s.n >= 0);
        CHECK(rel_err(s.Y, s.w * s.L + s.R) <= 1e-10);
    }
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("config validation") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.damping_wage = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = {};
    cfg.damping_variety = 1.5;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = {};
    cfg.tol_profit = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}

TEST_CASE("price loop") {
    const ModelParams params;
    const SolverConfig cfg;
    const auto one = solve_prices({1, 0, 0}, {1, 1, 1}, FreenessMatrix{}, params, cfg);
    CHECK(rel_err(one.p[0], 1.0) < 1e-12);
    CHECK(rel_err(one.q[0], 1.0) < 1e-12);
    CHECK(std::isinf(one.q[1]));
    CHECK(std::isinf(one.q[2]));

    const auto sym = solve_prices({0.4, 0.4, 0.4}, {1.3, 1.3, 1.3}, FreenessMatrix::uniform(0.3),
                                  params, cfg);
    CHECK(rel_err(sym.p[1], sym.p[0]) < 1e-12);
    CHECK(rel_err(sym.p[2], sym.p[0]) < 1e-12);

    negtest::Rng rng(21);
    for (int k = 0; k < 100; ++k) {
        const ModelParams m = rng.params();
        const Vec3 n{rng.log_uniform(0.01, 3), rng.log_uniform(0.01, 3), rng.log_uniform(0.01, 3)};
        const Vec3 w{rng.log_uniform(0.1, 10), rng.log_uniform(0.1, 10), rng.log_uniform(0.1, 10)};
        const FreenessMatrix phi(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1));
        const auto s = solve_prices(n, w, phi, m, cfg);
        const auto q = price_index(n, s.p, phi, m.sigma);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(rel_err(s.q[i], q[i]) < 1e-12);
            CHECK(rel_err(s.p[i], mill_price(s.q[i], w[i], m.mu)) < 1e-11);
        }
    }
}

TEST_CASE("wage loop without industry inverts agricultural labor demand") {
    const ModelParams params;
    const auto sol = solve_wages({0, 0, 0}, kLabor, kLand, FreenessMatrix{}, params, SolverConfig{},
                                 {1, 1, 1});
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(rel_err(sol.state[i].w, params.theta * std::pow(kLand[i] / kLabor[i], 1 - params.theta)) <
              1e-9);
    CHECK(rel_err(sol.state[2].w, 0.4385016883922346) < 1e-9);
}

TEST_CASE("wage loop clears labor markets") {
    const ModelParams params;
    const SolverConfig cfg;
    const auto phi = FreenessMatrix::scenario(0.4, 0.01);
    const auto sol = solve_wages({0.6, 0.2, 0.4}, kLabor, kLand, phi, params, cfg, {1, 1, 1});
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& s = sol.state[i];
        CHECK(std::abs(s.L_M + s.L_F - s.L) <= cfg.tol_wage * s.L);
    }

    const auto sym = solve_wages({0.3, 0.3, 0.3}, {1. / 3, 1. / 3, 1. / 3}, {1. / 3, 1. / 3, 1. / 3},
                                 FreenessMatrix::uniform(0.2), params, cfg, {1, 2, 3});
    CHECK(rel_err(sym.state[1].w, sym.state[0].w) < 1e-9);
    CHECK(rel_err(sym.state[2].w, sym.state[0].w) < 1e-9);
}

TEST_CASE("autarky bisection matches the closed form") {
    negtest::Rng rng(8);
    for (int k = 0; k < 200; ++k) {
        const ModelParams m = rng.params();
        const double L = rng.uniform(0.05, 1), K = rng.uniform(0.05, 1);
        const auto s = autarky_equilibrium(L, K, m);
        const auto c = closed_autarky(L, K, m);
        CHECK(rel_err(s.w, c.w) < 1e-10);
        CHECK(rel_err(s.n, c.n) < 1e-10);
        CHECK(rel_err(s.q, c.q) < 1e-10);
        CHECK(rel_err(s.p, c.p) < 1e-10);
        CHECK(std::abs(s.x - 1) < 1e-10);
    }
}

TEST_CASE("autarky under proportional endowment scaling") {
    // Wages are unchanged and nominal industry n p scales with c; the variety
    // mass itself scales by c^(1/(1+a)), a = mu / ((1-sigma)(1-mu)).
    const ModelParams m;
    const double a = m.mu / ((1 - m.sigma) * (1 - m.mu));
    const auto base = autarky_equilibrium(0.48, 0.12, m);
    for (double c : {0.5, 2.0, 10.0}) {
        const auto s = autarky_equilibrium(0.48 * c, 0.12 * c, m);
        CHECK(rel_err(s.w, base.w) < 1e-10);
        CHECK(rel_err(s.n * s.p, c * base.n * base.p) < 1e-9);
        CHECK(rel_err(s.n, base.n * std::pow(c, 1 / (1 + a))) < 1e-9);
    }
}

TEST_CASE("West autarky has industry") {
    const auto s = autarky_equilibrium(0.48, 0.12, ModelParams{});
    CHECK(s.L_F / s.L < 1);
    CHECK(s.n > 0);
}

TEST_CASE("zero off-diagonal freeness reproduces three autarkies") {
    const ModelParams params;
    const auto r = solve_equilibrium(kLabor, kLand, FreenessMatrix{}, params, SolverConfig{});
    REQUIRE(r.converged);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto c = closed_autarky(kLabor[i], kLand[i], params);
        CHECK(rel_err(r.state[i].w, c.w) < 1e-8);
        CHECK(rel_err(r.state[i].n, c.n) < 1e-8);
        CHECK(rel_err(r.state[i].q, c.q) < 1e-8);
    }
}

TEST_CASE("residual contract on random instances") {
    negtest::Rng rng(2024);
    const SolverConfig cfg;
    for (int k = 0; k < 40; ++k) {
        ModelParams m;
        m.sigma = rng.uniform(3, 10);
        m.gamma = rng.uniform(0.3, 0.9);
        m.mu = rng.uniform(0.1, 0.5);
        m.theta = rng.uniform(0.1, 0.6);
        const Vec3 L = rng.shares(), K = rng.shares();
        const FreenessMatrix phi(rng.uniform(0, 1), rng.uniform(0, 0.3), rng.uniform(0, 0.3));
        CAPTURE(k);
        const auto r = solve_equilibrium(L, K, phi, m, cfg);
        check_contract(r, K, phi, m, cfg);
    }
}

TEST_CASE("symmetric economies give symmetric equilibria") {
    const ModelParams params;
    const Vec3 third{1. / 3, 1. / 3, 1. / 3};
    for (double v : {0.0, 0.05, 0.2}) {
        const auto r = solve_equilibrium(third, third, FreenessMatrix::uniform(v), params, SolverConfig{});
        REQUIRE(r.converged);
        for (std::size_t i = 1; i < 3; ++i) {
            CHECK(rel_err(r.state[i].w, r.state[0].w) < 1e-8);
            CHECK(rel_err(r.state[i].n, r.state[0].n) < 1e-8);
            CHECK(rel_err(r.state[i].q, r.state[0].q) < 1e-8);
        }
        const auto m = real_metrics(r.state, params);
        for (double s : m.ind_share) CHECK(s == doctest::Approx(1.0 / 3).epsilon(1e-8));
    }
}

TEST_CASE("relabeling regions permutes the solution") {
    const ModelParams params;
    const SolverConfig cfg;
    const std::array<std::size_t, 3> perm{2, 0, 1};
    negtest::Rng rng(404);
    for (int k = 0; k < 10; ++k) {
        const Vec3 L = rng.shares(0.2), K = rng.shares(0.2);
        const FreenessMatrix phi(rng.uniform(0, 0.5), rng.uniform(0, 0.1), rng.uniform(0, 0.1));
        Vec3 Lp{}, Kp{};
        for (std::size_t i = 0; i < 3; ++i) {
            Lp[perm[i]] = L[i];
            Kp[perm[i]] = K[i];
        }
        const auto a = solve_equilibrium(L, K, phi, params, cfg);
        const auto b = solve_equilibrium(Lp, Kp, phi.permuted(perm), params, cfg);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(rel_err(b.state[perm[i]].w, a.state[i].w) < 1e-8);
            CHECK(std::abs(b.state[perm[i]].n - a.state[i].n) < 1e-8 * (1 + a.state[i].n));
        }
    }
}

TEST_CASE("identical inputs give bit-identical outputs") {
    const ModelParams params;
    const auto phi = FreenessMatrix::scenario(0.37, 0.01);
    const auto a = solve_equilibrium(kLabor, kLand, phi, params, SolverConfig{});
    const auto b = solve_equilibrium(kLabor, kLand, phi, params, SolverConfig{});
    CHECK(std::memcmp(&a.state, &b.state, sizeof a.state) == 0);
}

TEST_CASE("tatonnement and Newton wage updates reach the same equilibrium") {
    const ModelParams params;
    SolverConfig slow;
    slow.wage_method = WageMethod::Tatonnement;
    for (double wb : {0.0, 0.3, 0.8}) {
        const auto phi = FreenessMatrix::scenario(wb, 0.01);
        const auto a = solve_equilibrium(kLabor, kLand, phi, params, SolverConfig{});
        const auto b = solve_equilibrium(kLabor, kLand, phi, params, slow);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(rel_err(b.state[i].w, a.state[i].w) < 1e-7);
            CHECK(std::abs(b.state[i].n - a.state[i].n) < 1e-7 * (1 + a.state[i].n));
        }
    }
}

TEST_CASE("idle region re-enters when an entrant would be profitable") {
    const ModelParams params;
    const Vec3 third{1. / 3, 1. / 3, 1. / 3};
    const auto phi = FreenessMatrix::uniform(0.05);
    EquilibriumGuess g;
    g.w = {1, 1, 1};
    g.n = {0.3, 0.3, 0.0};
    const auto r = solve_equilibrium(third, third, phi, params, SolverConfig{}, g);
    REQUIRE(r.converged);
    CHECK(r.state[2].n > 0.01);
    check_contract(r, third, phi, params, SolverConfig{});
}

TEST_CASE("warm start from an equilibrium returns it") {
    const ModelParams params;
    const auto phi = FreenessMatrix::scenario(0.6, 0.01);
    const auto a = solve_equilibrium(kLabor, kLand, phi, params, SolverConfig{});
    const auto b = solve_equilibrium(kLabor, kLand, phi, params, SolverConfig{}, guess_from(a.state));
    for (std::size_t i = 0; i < 3; ++i) CHECK(rel_err(b.state[i].w, a.state[i].w) < 1e-9);
}

}
