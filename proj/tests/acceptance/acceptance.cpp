// Acceptance checks. Prints one PASS/FAIL line per criterion; pass criterion
// names as arguments to run a subset. Exit status 1 if anything fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "neg/cli/commands.hpp"
#include "neg/cli/config.hpp"
#include "neg/cli/csv.hpp"
#include "neg/freeness.hpp"
#include "neg/migration.hpp"
#include "neg/solver.hpp"
#include "neg/sweep.hpp"
#include "support.hpp"

using namespace neg;
using negtest::rel_err;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back((ok ? "ok    " : "FAIL  ") + what);
    }
};

std::string num(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome closed_form_oracle() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    negtest::Rng rng(20240917);
    double worst_rent = 0, worst_lf = 0, worst_mill = 0, worst_profit = 0, worst_q = 0;
    for (int k = 0; k < 1000; ++k) {
        const ModelParams m = rng.params();
        const double w = rng.log_uniform(1e-2, 1e2);
        const double land = rng.log_uniform(1e-3, 1.0);
        const double q = rng.log_uniform(1e-2, 1e2);
        const double p = rng.log_uniform(1e-2, 1e2);
        const double x = rng.uniform(0.0, 3.0);
        worst_rent = std::max(worst_rent, rel_err(land_rent(w, land, m.theta),
                                                  negtest::oracle::land_rent(w, land, m.theta)));
        worst_lf = std::max(worst_lf, rel_err(agricultural_labor(w, land, m.theta),
                                              negtest::oracle::agricultural_labor(w, land, m.theta)));
        worst_mill = std::max(worst_mill, rel_err(mill_price(q, w, m.mu),
                                                  negtest::oracle::mill_price(q, w, m.mu)));
        if (x != 1.0)
            worst_profit = std::max(worst_profit, rel_err(firm_profit(p, x, m.sigma),
                                                          negtest::oracle::firm_profit(p, x, m.sigma)));

        Vec3 n{}, pv{};
        for (std::size_t i = 0; i < 3; ++i) {
            n[i] = rng.integer(0, 3) == 0 ? 0.0 : rng.log_uniform(1e-3, 10);
            pv[i] = rng.log_uniform(0.1, 10);
        }
        if (n[0] + n[1] + n[2] == 0) n[0] = 1.0;
        const FreenessMatrix phi(rng.uniform(0.01, 1), rng.uniform(0.01, 1), rng.uniform(0.01, 1));
        const auto qv = price_index(n, pv, phi, m.sigma);
        const auto qo = negtest::oracle::price_index(n, pv, phi, m.sigma);
        for (std::size_t j = 0; j < 3; ++j) worst_q = std::max(worst_q, rel_err(qv[j], qo[j]));
    }
    const double elapsed = seconds_since(t0);
    o.require(worst_rent <= 1e-12, "land_rent max rel err " + num(worst_rent));
    o.require(worst_lf <= 1e-12, "agricultural_labor max rel err " + num(worst_lf));
    o.require(worst_mill <= 1e-12, "mill_price max rel err " + num(worst_mill));
    o.require(worst_profit <= 1e-12, "firm_profit max rel err " + num(worst_profit));
    o.require(worst_q <= 1e-12, "price_index max rel err " + num(worst_q));
    o.require(elapsed < 1.0, "1000 inputs in " + num(elapsed) + " s (< 1 s)");
    return o;
}

Outcome autarky_equivalence() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    negtest::Rng rng(7);
    double worst = 0;
    int failures = 0;
    std::vector<std::pair<Vec3, Vec3>> cases{{{0.48, 0.15, 0.37}, {0.12, 0.04, 0.84}}};
    for (int k = 0; k < 20; ++k) cases.emplace_back(rng.shares(), rng.shares());
    for (const auto& [L, K] : cases) {
        const auto r = solve_equilibrium(L, K, FreenessMatrix{}, ModelParams{}, SolverConfig{});
        if (!r.converged) ++failures;
        for (std::size_t i = 0; i < 3; ++i) {
            const auto a = autarky_equilibrium(L[i], K[i], ModelParams{});
            worst = std::max({worst, rel_err(r.state[i].w, a.w), rel_err(r.state[i].n, a.n),
                              rel_err(r.state[i].q, a.q)});
        }
    }
    const double elapsed = seconds_since(t0);
    o.require(failures == 0, std::to_string(cases.size()) + " solves converged");
    o.require(worst <= 1e-8, "max rel gap on (w, n, q) " + num(worst));
    o.require(elapsed < 1.0, "runtime " + num(elapsed) + " s (< 1 s)");
    return o;
}

Outcome residual_contract() {
    Outcome o;
    const SolverConfig cfg;
    Residuals worst{};
    double worst_price = 0;
    int solves = 0, converged = 0;
    auto audit = [&](const EquilibriumReport& r, const Vec3& land, const FreenessMatrix& phi,
                     const ModelParams& m) {
        ++solves;
        if (!r.converged) return;
        ++converged;
        const auto c = check_equilibrium(r.state, land, phi, m, cfg);
        worst.labor = std::max(worst.labor, c.residuals.labor);
        worst.complementarity = std::max(worst.complementarity, c.residuals.complementarity);
        worst.walras = std::max(worst.walras, c.residuals.walras);
        worst.linkage = std::max(worst.linkage, c.residuals.linkage);
        worst_price = std::max(worst_price, c.price);
    };

    SweepPlan plan;
    for (const auto& rec : run_sweep(plan).records)
        audit(rec.report, plan.endowments.land, FreenessMatrix::scenario(rec.phi_wb, plan.phi_bh),
              plan.params);

    negtest::Rng rng(99);
    for (int k = 0; k < 100; ++k) {
        ModelParams m;
        m.sigma = rng.uniform(3, 10);
        m.gamma = rng.uniform(0.3, 0.9);
        m.mu = rng.uniform(0.1, 0.5);
        m.theta = rng.uniform(0.1, 0.6);
        const Vec3 L = rng.shares(), K = rng.shares();
        const FreenessMatrix phi(rng.uniform(0, 1), rng.uniform(0, 0.5), rng.uniform(0, 0.5));
        try {
            audit(solve_equilibrium(L, K, phi, m, cfg), K, phi, m);
        } catch (const std::exception&) {
            ++solves;
        }
    }
    o.notes.push_back("info  " + std::to_string(converged) + "/" + std::to_string(solves) +
                      " solves converged and audited");
    o.require(converged > 0, "at least one converged solve");
    o.require(worst.labor <= 1e-8, "labor clearing " + num(worst.labor) + " (<= 1e-8 rel)");
    o.require(worst.complementarity <= 1e-8,
              "complementarity " + num(worst.complementarity) + " (<= 1e-8)");
    o.require(worst.walras <= 1e-6, "Walras " + num(worst.walras) + " (<= 1e-6)");
    o.require(worst.linkage <= 1e-10, "linkage column sums " + num(worst.linkage) + " (<= 1e-10)");
    o.notes.push_back("info  price consistency " + num(worst_price));
    return o;
}

Outcome symmetry() {
    Outcome o;
    const Vec3 third{1. / 3, 1. / 3, 1. / 3};
    double worst = 0;
    bool all_converged = true;
    negtest::Rng rng(3);
    for (int k = 0; k < 12; ++k) {
        ModelParams m;
        if (k > 0) {
            m.sigma = rng.uniform(3, 10);
            m.gamma = rng.uniform(0.3, 0.9);
            m.mu = rng.uniform(0.1, 0.5);
            m.theta = rng.uniform(0.1, 0.6);
        }
        const double v = k == 0 ? 0.0 : rng.uniform(0, 1);
        const auto r = solve_equilibrium(third, third, FreenessMatrix::uniform(v), m, SolverConfig{});
        all_converged = all_converged && r.converged;
        for (std::size_t i = 1; i < 3; ++i) {
            const auto& a = r.state[0];
            const auto& b = r.state[i];
            for (auto [x, y] : {std::pair{a.w, b.w}, {a.n, b.n}, {a.q, b.q}, {a.p, b.p},
                                {a.Y, b.Y}, {a.x, b.x}, {a.L_F, b.L_F}})
                worst = std::max(worst, rel_err(y, x));
        }
    }
    o.require(all_converged, "12 symmetric solves converged");
    o.require(worst <= 1e-8, "max rel difference across regions " + num(worst));
    return o;
}

// Shape checks on one sweep.
void ushape_properties(const SweepTrajectory& traj, Outcome& o) {
    o.require(traj.failures() == 0, std::to_string(traj.records.size()) + " points, " +
                                        std::to_string(traj.failures()) + " failed");
    if (traj.failures() != 0) return;
    const auto phi = traj.phi();
    constexpr double flat = 1e-12;

    auto describe = [](const std::vector<TurningPoint>& tps) {
        std::string s;
        for (const auto& tp : tps)
            s += std::string(turning_kind_name(tp.kind)) + "@" + num(tp.phi) + " ";
        return s.empty() ? std::string("monotone") : s;
    };
    auto single_interior_min = [&](const char* label, const std::vector<double>& v) {
        const auto tps = detect_turning_points(phi, v, flat);
        const bool one_min = tps.size() == 1 && tps[0].kind == TurningKind::Min;
        const bool rises = one_min && v.back() > v[tps[0].first];
        o.require(one_min && rises, std::string(label) + ": " + describe(tps) + "; first " +
                                        num(v.front()) + ", last " + num(v.back()));
    };

    single_interior_min("(a) East/West real GDP pc ratio, one interior min, end above min",
                        traj.ew_ratio());
    single_interior_min("(b) Hinterland/Border real GDP pc ratio, one interior min",
                        traj.hb_ratio());

    const auto sh = traj.ind_share(RegionId::Hinterland);
    const auto sb = traj.ind_share(RegionId::Border);
    const auto th = detect_turning_points(phi, sh, flat);
    const auto tb = detect_turning_points(phi, sb, flat);
    auto first_min = [](const std::vector<TurningPoint>& tps) -> const TurningPoint* {
        for (const auto& tp : tps)
            if (tp.kind == TurningKind::Min) return &tp;
        return nullptr;
    };
    const TurningPoint* mh = first_min(th);
    const TurningPoint* mb = first_min(tb);
    const bool h_recovers = mh && sh.back() > sh[mh->first] && sh[mh->first] < sh.front();
    const bool order = mh && mb && mb->phi <= mh->phi;
    o.require(h_recovers && order,
              "(c) Hinterland industrial share falls then recovers, Border first: H " + describe(th) +
                  "(first " + num(sh.front()) + ", last " + num(sh.back()) + "); B " + describe(tb));
}

Outcome ushape() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto traj = run_sweep(SweepPlan{});
    const double elapsed = seconds_since(t0);
    ushape_properties(traj, o);
    o.require(elapsed < 300, "sweep runtime " + num(elapsed) + " s (< 300 s)");
    return o;
}

Outcome exclude_russia() {
    Outcome o;
    SweepPlan plan;
    plan.endowments = cli::exclude_country_preset(
        plan.endowments, std::filesystem::path(NEG_DATA_DIR) / "exclude_russia.json");
    o.notes.push_back("info  Hinterland labor " + num(plan.endowments.labor_1990[2]) + ", land " +
                      num(plan.endowments.land[2]));
    const auto t0 = std::chrono::steady_clock::now();
    ushape_properties(run_sweep(plan), o);
    o.require(seconds_since(t0) < 300, "sweep runtime " + num(seconds_since(t0)) + " s");
    return o;
}

Outcome migration_calibration() {
    Outcome o;
    // The ratio the published epsilon implies: 0.99 = r^epsilon.
    const double r = std::exp(std::log(0.99) / 0.00672);
    const double eps_r = calibrate_epsilon(r);
    const double eps_rounded = calibrate_epsilon(0.2241);
    o.require(std::abs(eps_r - 0.00672) <= 1e-4 && std::abs(eps_rounded - 0.00672) <= 1e-4,
              "epsilon(r = " + num(r) + ") = " + num(eps_r) + ", epsilon(0.2241) = " +
                  cli::format_double(eps_rounded));

    negtest::Rng rng(100);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const double rr = rng.uniform(0.05, 0.95);
        worst = std::max(worst, std::abs(1 - retention_fraction(rr, 1.0, calibrate_epsilon(rr)) - 0.01));
    }
    o.require(worst <= 1e-12, "round trip |1 - psi - 0.01| max " + num(worst));

    MigrationParams m;
    m.enabled = true;
    const RegionEndowments e;
    double drift = 0;
    int allocations = 0;
    bool converged = true;
    for (double wb : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto res = solve_with_migration(
            FreenessMatrix::scenario(wb, 0.01), ModelParams{}, e, m, SolverConfig{}, std::nullopt,
            std::nullopt, [&](int, const LaborAllocation& a) {
                ++allocations;
                drift = std::max(drift, std::abs(a.labor[0] + a.labor[1] - 0.63));
                drift = std::max(drift, std::abs(a.labor[2] - 0.37));
            });
        converged = converged && res.converged;
        drift = std::max(drift, std::abs(res.report.state[0].L + res.report.state[1].L - 0.63));
    }
    o.require(converged, "m = 1 solves converged");
    o.require(drift <= 1e-12, "L_W + L_B = 0.63 over " + std::to_string(allocations) +
                                  " iterations, max drift " + num(drift));
    return o;
}

Outcome trade_freeness() {
    Outcome o;
    {
        TradeFlowTable t;
        for (const char* i : {"A", "B", "C"}) {
            for (const char* j : {"A", "B", "C"})
                if (std::string(i) != j) t.add_flow({i, j, "2000", "", 50});
            t.add_output({i, "2000", "", 150, 100});
        }
        const std::vector<LocationPair> pairs{{{"A", {"A"}}, {"B", {"B"}}},
                                              {{"B", {"B"}}, {"C", {"C"}}}};
        bool exact = true;
        for (const auto& c : freeness_panel(t, pairs, std::vector<std::string>{"2000"}))
            exact = exact && c.phi && *c.phi == 1.0;
        o.require(exact && freeness(3, 3, 3, 3) == 1.0, "uniform flows give phi = 1 exactly");
    }
    o.require(freeness(2, 8, 10, 160) == 0.1, "hand example (2, 8, 10, 160) gives 0.1 exactly");

    negtest::Rng rng(1000);
    double sym = 0, scale = 0;
    for (int k = 0; k < 1000; ++k) {
        const double a = rng.log_uniform(1e-2, 1e6), b = rng.log_uniform(1e-2, 1e6);
        const double c = rng.log_uniform(1e-2, 1e6), d = rng.log_uniform(1e-2, 1e6);
        const double s = rng.log_uniform(1e-6, 1e6);
        const double phi = freeness(a, b, c, d);
        sym = std::max(sym, rel_err(freeness(b, a, d, c), phi));
        scale = std::max(scale, rel_err(freeness(s * a, s * b, s * c, s * d), phi));
    }
    o.require(sym <= 1e-12, "symmetry over 1000 fixtures, max rel err " + num(sym));
    o.require(scale <= 1e-12, "scale invariance over 1000 fixtures, max rel err " + num(scale));
    return o;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    Outcome o;
    const auto base = std::filesystem::temp_directory_path() / "negsim-acceptance-determinism";
    std::filesystem::remove_all(base);
    std::vector<std::filesystem::path> dirs;
    for (int run = 0; run < 2; ++run) {
        dirs.push_back(base / ("run" + std::to_string(run)));
        const std::string out = dirs.back().string();
        const char* argv[] = {"negsim", "sweep", "--out", out.c_str()};
        std::ostringstream sink;
        const int code = cli::run_cli(4, argv, sink, sink);
        o.require(code == cli::kExitOk, "sweep run " + std::to_string(run + 1) + " exit code " +
                                            std::to_string(code));
    }
    for (const char* f : {"sweep_long.csv", "sweep_summary.csv", "turning_points.txt"}) {
        const auto a = slurp(dirs[0] / f), b = slurp(dirs[1] / f);
        o.require(!a.empty() && a == b, std::string(f) + " byte-identical (" +
                                            std::to_string(a.size()) + " bytes)");
    }
    std::filesystem::remove_all(base);
    return o;
}

struct Criterion {
    const char* key;
    const char* title;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {"oracle", "Closed-form oracle suite", closed_form_oracle},
        {"autarky", "Autarky equivalence", autarky_equivalence},
        {"residuals", "Equilibrium residual contract", residual_contract},
        {"symmetry", "Symmetry", symmetry},
        {"ushape", "U-shape reproduction", ushape},
        {"exclude_russia", "Robustness preset (exclude Russia)", exclude_russia},
        {"migration", "Migration calibration", migration_calibration},
        {"freeness", "Trade freeness", trade_freeness},
        {"determinism", "Determinism", determinism},
    };

    std::vector<std::string> wanted(argv + 1, argv + argc);
    for (const auto& w : wanted) {
        bool known = false;
        for (const auto& c : criteria) known = known || w == c.key;
        if (!known) {
            std::cerr << "unknown criterion '" << w << "'; known:";
            for (const auto& c : criteria) std::cerr << ' ' << c.key;
            std::cerr << '\n';
            return 2;
        }
    }

    bool all = true;
    for (const auto& c : criteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.key) == wanted.end())
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.require(false, std::string("exception: ") + e.what());
        }
        all = all && out.pass;
        std::printf("%s  %-38s (%.2f s)\n", out.pass ? "PASS" : "FAIL", c.title, seconds_since(t0));
        for (const auto& n : out.notes) std::printf("        %s\n", n.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
