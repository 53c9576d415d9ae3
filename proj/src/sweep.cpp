#include "neg/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace neg {

std::vector<double> uniform_grid(std::size_t points) {
    if (points == 0) throw InvalidInput("sweep.points must be >= 1");
    std::vector<double> grid(points);
    if (points == 1) return {0.0};
    const double last = static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = static_cast<double>(i) / last;
    return grid;
}

void SweepPlan::validate() const {
    if (grid.empty()) throw InvalidInput("sweep.grid must not be empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && grid[i] <= 1.0))
            throw InvalidInput("sweep.grid values must lie in [0, 1]");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw InvalidInput("sweep.grid must be strictly increasing");
    }
    if (!(phi_bh >= 0.0 && phi_bh <= 1.0)) throw InvalidInput("phi_bh must lie in [0, 1]");
    params.validate();
    endowments.validate();
    migration.validate();
    solver.validate();
}

BlocMetrics bloc_aggregates(const EconomyState& state, const ModelParams& params) {
    constexpr auto W = idx(RegionId::West), B = idx(RegionId::Border),
                   H = idx(RegionId::Hinterland);
    auto real_income = [&](const RegionalState& r) { return r.Y / std::pow(r.q, params.gamma); };
    const RealMetrics m = real_metrics(state, params);

    BlocMetrics out;
    out.west_real_gdp_pc = real_income(state[W]) / state[W].L;
    out.east_real_gdp_pc =
        (real_income(state[B]) + real_income(state[H])) / (state[B].L + state[H].L);
    out.ew_ratio = out.east_real_gdp_pc / out.west_real_gdp_pc;
    out.hb_ratio = m.real_gdp_pc[H] / m.real_gdp_pc[B];
    out.west_ind_share = m.ind_share[W];
    out.east_ind_share = m.ind_share[B] + m.ind_share[H];
    return out;
}

namespace {

SweepRecord solve_point(const SweepPlan& plan, std::size_t index,
                        const std::optional<EquilibriumGuess>& guess,
                        const std::optional<LaborAllocation>& start) {
    SweepRecord rec;
    rec.index = index;
    rec.phi_wb = plan.grid[index];
    try {
        const auto phi = FreenessMatrix::scenario(rec.phi_wb, plan.phi_bh);
        const MigrationEquilibrium eq = solve_with_migration(
            phi, plan.params, plan.endowments, plan.migration, plan.solver, guess, start);
        rec.report = eq.report;
        rec.allocation = eq.allocation;
        rec.metrics = real_metrics(eq.report.state, plan.params);
        rec.bloc = bloc_aggregates(eq.report.state, plan.params);
        rec.converged = eq.converged;
        if (!rec.converged) rec.error = "no convergence";
    } catch (const ConvergenceError& err) {
        rec.converged = false;
        rec.error = err.what();
    } catch (const ModelError& err) {
        rec.converged = false;
        rec.error = err.what();
    }
    return rec;
}

}  // namespace

SweepTrajectory run_sweep(const SweepPlan& plan) {
    plan.validate();
    const std::size_t count = plan.grid.size();
    SweepTrajectory traj;
    traj.records.resize(count);

    if (plan.parallel_cold_start) {
        unsigned threads = plan.threads ? plan.threads : std::thread::hardware_concurrency();
        threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = next++; i < count; i = next++)
                        traj.records[i] = solve_point(plan, i, std::nullopt, std::nullopt);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
        return traj;
    }

    std::optional<EquilibriumGuess> guess;
    std::optional<LaborAllocation> start;
    for (std::size_t step = 0; step < count; ++step) {
        const std::size_t i = plan.reverse ? count - 1 - step : step;
        SweepRecord rec = solve_point(plan, i, guess, start);
        if (rec.converged) {
            guess = guess_from(rec.report.state);
            start = rec.allocation;
        }
        traj.records[i] = std::move(rec);
    }
    return traj;
}

std::size_t SweepTrajectory::failures() const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.converged; }));
}

std::vector<double> SweepTrajectory::phi() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.phi_wb);
    return out;
}

std::vector<double> SweepTrajectory::ew_ratio() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.bloc.ew_ratio);
    return out;
}

std::vector<double> SweepTrajectory::hb_ratio() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.bloc.hb_ratio);
    return out;
}

std::vector<double> SweepTrajectory::ind_share(RegionId region) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.metrics.ind_share[idx(region)]);
    return out;
}

std::vector<TurningPoint> detect_turning_points(std::span<const double> grid,
                                                std::span<const double> values,
                                                double flat_tolerance) {
    if (grid.size() != values.size())
        throw InvalidInput("grid and series must have the same length");
    if (values.size() < 3) throw InvalidInput("series too short");

    // Collapse flat runs into segments of equal level.
    struct Segment {
        std::size_t first, last;
        double level;
    };
    std::vector<Segment> segs;
    segs.push_back({0, 0, values[0]});
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (std::abs(values[i] - values[i - 1]) <= flat_tolerance) {
            segs.back().last = i;
        } else {
            segs.push_back({i, i, values[i]});
        }
    }

    std::vector<TurningPoint> out;
    for (std::size_t s = 1; s + 1 < segs.size(); ++s) {
        const double before = segs[s - 1].level, here = segs[s].level, after = segs[s + 1].level;
        const bool is_min = here < before && here < after;
        const bool is_max = here > before && here > after;
        if (!is_min && !is_max) continue;
        TurningPoint tp;
        tp.kind = is_min ? TurningKind::Min : TurningKind::Max;
        tp.first = segs[s].first;
        tp.last = segs[s].last;
        tp.phi = 0.5 * (grid[tp.first] + grid[tp.last]);
        out.push_back(tp);
    }
    return out;
}

std::string_view turning_kind_name(TurningKind kind) noexcept {
    return kind == TurningKind::Min ? "min" : "max";
}

}  // namespace neg
