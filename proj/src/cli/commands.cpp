#include "neg/cli/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "neg/cli/config.hpp"
#include "neg/cli/csv.hpp"
#include "neg/cli/svg_chart.hpp"
#include "neg/migration.hpp"

namespace neg::cli {

namespace {

std::vector<std::string> state_fields(const RegionalState& r, double real_wage, double real_gdp,
                                      double share) {
    return {format_double(r.w),   format_double(r.n),   format_double(r.q),
            format_double(r.p),   format_double(r.Y),   format_double(r.R),
            format_double(r.L),   format_double(r.L_F), format_double(r.L_M),
            format_double(r.x),   format_double(r.pi),  format_double(real_wage),
            format_double(real_gdp), format_double(share)};
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path.string());
    return out;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InvalidInput("cannot create output directory " + dir.string());
}

// Options shared by solve and sweep.
struct ModelFlags {
    std::optional<std::string> config;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<double> phi_bh;
    std::optional<double> epsilon;
    bool migration = false;
    bool exclude_russia = false;
    std::optional<std::string> russia_data;

    void attach(CLI::App& app) {
        app.add_option("--config", config, "JSON run configuration");
        app.add_option("--out", out, "Output directory");
        app.add_option("--format", format, "csv or csv+svg");
        app.add_option("--phi-bh", phi_bh, "Border-Hinterland trade freeness");
        app.add_option("--epsilon", epsilon, "Migration propensity epsilon");
        app.add_flag("--migration", migration, "Allow Border-West migration (m = 1)");
        app.add_flag("--exclude-russia", exclude_russia,
                     "Hinterland endowments without the Russian Federation");
        app.add_option("--russia-data", russia_data, "Data file for --exclude-russia");
    }

    RunConfig resolve() const {
        RunConfig cfg = config ? load_config(*config) : RunConfig{};
        if (out) cfg.out_dir = *out;
        if (format) cfg.svg = parse_format(*format);
        if (phi_bh) cfg.phi_bh = *phi_bh;
        if (epsilon) cfg.migration.epsilon = *epsilon;
        if (migration) cfg.migration.enabled = true;
        if (exclude_russia) {
            const auto path = russia_data ? std::filesystem::path(*russia_data)
                                          : default_data_dir() / "exclude_russia.json";
            cfg.endowments = exclude_country_preset(cfg.endowments, path);
        }
        cfg.endowments.migration_open = cfg.migration.enabled;
        return cfg;
    }
};

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    const auto phi = FreenessMatrix::scenario(cfg.phi_wb, cfg.phi_bh);
    const MigrationEquilibrium eq =
        solve_with_migration(phi, cfg.params, cfg.endowments, cfg.migration, cfg.solver);

    ensure_dir(cfg.out_dir);
    const auto path = cfg.out_dir / "equilibrium.csv";
    {
        auto file = open_output(path);
        write_equilibrium_csv(file, eq.report.state, cfg.params);
    }

    const auto& r = eq.report;
    out << "phi_wb " << format_double(cfg.phi_wb) << "  phi_bh " << format_double(cfg.phi_bh)
        << '\n'
        << "converged " << (eq.converged ? "yes" : "no") << '\n'
        << "residuals labor " << format_double(r.residuals.labor) << "  complementarity "
        << format_double(r.residuals.complementarity) << "  walras "
        << format_double(r.residuals.walras) << "  linkage " << format_double(r.residuals.linkage)
        << '\n'
        << "iterations variety " << r.iterations.variety << "  wage " << r.iterations.wage
        << "  price " << r.iterations.price << '\n';
    if (cfg.migration.enabled) {
        out << "migration psi_border " << format_double(eq.allocation.psi_border) << "  psi_west "
            << format_double(eq.allocation.psi_west) << "  iterations " << eq.iterations << '\n';
    }
    out << "wrote " << path.string() << '\n';
    return eq.converged ? kExitOk : kExitNoConvergence;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    const SweepTrajectory traj = run_sweep(cfg.sweep_plan());

    ensure_dir(cfg.out_dir);
    {
        auto f = open_output(cfg.out_dir / "sweep_long.csv");
        write_sweep_long_csv(f, traj);
    }
    {
        auto f = open_output(cfg.out_dir / "sweep_summary.csv");
        write_sweep_summary_csv(f, traj);
    }
    const std::string summary = turning_point_summary(traj);
    {
        auto f = open_output(cfg.out_dir / "turning_points.txt");
        f << summary;
    }

    if (cfg.svg) {
        std::vector<double> xs, ew, hb, sw, sb, sh;
        for (const auto& rec : traj.records) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            xs.push_back(rec.phi_wb);
            ew.push_back(rec.converged ? rec.bloc.ew_ratio : nan);
            hb.push_back(rec.converged ? rec.bloc.hb_ratio : nan);
            sw.push_back(rec.converged ? rec.metrics.ind_share[0] : nan);
            sb.push_back(rec.converged ? rec.metrics.ind_share[1] : nan);
            sh.push_back(rec.converged ? rec.metrics.ind_share[2] : nan);
        }
        write_svg({"Relative real GDP per capita", "West-Border trade freeness", "ratio",
                   {{"East / West", xs, ew}, {"Hinterland / Border", xs, hb}}},
                  cfg.out_dir / "ratios.svg");
        write_svg({"Industrial output shares", "West-Border trade freeness", "share",
                   {{"West", xs, sw}, {"Border", xs, sb}, {"Hinterland", xs, sh}}},
                  cfg.out_dir / "shares.svg");
    }

    out << summary << "wrote " << (cfg.out_dir / "sweep_summary.csv").string() << '\n';
    return traj.failures() == 0 ? kExitOk : kExitNoConvergence;
}

std::optional<std::string> column_value(const CsvRow& row, int col) {
    if (col < 0) return std::nullopt;
    return row.fields[static_cast<std::size_t>(col)];
}

int require_column(const CsvTable& t, const char* name, const std::string& file) {
    const int c = t.column(name);
    if (c < 0) throw InvalidInput(file + ": missing column '" + name + "'");
    return c;
}

// "NAME=A,B,C"
Location parse_bloc(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
        throw InvalidInput("--bloc expects NAME=MEMBER[,MEMBER...], got '" + spec + "'");
    Location loc{spec.substr(0, eq), {}};
    std::stringstream ss(spec.substr(eq + 1));
    std::string m;
    while (std::getline(ss, m, ','))
        if (!m.empty()) loc.members.push_back(m);
    return loc;
}

int cmd_freeness(const std::string& flows, const std::string& outputs,
                 const std::vector<std::string>& pair_specs,
                 const std::vector<std::string>& bloc_specs,
                 const std::vector<std::string>& period_filter, const std::filesystem::path& dir,
                 std::ostream& out) {
    const TradeFlowTable table = load_trade_tables(flows, outputs);

    std::map<std::string, Location> blocs;
    for (const auto& spec : bloc_specs) {
        Location loc = parse_bloc(spec);
        blocs[loc.name] = std::move(loc);
    }
    auto location = [&](const std::string& name) {
        const auto it = blocs.find(name);
        return it != blocs.end() ? it->second : Location{name, {name}};
    };

    std::vector<LocationPair> pairs;
    for (const auto& spec : pair_specs) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size())
            throw InvalidInput("--pair expects A:B, got '" + spec + "'");
        pairs.push_back({location(spec.substr(0, colon)), location(spec.substr(colon + 1))});
    }
    if (pairs.empty()) throw InvalidInput("at least one --pair is required");

    const std::vector<std::string> periods = period_filter.empty() ? table.periods() : period_filter;
    const auto panel = freeness_panel(table, pairs, periods);
    const auto sectors = table.sectors();
    const bool with_sector = !(sectors.size() == 1 && sectors.front().empty());

    ensure_dir(dir);
    {
        auto f = open_output(dir / "freeness_panel.csv");
        write_freeness_csv(f, panel, with_sector);
    }
    std::size_t gaps = 0, above = 0;
    std::string missing_output;
    for (const auto& c : panel) {
        if (!c.phi) ++gaps;
        if (c.status == CellStatus::AboveOne) ++above;
        if (c.status == CellStatus::MissingOutput && missing_output.empty()) missing_output = c.detail;
    }
    if (with_sector) {
        auto f = open_output(dir / "freeness_medians.csv");
        CsvWriter w(f);
        w.row({"pair", "period", "median_phi", "sectors"});
        for (const auto& m : sectoral_median_freeness(panel))
            w.row({m.pair, m.period, format_double(m.median), std::to_string(m.sectors)});
    }
    out << panel.size() << " cells, " << gaps << " gaps";
    if (above) out << ", warning: " << above << " cells with phi > 1";
    out << "\nwrote " << (dir / "freeness_panel.csv").string() << '\n';
    // The panel keeps the gap, but a reporter without gross output is a
    // data error rather than a missing observation.
    if (!missing_output.empty())
        throw InvalidInput("no gross output row for " + missing_output + " in " + outputs);
    return kExitOk;
}

}  // namespace

const std::vector<std::string>& equilibrium_columns() {
    static const std::vector<std::string> cols{"region", "w",  "n",   "q",   "p",
                                               "Y",      "R",  "L",   "L_F", "L_M",
                                               "x",      "pi", "real_wage", "real_gdp_pc",
                                               "ind_share"};
    return cols;
}

const std::vector<std::string>& sweep_long_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c{"phi_wb"};
        const auto& eq = equilibrium_columns();
        c.insert(c.end(), eq.begin(), eq.end());
        c.push_back("converged");
        return c;
    }();
    return cols;
}

const std::vector<std::string>& sweep_summary_columns() {
    static const std::vector<std::string> cols{"phi_wb",  "ew_ratio", "hb_ratio", "share_W",
                                               "share_B", "share_H",  "converged"};
    return cols;
}

std::vector<std::string> freeness_columns(bool with_sector) {
    if (with_sector) return {"pair", "period", "sector", "phi", "status"};
    return {"pair", "period", "phi", "status"};
}

void write_equilibrium_csv(std::ostream& out, const EconomyState& state, const ModelParams& params) {
    const RealMetrics m = real_metrics(state, params);
    CsvWriter w(out);
    w.row(equilibrium_columns());
    for (RegionId r : kAllRegions) {
        const auto i = idx(r);
        std::vector<std::string> row{std::string(region_code(r))};
        const auto f = state_fields(state[i], m.real_wage[i], m.real_gdp_pc[i], m.ind_share[i]);
        row.insert(row.end(), f.begin(), f.end());
        w.row(row);
    }
}

void write_sweep_long_csv(std::ostream& out, const SweepTrajectory& traj) {
    CsvWriter w(out);
    w.row(sweep_long_columns());
    for (const auto& rec : traj.records) {
        for (RegionId r : kAllRegions) {
            const auto i = idx(r);
            std::vector<std::string> row{format_double(rec.phi_wb), std::string(region_code(r))};
            const auto f = state_fields(rec.report.state[i], rec.metrics.real_wage[i],
                                        rec.metrics.real_gdp_pc[i], rec.metrics.ind_share[i]);
            row.insert(row.end(), f.begin(), f.end());
            row.push_back(rec.converged ? "1" : "0");
            w.row(row);
        }
    }
}

void write_sweep_summary_csv(std::ostream& out, const SweepTrajectory& traj) {
    CsvWriter w(out);
    w.row(sweep_summary_columns());
    for (const auto& rec : traj.records) {
        w.row({format_double(rec.phi_wb), format_double(rec.bloc.ew_ratio),
               format_double(rec.bloc.hb_ratio), format_double(rec.metrics.ind_share[0]),
               format_double(rec.metrics.ind_share[1]), format_double(rec.metrics.ind_share[2]),
               rec.converged ? "1" : "0"});
    }
}

void write_freeness_csv(std::ostream& out, std::span<const PanelCell> panel, bool with_sector) {
    CsvWriter w(out);
    w.row(freeness_columns(with_sector));
    for (const auto& c : panel) {
        std::vector<std::string> row{c.pair, c.period};
        if (with_sector) row.push_back(c.sector);
        row.push_back(c.phi ? format_double(*c.phi) : std::string{});
        row.push_back(c.status_text());
        w.row(row);
    }
}

std::string turning_point_summary(const SweepTrajectory& traj) {
    std::vector<const SweepRecord*> ok;
    for (const auto& rec : traj.records)
        if (rec.converged) ok.push_back(&rec);

    std::ostringstream o;
    o << "points " << traj.records.size() << "  failed " << traj.failures() << '\n';
    for (const auto& rec : traj.records)
        if (!rec.converged)
            o << "  failed phi_wb=" << format_double(rec.phi_wb) << ": " << rec.error << '\n';

    std::vector<double> grid;
    for (const auto* r : ok) grid.push_back(r->phi_wb);
    auto series = [&](const char* name, auto value) {
        o << name << ':';
        if (ok.size() < 3) {
            o << " (too few points)\n";
            return;
        }
        std::vector<double> v;
        for (const auto* r : ok) v.push_back(value(*r));
        const auto tps = detect_turning_points(grid, v);
        if (tps.empty()) o << " monotone";
        for (const auto& tp : tps)
            o << ' ' << turning_kind_name(tp.kind) << "@" << format_double(tp.phi);
        o << "  [first " << format_double(v.front()) << ", last " << format_double(v.back())
          << "]\n";
    };
    series("ew_ratio", [](const SweepRecord& r) { return r.bloc.ew_ratio; });
    series("hb_ratio", [](const SweepRecord& r) { return r.bloc.hb_ratio; });
    series("share_W", [](const SweepRecord& r) { return r.metrics.ind_share[0]; });
    series("share_B", [](const SweepRecord& r) { return r.metrics.ind_share[1]; });
    series("share_H", [](const SweepRecord& r) { return r.metrics.ind_share[2]; });
    return o.str();
}

TradeFlowTable load_trade_tables(const std::filesystem::path& flows,
                                 const std::filesystem::path& outputs) {
    TradeFlowTable table;

    const CsvTable f = read_csv_file(flows);
    const std::string fname = flows.string();
    const int f_rep = require_column(f, "reporter", fname);
    const int f_par = require_column(f, "partner", fname);
    const int f_per = require_column(f, "period", fname);
    const int f_val = require_column(f, "import_value", fname);
    const int f_sec = f.column("sector");
    for (const auto& row : f.rows) {
        const auto at = [&](int c) { return row.fields[static_cast<std::size_t>(c)]; };
        const std::string where = fname + ":" + std::to_string(row.line) + ": column import_value";
        FlowRecord rec{at(f_rep), at(f_par), at(f_per), column_value(row, f_sec).value_or(""),
                       parse_number(at(f_val), where)};
        try {
            table.add_flow(rec);
        } catch (const InvalidInput& e) {
            throw InvalidInput(fname + ":" + std::to_string(row.line) + ": " + e.what());
        }
    }

    const CsvTable o = read_csv_file(outputs);
    const std::string oname = outputs.string();
    const int o_rep = require_column(o, "reporter", oname);
    const int o_per = require_column(o, "period", oname);
    const int o_gross = require_column(o, "gross_output", oname);
    const int o_exp = require_column(o, "total_exports", oname);
    const int o_sec = o.column("sector");
    for (const auto& row : o.rows) {
        const auto at = [&](int c) { return row.fields[static_cast<std::size_t>(c)]; };
        const std::string line = oname + ":" + std::to_string(row.line);
        OutputRecord rec{at(o_rep), at(o_per), column_value(row, o_sec).value_or(""),
                         parse_number(at(o_gross), line + ": column gross_output"),
                         parse_number(at(o_exp), line + ": column total_exports")};
        try {
            table.add_output(rec);
        } catch (const InvalidInput& e) {
            throw InvalidInput(line + ": " + e.what());
        }
    }
    return table;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Three-region economic geography simulator", "negsim"};
    app.require_subcommand(1);

    ModelFlags solve_flags;
    std::optional<double> phi_wb;
    auto* solve = app.add_subcommand("solve", "Solve one equilibrium");
    solve_flags.attach(*solve);
    solve->add_option("--phi-wb", phi_wb, "West-Border trade freeness");

    ModelFlags sweep_flags;
    std::optional<std::size_t> points;
    bool reverse = false, parallel = false;
    std::optional<unsigned> threads;
    auto* sweep = app.add_subcommand("sweep", "Trace equilibria as phi_WB rises from 0 to 1");
    sweep_flags.attach(*sweep);
    sweep->add_option("--points", points, "Number of grid points on [0, 1]");
    sweep->add_flag("--reverse", reverse, "Sweep phi_WB downwards");
    sweep->add_flag("--parallel", parallel, "Cold-start every point independently, in parallel");
    sweep->add_option("--threads", threads, "Worker threads for --parallel");

    std::string flows_path, outputs_path;
    std::vector<std::string> pair_specs, bloc_specs, period_filter;
    std::string free_out = ".";
    std::string free_format = "csv";
    auto* freeness_cmd = app.add_subcommand("freeness", "Trade freeness panel from trade data");
    freeness_cmd->add_option("--flows", flows_path, "reporter,partner,period,import_value CSV")
        ->required();
    freeness_cmd
        ->add_option("--outputs", outputs_path, "reporter,period,gross_output,total_exports CSV")
        ->required();
    freeness_cmd->add_option("--pair", pair_specs, "Location pair A:B (repeatable)");
    freeness_cmd->add_option("--bloc", bloc_specs, "Bloc definition NAME=M1,M2,... (repeatable)");
    freeness_cmd->add_option("--period", period_filter, "Restrict to these periods");
    freeness_cmd->add_option("--out", free_out, "Output directory");
    freeness_cmd->add_option("--format", free_format, "csv");

    double ratio = 0.0;
    auto* calib = app.add_subcommand("calibrate-epsilon",
                                     "Migration propensity from the Border/West GDP pc ratio");
    calib->add_option("--ratio", ratio, "Border/West real GDP per capita ratio in (0, 1)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInvalidInput;
    }

    try {
        if (*solve) {
            RunConfig cfg = solve_flags.resolve();
            if (phi_wb) cfg.phi_wb = *phi_wb;
            cfg.validate();
            return cmd_solve(cfg, out);
        }
        if (*sweep) {
            RunConfig cfg = sweep_flags.resolve();
            if (points) cfg.sweep_points = *points;
            if (reverse) cfg.reverse = true;
            if (parallel) cfg.parallel = true;
            if (threads) cfg.threads = *threads;
            cfg.validate();
            return cmd_sweep(cfg, out);
        }
        if (*freeness_cmd) {
            if (parse_format(free_format))
                throw InvalidInput("freeness writes csv only; --format csv+svg is not supported");
            return cmd_freeness(flows_path, outputs_path, pair_specs, bloc_specs, period_filter,
                                free_out, out);
        }
        if (*calib) {
            out << format_double(calibrate_epsilon(ratio)) << '\n';
            return kExitOk;
        }
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const ConvergenceError& e) {
        err << "no convergence: " << e.what() << '\n';
        return kExitNoConvergence;
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << '\n';
        return kExitNoConvergence;
    }
    return kExitInvalidInput;
}

}  // namespace neg::cli
