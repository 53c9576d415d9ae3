#include "neg/cli/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <string_view>

namespace neg::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::string_view section,
                    std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw InvalidInput(std::string(section) + " must be a JSON object");
    const std::set<std::string_view> ok(allowed);
    for (const auto& [key, value] : obj.items()) {
        if (!ok.contains(key)) {
            throw InvalidInput("unknown config key '" +
                               (section.empty() ? key : std::string(section) + "." + key) + "'");
        }
    }
}

std::string field_name(std::string_view section, std::string_view key) {
    return std::string(section) + "." + std::string(key);
}

void read_number(const json& obj, std::string_view section, const char* key, double& dst) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw InvalidInput(field_name(section, key) + " must be a number");
    dst = v.get<double>();
}

template <typename Int>
void read_count(const json& obj, std::string_view section, const char* key, Int& dst) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw InvalidInput(field_name(section, key) + " must be a non-negative integer");
    dst = static_cast<Int>(v.get<long long>());
}

void read_bool(const json& obj, std::string_view section, const char* key, bool& dst) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) throw InvalidInput(field_name(section, key) + " must be true or false");
    dst = v.get<bool>();
}

void read_vec3(const json& obj, std::string_view section, const char* key, Vec3& dst) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_array() || v.size() != kRegionCount)
        throw InvalidInput(field_name(section, key) + " must be an array of 3 numbers (W, B, H)");
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        if (!v[i].is_number())
            throw InvalidInput(field_name(section, key) + " must be an array of 3 numbers (W, B, H)");
        dst[i] = v[i].get<double>();
    }
}

}  // namespace

void RunConfig::validate() const {
    params.validate();
    endowments.validate();
    solver.validate();
    migration.validate();
    if (!(phi_wb >= 0.0 && phi_wb <= 1.0)) throw InvalidInput("phi_wb must lie in [0, 1]");
    if (!(phi_bh >= 0.0 && phi_bh <= 1.0)) throw InvalidInput("phi_bh must lie in [0, 1]");
    if (sweep_points < 1) throw InvalidInput("sweep.points must be >= 1");
}

SweepPlan RunConfig::sweep_plan() const {
    SweepPlan plan;
    plan.grid = uniform_grid(sweep_points);
    plan.phi_bh = phi_bh;
    plan.params = params;
    plan.endowments = endowments;
    plan.migration = migration;
    plan.solver = solver;
    plan.reverse = reverse;
    plan.parallel_cold_start = parallel;
    plan.threads = threads;
    return plan;
}

RunConfig parse_config(const json& doc, RunConfig cfg) {
    reject_unknown(doc, "", {"params", "endowments", "migration", "solver", "scenario", "sweep",
                             "output"});

    if (doc.contains("params")) {
        const auto& s = doc.at("params");
        reject_unknown(s, "params", {"sigma", "gamma", "mu", "theta"});
        read_number(s, "params", "sigma", cfg.params.sigma);
        read_number(s, "params", "gamma", cfg.params.gamma);
        read_number(s, "params", "mu", cfg.params.mu);
        read_number(s, "params", "theta", cfg.params.theta);
    }
    if (doc.contains("endowments")) {
        const auto& s = doc.at("endowments");
        reject_unknown(s, "endowments", {"labor_1990", "land"});
        read_vec3(s, "endowments", "labor_1990", cfg.endowments.labor_1990);
        read_vec3(s, "endowments", "land", cfg.endowments.land);
    }
    if (doc.contains("migration")) {
        const auto& s = doc.at("migration");
        reject_unknown(s, "migration",
                       {"enabled", "epsilon", "damping", "tolerance", "max_iterations"});
        read_bool(s, "migration", "enabled", cfg.migration.enabled);
        read_number(s, "migration", "epsilon", cfg.migration.epsilon);
        read_number(s, "migration", "damping", cfg.migration.damping);
        read_number(s, "migration", "tolerance", cfg.migration.tolerance);
        read_count(s, "migration", "max_iterations", cfg.migration.max_iterations);
    }
    if (doc.contains("solver")) {
        const auto& s = doc.at("solver");
        reject_unknown(s, "solver",
                       {"tol_price", "tol_wage", "tol_profit", "tol_walras", "consistency_tol",
                        "damping_wage", "damping_variety", "entrant_mass", "max_price_iterations",
                        "max_wage_iterations", "max_variety_iterations", "wage_method"});
        auto& c = cfg.solver;
        read_number(s, "solver", "tol_price", c.tol_price);
        read_number(s, "solver", "tol_wage", c.tol_wage);
        read_number(s, "solver", "tol_profit", c.tol_profit);
        read_number(s, "solver", "tol_walras", c.tol_walras);
        read_number(s, "solver", "consistency_tol", c.consistency_tol);
        read_number(s, "solver", "damping_wage", c.damping_wage);
        read_number(s, "solver", "damping_variety", c.damping_variety);
        read_number(s, "solver", "entrant_mass", c.entrant_mass);
        read_count(s, "solver", "max_price_iterations", c.max_price_iterations);
        read_count(s, "solver", "max_wage_iterations", c.max_wage_iterations);
        read_count(s, "solver", "max_variety_iterations", c.max_variety_iterations);
        if (s.contains("wage_method")) {
            const auto& v = s.at("wage_method");
            const std::string m = v.is_string() ? v.get<std::string>() : std::string{};
            if (m == "newton") c.wage_method = WageMethod::Newton;
            else if (m == "tatonnement") c.wage_method = WageMethod::Tatonnement;
            else throw InvalidInput("solver.wage_method must be \"newton\" or \"tatonnement\"");
        }
    }
    if (doc.contains("scenario")) {
        const auto& s = doc.at("scenario");
        reject_unknown(s, "scenario", {"phi_wb", "phi_bh"});
        read_number(s, "scenario", "phi_wb", cfg.phi_wb);
        read_number(s, "scenario", "phi_bh", cfg.phi_bh);
    }
    if (doc.contains("sweep")) {
        const auto& s = doc.at("sweep");
        reject_unknown(s, "sweep", {"points", "reverse", "parallel", "threads"});
        read_count(s, "sweep", "points", cfg.sweep_points);
        read_bool(s, "sweep", "reverse", cfg.reverse);
        read_bool(s, "sweep", "parallel", cfg.parallel);
        read_count(s, "sweep", "threads", cfg.threads);
    }
    if (doc.contains("output")) {
        const auto& s = doc.at("output");
        reject_unknown(s, "output", {"dir", "format"});
        if (s.contains("dir")) {
            if (!s.at("dir").is_string()) throw InvalidInput("output.dir must be a string");
            cfg.out_dir = s.at("dir").get<std::string>();
        }
        if (s.contains("format")) {
            if (!s.at("format").is_string()) throw InvalidInput("output.format must be a string");
            cfg.svg = parse_format(s.at("format").get<std::string>());
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput("config " + path.string() + ": " + e.what());
    }
    return parse_config(doc, std::move(base));
}

bool parse_format(const std::string& format) {
    if (format == "csv") return false;
    if (format == "csv+svg") return true;
    throw InvalidInput("format must be csv or csv+svg, got '" + format + "'");
}

RegionEndowments exclude_country_preset(const RegionEndowments& base,
                                        const std::filesystem::path& data_file) {
    std::ifstream in(data_file);
    if (!in) throw InvalidInput("cannot open preset data " + data_file.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw InvalidInput("preset " + data_file.string() + ": " + e.what());
    }
    auto figure = [&](const char* group, const char* key) {
        if (!doc.contains(group) || !doc.at(group).contains(key) ||
            !doc.at(group).at(key).is_number())
            throw InvalidInput("preset " + data_file.string() + ": missing " + group + "." + key);
        return doc.at(group).at(key).get<double>();
    };
    const double pop_share = figure("country", "population_1990") /
                             figure("three_region_total", "population_1990");
    const double land_share =
        figure("country", "land_area_km2") / figure("three_region_total", "land_area_km2");

    constexpr auto H = idx(RegionId::Hinterland);
    RegionEndowments out = base;
    out.labor_1990[H] -= pop_share;
    out.land[H] -= land_share;
    if (!(out.labor_1990[H] > 0.0 && out.land[H] > 0.0))
        throw InvalidInput("preset removes all Hinterland labor or land");
    auto renormalize = [](Vec3& v) {
        const double s = v[0] + v[1] + v[2];
        for (double& x : v) x /= s;
    };
    renormalize(out.labor_1990);
    renormalize(out.land);
    out.validate();
    return out;
}

std::filesystem::path default_data_dir() {
#ifdef NEG_DATA_DIR
    return NEG_DATA_DIR;
#else
    return "data";
#endif
}

}  // namespace neg::cli
