#include "neg/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

namespace neg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& message) {
    if (!ok) throw InvalidInput(message);
}

bool in_unit_open(double v) { return v > 0.0 && v < 1.0; }

void check_share_vector(const Vec3& v, const char* field) {
    double sum = 0.0;
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        require(std::isfinite(v[i]) && v[i] > 0.0,
                std::string(field) + "[" + std::to_string(i) + "] must be > 0");
        sum += v[i];
    }
    require(std::abs(sum - 1.0) <= 1e-12, std::string(field) + " must sum to 1");
}

void check_freeness(double v, const char* field) {
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0,
            std::string(field) + " must lie in [0, 1]");
}

}  // namespace

std::string_view region_name(RegionId r) noexcept {
    switch (r) {
        case RegionId::West: return "West";
        case RegionId::Border: return "Border";
        case RegionId::Hinterland: return "Hinterland";
    }
    return "?";
}

std::string_view region_code(RegionId r) noexcept {
    switch (r) {
        case RegionId::West: return "W";
        case RegionId::Border: return "B";
        case RegionId::Hinterland: return "H";
    }
    return "?";
}

void ModelParams::validate() const {
    require(std::isfinite(sigma) && sigma > 1.0, "sigma must be > 1");
    require(in_unit_open(gamma), "gamma must lie in (0, 1)");
    require(in_unit_open(mu), "mu must lie in (0, 1)");
    require(in_unit_open(theta), "theta must lie in (0, 1)");
}

void RegionEndowments::validate() const {
    check_share_vector(labor_1990, "labor_1990");
    check_share_vector(land, "land");
}

// ---------------------------------------------------------------------------

FreenessMatrix::FreenessMatrix() noexcept {
    for (std::size_t i = 0; i < kRegionCount; ++i)
        for (std::size_t j = 0; j < kRegionCount; ++j) phi_[i][j] = (i == j) ? 1.0 : 0.0;
}

FreenessMatrix::FreenessMatrix(double west_border, double border_hinterland,
                               double west_hinterland)
    : FreenessMatrix() {
    check_freeness(west_border, "phi_wb");
    check_freeness(border_hinterland, "phi_bh");
    check_freeness(west_hinterland, "phi_wh");
    constexpr auto W = idx(RegionId::West), B = idx(RegionId::Border),
                   H = idx(RegionId::Hinterland);
    phi_[W][B] = phi_[B][W] = west_border;
    phi_[B][H] = phi_[H][B] = border_hinterland;
    phi_[W][H] = phi_[H][W] = west_hinterland;
}

FreenessMatrix FreenessMatrix::scenario(double phi_wb, double phi_bh) {
    check_freeness(phi_wb, "phi_wb");
    check_freeness(phi_bh, "phi_bh");
    return FreenessMatrix(phi_wb, phi_bh, phi_wb * phi_bh);
}

FreenessMatrix FreenessMatrix::uniform(double value) {
    return FreenessMatrix(value, value, value);
}

FreenessMatrix FreenessMatrix::permuted(const std::array<std::size_t, kRegionCount>& perm) const {
    FreenessMatrix out;
    for (std::size_t i = 0; i < kRegionCount; ++i)
        for (std::size_t j = 0; j < kRegionCount; ++j) out.phi_[perm[i]][perm[j]] = phi_[i][j];
    return out;
}

// ---------------------------------------------------------------------------

Vec3 price_aggregate(const Vec3& n, const Vec3& p, const FreenessMatrix& phi, double sigma) {
    Vec3 agg{};
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        if (n[i] <= 0.0) continue;
        const double term = n[i] * std::pow(p[i], 1.0 - sigma);
        for (std::size_t j = 0; j < kRegionCount; ++j) {
            if (phi(i, j) > 0.0) agg[j] += term * phi(i, j);
        }
    }
    return agg;
}

Vec3 price_index(const Vec3& n, const Vec3& p, const FreenessMatrix& phi, double sigma) {
    const Vec3 agg = price_aggregate(n, p, phi, sigma);
    Vec3 q{};
    for (std::size_t j = 0; j < kRegionCount; ++j) {
        if (!(agg[j] > 0.0)) {
            throw ModelError("empty-variety region: no varieties reach " +
                             std::string(region_name(kAllRegions[j])));
        }
        q[j] = std::pow(agg[j], 1.0 / (1.0 - sigma));
    }
    return q;
}

double mill_price(double q, double w, double mu) {
    return std::pow(q, mu) * std::pow(w, 1.0 - mu);
}

double land_rent(double w, double land, double theta) {
    return (1.0 - theta) * land * std::pow(theta / w, theta / (1.0 - theta));
}

double agricultural_labor(double w, double land, double theta) {
    return land * std::pow(theta / w, 1.0 / (1.0 - theta));
}

double food_output(double agri_labor, double land, double theta) {
    return std::pow(agri_labor, theta) * std::pow(land, 1.0 - theta);
}

std::array<Vec3, kRegionCount> linkage_matrix(const Vec3& n, const Vec3& p, const Vec3& q,
                                              const FreenessMatrix& phi, double sigma) {
    std::array<Vec3, kRegionCount> m{};
    for (std::size_t k = 0; k < kRegionCount; ++k) {
        if (!std::isfinite(q[k])) continue;
        const double demand_shifter = std::pow(q[k], sigma - 1.0);
        for (std::size_t j = 0; j < kRegionCount; ++j) {
            if (n[j] <= 0.0 || phi(j, k) <= 0.0) continue;
            m[j][k] = n[j] * std::pow(p[j], 1.0 - sigma) * phi(j, k) * demand_shifter;
        }
    }
    return m;
}

Vec3 expenditure_system(const Vec3& Y, const Vec3& n, const Vec3& p, const Vec3& q,
                        const FreenessMatrix& phi, const ModelParams& params,
                        double consistency_tol) {
    const auto m = linkage_matrix(n, p, q, phi, params.sigma);

    for (std::size_t k = 0; k < kRegionCount; ++k) {
        if (!std::isfinite(q[k])) continue;
        const double col = m[0][k] + m[1][k] + m[2][k];
        if (std::abs(col - 1.0) > consistency_tol) {
            throw ModelError("inconsistent price index: linkage column " + std::to_string(k) +
                             " sums to " + std::to_string(col));
        }
    }

    Eigen::Matrix3d a = Eigen::Matrix3d::Identity();
    Eigen::Vector3d b;
    for (std::size_t j = 0; j < kRegionCount; ++j) {
        b(static_cast<Eigen::Index>(j)) = params.gamma * Y[j];
        for (std::size_t k = 0; k < kRegionCount; ++k)
            a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) -= params.mu * m[j][k];
    }
    const Eigen::Vector3d e = a.partialPivLu().solve(b);
    return {e(0), e(1), e(2)};
}

double firm_demand(double p_i, const Vec3& e, const Vec3& q, const Vec3& phi_row, double sigma) {
    if (!std::isfinite(p_i)) return 0.0;
    double x = 0.0;
    for (std::size_t j = 0; j < kRegionCount; ++j) {
        if (phi_row[j] <= 0.0 || !std::isfinite(q[j])) continue;
        x += e[j] * std::pow(q[j], sigma - 1.0) * phi_row[j];
    }
    return std::pow(p_i, -sigma) * x;
}

double manufacturing_labor(double n, double p, double x, double w, double mu, double sigma) {
    if (n <= 0.0) return 0.0;
    // Unit cost times (alpha + beta x), with alpha = 1/sigma, beta = (sigma-1)/sigma.
    return (1.0 - mu) * n * p * (1.0 + (sigma - 1.0) * x) / (sigma * w);
}

RealMetrics real_metrics(const EconomyState& state, const ModelParams& params) {
    RealMetrics out;
    double revenue_total = 0.0;
    for (const auto& r : state) revenue_total += r.n * r.p * r.x;
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        const auto& r = state[i];
        out.real_wage[i] = r.w / r.q;
        out.real_gdp_pc[i] = r.Y / (r.L * std::pow(r.q, params.gamma));
        out.ind_share[i] = revenue_total > 0.0 ? r.n * r.p * r.x / revenue_total : 0.0;
    }
    return out;
}

}  // namespace neg
