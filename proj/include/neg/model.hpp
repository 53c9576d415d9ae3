#pragma once

// Three-region economic geography model: domain types and the closed-form
// equations of demand, pricing, agriculture and labor use. Everything here is
// a pure function of its arguments.
//
// Conventions:
//   * Regions are always ordered (West, Border, Hinterland).
//   * Food is the numeraire and trades freely, so its price is 1 everywhere.
//   * Trade costs enter only through freeness phi_ij = T_ij^(1-sigma); phi = 0
//     terms drop out of every sum instead of producing infinite iceberg costs.
//   * The variety mass n is a real number >= 0 (a continuum of firms).

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

#include "neg/errors.hpp"

namespace neg {

inline constexpr std::size_t kRegionCount = 3;

enum class RegionId : std::size_t { West = 0, Border = 1, Hinterland = 2 };

inline constexpr std::array<RegionId, kRegionCount> kAllRegions{
    RegionId::West, RegionId::Border, RegionId::Hinterland};

constexpr std::size_t idx(RegionId r) noexcept { return static_cast<std::size_t>(r); }

std::string_view region_name(RegionId r) noexcept;
// Single-letter code used in CSV output: W, B, H.
std::string_view region_code(RegionId r) noexcept;

using Vec3 = std::array<double, kRegionCount>;

struct ModelParams {
    double sigma = 7.122;  // elasticity of substitution between varieties
    double gamma = 0.77;   // consumers' expenditure share on manufactures
    double mu = 0.284;     // intermediate-input share of firms' costs
    double theta = 0.234;  // labor elasticity of agricultural output

    // Normalized fixed and marginal input requirements.
    double alpha() const noexcept { return 1.0 / sigma; }
    double beta() const noexcept { return (sigma - 1.0) / sigma; }

    // Throws InvalidInput naming the first field out of range.
    void validate() const;
};

struct RegionEndowments {
    Vec3 labor_1990{0.48, 0.15, 0.37};  // population shares
    Vec3 land{0.12, 0.04, 0.84};        // land-area shares
    bool migration_open = false;        // Border<->West migration allowed

    void validate() const;
};

// Symmetric 3x3 matrix of pairwise trade freeness with unit diagonal.
class FreenessMatrix {
public:
    // Identity: all regions in autarky from each other.
    FreenessMatrix() noexcept;

    // Explicit pairwise values. Throws InvalidInput if any is outside [0, 1].
    FreenessMatrix(double west_border, double border_hinterland, double west_hinterland);

    // Liberalization scenario: phi_WH is tied to phi_WB * phi_BH.
    static FreenessMatrix scenario(double phi_wb, double phi_bh);

    // All off-diagonal entries equal to `value`.
    static FreenessMatrix uniform(double value);

    double operator()(std::size_t i, std::size_t j) const noexcept { return phi_[i][j]; }
    double operator()(RegionId i, RegionId j) const noexcept { return phi_[idx(i)][idx(j)]; }

    Vec3 row(std::size_t i) const noexcept { return phi_[i]; }

    // Relabels regions: result(perm[i], perm[j]) = this(i, j).
    FreenessMatrix permuted(const std::array<std::size_t, kRegionCount>& perm) const;

private:
    std::array<Vec3, kRegionCount> phi_;
};

// Per-region unknowns and derived quantities of one equilibrium.
struct RegionalState {
    double w = 0.0;    // wage
    double n = 0.0;    // variety mass
    double q = 0.0;    // manufactures price index
    double p = 0.0;    // mill price
    double Y = 0.0;    // nominal income
    double R = 0.0;    // land rent
    double e = 0.0;    // expenditure on manufactures (final + intermediate)
    double x = 0.0;    // output per firm
    double pi = 0.0;   // profit per firm
    double L_F = 0.0;  // agricultural labor
    double L_M = 0.0;  // manufacturing labor
    double L = 0.0;    // labor stock
};

using EconomyState = std::array<RegionalState, kRegionCount>;

struct Residuals {
    double labor = 0.0;            // max_i |L_M + L_F - L| / L
    double complementarity = 0.0;  // max over active |x-1|, idle max(x_entrant-1, 0)
    double walras = 0.0;           // |sum (1-gamma) Y - sum F|
    double linkage = 0.0;          // max |column sum of linkage matrix - 1|
};

struct IterationCounts {
    int price = 0;    // total inner price iterations
    int wage = 0;     // total wage iterations
    int variety = 0;  // outer variety-mass iterations
};

struct EquilibriumReport {
    EconomyState state{};
    Residuals residuals{};
    bool converged = false;
    IterationCounts iterations{};
};

struct RealMetrics {
    Vec3 real_wage{};    // w / q
    Vec3 real_gdp_pc{};  // Y / (L q^gamma)
    Vec3 ind_share{};    // n p x / sum(n p x)
};

// ---------------------------------------------------------------------------
// Closed-form operations

// Aggregate sum_i n_i phi_ij p_i^(1-sigma) for every destination j. Zero means
// no variety reaches j.
Vec3 price_aggregate(const Vec3& n, const Vec3& p, const FreenessMatrix& phi, double sigma);

// CES price index over c.i.f. prices of all varieties reaching each region.
// Throws ModelError("empty-variety region ...") if a region is reached by none.
Vec3 price_index(const Vec3& n, const Vec3& p, const FreenessMatrix& phi, double sigma);

// Marginal cost pricing with the markup absorbed by the normalization.
double mill_price(double q, double w, double mu);

double land_rent(double w, double land, double theta);
double agricultural_labor(double w, double land, double theta);
double food_output(double agri_labor, double land, double theta);

inline double nominal_income(double w, double labor, double rent) { return w * labor + rent; }

// Column k of the linkage matrix: share of region k's manufactures spending
// that lands on each producing region. M(j,k) = n_j p_j^(1-sigma) phi_jk q_k^(sigma-1).
// Columns for regions with q = inf are zero.
std::array<Vec3, kRegionCount> linkage_matrix(const Vec3& n, const Vec3& p, const Vec3& q,
                                              const FreenessMatrix& phi, double sigma);

// Solves e = gamma Y + mu * (n p x)(e) exactly as a 3x3 linear system.
// Throws ModelError("inconsistent price index ...") when a column of the
// linkage matrix deviates from 1 by more than `consistency_tol`.
Vec3 expenditure_system(const Vec3& Y, const Vec3& n, const Vec3& p, const Vec3& q,
                        const FreenessMatrix& phi, const ModelParams& params,
                        double consistency_tol = 1e-10);

// Demand faced by one firm of the producing region whose freeness row is
// `phi_row`. Destinations with q = inf or phi = 0 contribute nothing.
double firm_demand(double p_i, const Vec3& e, const Vec3& q, const Vec3& phi_row,
                   double sigma);

inline double firm_profit(double p, double x, double sigma) { return p / sigma * (x - 1.0); }

double manufacturing_labor(double n, double p, double x, double w, double mu, double sigma);

RealMetrics real_metrics(const EconomyState& state, const ModelParams& params);

}  // namespace neg
