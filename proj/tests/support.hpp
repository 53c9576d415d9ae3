#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "neg/model.hpp"

namespace negtest {

using Big = boost::multiprecision::cpp_dec_float_50;

inline double rel_err(double got, double want) {
    if (got == want) return 0.0;
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

inline double rel_err(double got, const Big& want) {
    const Big diff = abs(Big(got) - want);
    return static_cast<double>(diff / max(abs(want), Big("1e-300")));
}

struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine);
    }
    // Log-uniform on [lo, hi].
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }

    neg::ModelParams params() {
        neg::ModelParams p;
        p.sigma = uniform(1.5, 12.0);
        p.gamma = uniform(0.05, 0.95);
        p.mu = uniform(0.05, 0.8);
        p.theta = uniform(0.05, 0.95);
        return p;
    }

    neg::Vec3 shares(double floor = 0.05) {
        neg::Vec3 v{};
        double s = 0.0;
        for (double& x : v) {
            x = uniform(floor, 1.0);
            s += x;
        }
        for (double& x : v) x /= s;
        return v;
    }
};

// High-precision evaluations of the closed forms, independent of the library.
namespace oracle {

inline Big land_rent(double w, double land, double theta) {
    const Big t(theta);
    return (1 - t) * Big(land) * pow(t / Big(w), t / (1 - t));
}

inline Big agricultural_labor(double w, double land, double theta) {
    const Big t(theta);
    return Big(land) * pow(t / Big(w), 1 / (1 - t));
}

inline Big mill_price(double q, double w, double mu) {
    const Big m(mu);
    return pow(Big(q), m) * pow(Big(w), 1 - m);
}

inline Big firm_profit(double p, double x, double sigma) {
    return Big(p) / Big(sigma) * (Big(x) - 1);
}

inline std::array<Big, 3> price_index(const neg::Vec3& n, const neg::Vec3& p,
                                      const neg::FreenessMatrix& phi, double sigma) {
    const Big s(sigma);
    std::array<Big, 3> q;
    for (std::size_t j = 0; j < 3; ++j) {
        Big agg = 0;
        for (std::size_t i = 0; i < 3; ++i)
            if (n[i] > 0 && phi(i, j) > 0) agg += Big(n[i]) * Big(phi(i, j)) * pow(Big(p[i]), 1 - s);
        q[j] = pow(agg, 1 / (1 - s));
    }
    return q;
}

}  // namespace oracle

inline double max_rel(const neg::Vec3& a, const neg::Vec3& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, rel_err(a[i], b[i]));
    return m;
}

}  // namespace negtest
