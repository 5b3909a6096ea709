#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "dependence.hpp"
#include "error.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"

namespace gou {

/// sigma_{V(t)} with sigma^alpha = |rho(t)|^alpha sigma0^alpha + int_0^t |rho(u)|^alpha du.
inline double scale_param_stable(const KernelSpec& kernel, double alpha, double sigma0, double t) {
    validate(kernel);
    detail::require(alpha > 1 && alpha <= 2, "alpha must lie in (1, 2]");
    detail::require(sigma0 >= 0, "sigma0 must be >= 0");
    detail::require_time(t, "t");
    double v = std::pow(std::abs(eval_kernel(kernel, t)) * sigma0, alpha);
    if (t > 0)
        v += quad::integrate_pieces([&](double u) { return std::pow(std::abs(eval_kernel(kernel, u)), alpha); }, 0.0,
                                    t, detail::sign_breaks(kernel, 0.0, 0.0, t));
    return std::pow(v, 1.0 / alpha);
}

/// Driving Levy process with triplet (G, beta, lambda delta_1): Gaussian part of
/// variance G per unit time, drift beta, unit jumps at rate lambda.
struct LevyTriplet {
    double G = 0.0;
    double beta_drift = 0.0;
    double lambda = 1.0;
};

inline void validate(const LevyTriplet& L) {
    detail::require(L.G >= 0 && std::isfinite(L.G), "G must be >= 0");
    detail::require(std::isfinite(L.beta_drift), "beta must be finite");
    detail::require(L.lambda > 0 && std::isfinite(L.lambda), "lambda must be > 0");
}

/// Generating triplet (A_t, gamma_t, nu_t) of V(t) for fixed t. nu_on(l, u)
/// returns the mass of [l, u).
struct TripletSummary {
    double A_t = 0.0;
    double gamma_t = 0.0;
    double total_mass = 0.0;
    std::function<double(double, double)> nu_on;
};

inline TripletSummary triplet_ou_poisson(double theta, const LevyTriplet& L, double v0, double t) {
    detail::require(theta > 0 && std::isfinite(theta), "theta must be > 0");
    validate(L);
    detail::require_time(t, "t");
    TripletSummary s;
    s.A_t = L.G / (2 * theta) * -std::expm1(-2 * theta * t);
    s.gamma_t = v0 * std::exp(-theta * t) + L.beta_drift / theta * -std::expm1(-theta * t);
    s.total_mass = L.lambda * t;
    // e^{-theta u} lies in [l, hi) for u in (-ln(hi)/theta, -ln(l)/theta]
    s.nu_on = [theta, t, lam = L.lambda](double l, double hi) {
        if (!(hi > l) || hi <= 0) return 0.0;
        const double from = hi > 1 ? 0.0 : -std::log(hi) / theta;
        const double to = l <= 0 ? t : -std::log(l) / theta;
        return lam * std::max(0.0, std::min(to, t) - std::max(from, 0.0));
    };
    return s;
}

namespace detail {

/// Measure of {w in [0, W] : cos w >= c}.
inline double cos_superlevel(double c, double W) {
    if (c <= -1) return W;
    if (c > 1) return 0.0;
    const double th = std::acos(c), period = 2 * std::numbers::pi;
    const double m = std::floor(W / period), r = W - m * period;
    return m * 2 * th + std::min(r, th) + std::max(0.0, r - (period - th));
}

} // namespace detail

inline TripletSummary triplet_cosine_poisson(double a, const LevyTriplet& L, double v0, double t) {
    detail::require(a > 0 && std::isfinite(a), "a must be > 0");
    validate(L);
    detail::require_time(t, "t");
    TripletSummary s;
    s.A_t = L.G * (t / 2 + std::sin(2 * a * t) / (4 * a));
    s.gamma_t = v0 * std::cos(a * t) + L.beta_drift * std::sin(a * t) / a;
    s.total_mass = L.lambda * t;
    s.nu_on = [a, t, lam = L.lambda](double l, double hi) {
        if (!(hi > l)) return 0.0;
        const double W = a * t;
        return lam / a * std::max(0.0, detail::cos_superlevel(l, W) - detail::cos_superlevel(hi, W));
    };
    return s;
}

struct NuGridOptions {
    int cells = 4096;   ///< grid cells on [0, t] used to bracket level crossings
};

namespace detail {

/// Sorted points in (0, t) where rho crosses any of `levels`, located by sign
/// change on the grid and refined by bracketing root search.
inline std::vector<double> level_crossings(const KernelSpec& kernel, std::vector<double> levels, double t, int cells) {
    std::vector<double> out;
    if (t <= 0) return out;
    std::vector<double> grid(cells + 1), val(cells + 1);
    for (int i = 0; i <= cells; ++i) {
        grid[i] = t * i / cells;
        val[i] = eval_kernel(kernel, grid[i]);
    }
    for (double c : levels) {
        if (!std::isfinite(c)) continue;
        for (int i = 0; i < cells; ++i) {
            const double f0 = val[i] - c, f1 = val[i + 1] - c;
            if (f0 == 0.0 && i > 0) {
                out.push_back(grid[i]);
            } else if (f0 * f1 < 0) {
                boost::uintmax_t iters = 200;
                auto r = boost::math::tools::toms748_solve([&](double u) { return eval_kernel(kernel, u) - c; },
                                                           grid[i], grid[i + 1], f0, f1,
                                                           boost::math::tools::eps_tolerance<double>(52), iters);
                out.push_back(0.5 * (r.first + r.second));
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace detail

/// lambda * Lebesgue{u in [0, t] : rho(u) in [l, hi)}: the jump measure of V(t)
/// for unit jumps, measured piecewise between the crossings of the two levels.
inline double nu_generic(const KernelSpec& kernel, double lambda, double t, double l, double hi,
                         NuGridOptions opt = {}) {
    validate(kernel);
    detail::require(lambda > 0, "lambda must be > 0");
    detail::require_time(t, "t");
    detail::require(opt.cells >= 1, "cells must be >= 1");
    if (!(hi > l) || t == 0) return 0.0;
    auto pts = detail::level_crossings(kernel, {l, hi}, t, opt.cells);
    pts.insert(pts.begin(), 0.0);
    pts.push_back(t);
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] <= pts[i]) continue;
        const double r = eval_kernel(kernel, 0.5 * (pts[i] + pts[i + 1]));
        if (r >= l && r < hi) len += pts[i + 1] - pts[i];
    }
    return lambda * len;
}

/// A_t = G int_0^t rho(u)^2 du.
inline double triplet_A_generic(const KernelSpec& kernel, double G, double t) {
    return G * variance_theoretical(kernel, 0.0, t);
}

/// gamma_t = v0 rho(t) + beta int_0^t rho(u) du
///           + lambda int_0^t rho(u) (1{|rho(u)| <= 1} - 1) du   (unit jumps, D = [-1, 1]).
inline double triplet_gamma_generic(const KernelSpec& kernel, const LevyTriplet& L, double v0, double t,
                                    NuGridOptions opt = {}) {
    validate(kernel);
    validate(L);
    detail::require_time(t, "t");
    double g = v0 * eval_kernel(kernel, t);
    if (t == 0) return g;
    auto pts = detail::level_crossings(kernel, {-1.0, 1.0}, t, opt.cells);
    auto sign = detail::sign_breaks(kernel, 0.0, 0.0, t);
    pts.insert(pts.end(), sign.begin(), sign.end());
    std::sort(pts.begin(), pts.end());
    quad::Options qo;
    qo.fail_abs = 1e-12;
    g += L.beta_drift * quad::integrate_pieces([&](double u) { return eval_kernel(kernel, u); }, 0.0, t, pts, qo);
    g -= L.lambda * quad::integrate_pieces(
                        [&](double u) {
                            const double r = eval_kernel(kernel, u);
                            return std::abs(r) > 1 ? r : 0.0;
                        },
                        0.0, t, pts, qo);
    return g;
}

inline TripletSummary triplet_generic(const KernelSpec& kernel, const LevyTriplet& L, double v0, double t,
                                      NuGridOptions opt = {}) {
    TripletSummary s;
    s.A_t = triplet_A_generic(kernel, L.G, t);
    s.gamma_t = triplet_gamma_generic(kernel, L, v0, t, opt);
    s.total_mass = L.lambda * t;
    s.nu_on = [kernel, lam = L.lambda, t, opt](double l, double hi) { return nu_generic(kernel, lam, t, l, hi, opt); };
    return s;
}

} // namespace gou
