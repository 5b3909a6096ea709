#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "error.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"

namespace gou {

namespace detail {

/// Points in (lo, hi) where rho(shift - u) changes sign; only the cosine kernel has any.
inline std::vector<double> sign_breaks(const KernelSpec& k, double shift, double lo, double hi) {
    if (const auto* c = std::get_if<Cosine>(&k)) return quad::cos_zeros(-c->a, c->a * shift, lo, hi);
    return {};
}

inline void require_time(double t, const char* what) {
    require(std::isfinite(t) && t >= 0, std::string(what) + " must be a finite value >= 0");
}

} // namespace detail

/// Cov(V(t), V(t+h)) for Gaussian noise with Var V0 = sigma0_sq:
///   sigma0_sq rho(t) rho(t+h) + int_0^t rho(u) rho(u+h) du.
inline double acf_theoretical(const KernelSpec& kernel, double sigma0_sq, double t, double h) {
    validate(kernel);
    detail::require(sigma0_sq >= 0, "sigma0_sq must be >= 0");
    detail::require_time(t, "t");
    detail::require_time(h, "h");
    double v = sigma0_sq * eval_kernel(kernel, t) * eval_kernel(kernel, t + h);
    if (t > 0) {
        auto f = [&](double u) { return eval_kernel(kernel, u) * eval_kernel(kernel, u + h); };
        auto breaks = detail::sign_breaks(kernel, 0.0, 0.0, t);
        quad::Options opt;
        opt.fail_abs = 1e-12;
        v += quad::integrate_pieces(f, 0.0, t, breaks, opt);
    }
    return v;
}

inline double variance_theoretical(const KernelSpec& kernel, double sigma0_sq, double t) {
    return acf_theoretical(kernel, sigma0_sq, t, 0.0);
}

/// gamma(0, t+h) gamma(t, t) - gamma(0, t) gamma(t, t+h): zero for every (t, h)
/// exactly when the Gaussian process is Markov.
inline double markov_residual(const KernelSpec& kernel, double sigma0_sq, double t, double h) {
    return acf_theoretical(kernel, sigma0_sq, 0.0, t + h) * acf_theoretical(kernel, sigma0_sq, t, 0.0) -
           acf_theoretical(kernel, sigma0_sq, 0.0, t) * acf_theoretical(kernel, sigma0_sq, t, h);
}

/// Codifference tau(s; k, t) = ln E e^{is(V(t+k) - V(t))} - ln E e^{isV(t+k)} - ln E e^{-isV(t)}
/// of a process driven by symmetric alpha-stable motion with V0 = 0; k and t in time units.
inline double codiff_theoretical(const KernelSpec& kernel, double alpha, double s, double k, double t) {
    validate(kernel);
    detail::require(alpha > 1 && alpha <= 2, "alpha must lie in (1, 2]");
    detail::require(std::isfinite(s), "s must be finite");
    detail::require_time(k, "lag k");
    detail::require_time(t, "t");
    const double tk = t + k;
    auto pw = [&](double x) { return std::pow(std::abs(x), alpha); };
    auto rho = [&](double x) { return eval_kernel(kernel, x); };
    quad::Options opt;
    opt.fail_abs = 1e-12;
    auto integral = [&](auto f, double lo, double hi, std::vector<double> breaks) {
        return hi > lo ? quad::integrate_pieces(f, lo, hi, breaks, opt) : 0.0;
    };

    // kinks of |rho(t+k-u) - rho(t-u)|: for the cosine kernel the difference is
    // -2 sin(a k / 2) sin(a (t + k/2 - u)), zero where a (t + k/2 - u) = m pi
    std::vector<double> diff_breaks;
    if (const auto* c = std::get_if<Cosine>(&kernel))
        diff_breaks = quad::cos_zeros(-c->a, c->a * (t + k / 2) - std::numbers::pi / 2, 0.0, t);
    const double i1 = integral([&](double u) { return pw(rho(tk - u) - rho(t - u)); }, 0.0, t, diff_breaks);
    const double i2 = integral([&](double u) { return pw(rho(tk - u)); }, t, tk, detail::sign_breaks(kernel, tk, t, tk));
    const double i3 = integral([&](double u) { return pw(rho(tk - u)); }, 0.0, tk, detail::sign_breaks(kernel, tk, 0.0, tk));
    const double i4 = integral([&](double u) { return pw(rho(t - u)); }, 0.0, t, detail::sign_breaks(kernel, t, 0.0, t));
    return std::pow(std::abs(s), alpha) * (i3 + i4 - i1 - i2);
}

inline double codiff_theoretical_cosine(double a, double alpha, double s, double k, double t) {
    return codiff_theoretical(Cosine{a}, alpha, s, k, t);
}

/// tau(s; k, t) / tau(s; 0, t).
inline double codiff_theoretical_normalized(const KernelSpec& kernel, double alpha, double s, double k, double t) {
    const double c0 = codiff_theoretical(kernel, alpha, s, 0.0, t);
    detail::require(c0 != 0.0, "codifference at lag 0 vanishes");
    return codiff_theoretical(kernel, alpha, s, k, t) / c0;
}

struct CodiffValue {
    double real = 0.0;
    double imag = 0.0;   ///< diagnostic; zero in expectation for symmetric laws
};

/// Sample codifference at lag k (in samples): sqrt((n-k)/n) [ln m1 - ln m2 - ln m3]
/// with m1 = mean e^{is(V_{j+k} - V_j)}, m2 = mean e^{isV_{j+k}}, m3 = mean e^{-isV_j},
/// j = 0..n-k-1, principal-branch logarithms.
inline CodiffValue codiff_empirical(std::span<const double> v, double s, std::size_t k) {
    const std::size_t n = v.size();
    detail::require(k < n, "lag must be smaller than the series length");
    detail::require(std::isfinite(s), "s must be finite");
    const std::size_t m = n - k;
    std::complex<double> m1, m2, m3;
    for (std::size_t j = 0; j < m; ++j) {
        m1 += std::polar(1.0, s * (v[j + k] - v[j]));
        m2 += std::polar(1.0, s * v[j + k]);
        m3 += std::polar(1.0, -s * v[j]);
    }
    m1 /= double(m);
    m2 /= double(m);
    m3 /= double(m);
    for (auto z : {m1, m2, m3})
        if (std::abs(z) < 1e-12)
            throw NumericFailure("codifference: empirical characteristic function vanishes, log undefined");
    const auto tau = std::sqrt(double(m) / double(n)) * (std::log(m1) - std::log(m2) - std::log(m3));
    return {tau.real(), tau.imag()};
}

/// Real part of tau(s; k) / tau(s; 0).
inline double codiff_empirical_normalized(std::span<const double> v, double s, std::size_t k) {
    const double c0 = codiff_empirical(v, s, 0).real;
    detail::require(c0 != 0.0, "codifference at lag 0 vanishes");
    return codiff_empirical(v, s, k).real / c0;
}

} // namespace gou
