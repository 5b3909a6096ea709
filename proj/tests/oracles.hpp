#pragma once

// Reference computations for the tests. Nothing here calls into the library's
// quadrature or series code.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

/// n-point Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = z;
        w[i] = 2 / ((1 - z * z) * dp * dp);
    }
    return {x, w};
}

/// Composite Gauss-Legendre over consecutive panels [edges[i], edges[i+1]].
template <class F>
double gl_panels(F&& f, const std::vector<double>& edges, int order = 20) {
    static const auto rule = gauss_legendre(20);
    const auto& [x, w] = order == 20 ? rule : gauss_legendre(order);
    double s = 0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double c = 0.5 * (edges[p] + edges[p + 1]), h = 0.5 * (edges[p + 1] - edges[p]);
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * h * f(c + h * x[i]);
    }
    return s;
}

/// Uniform composite rule on [a, b].
template <class F>
double gl(F&& f, double a, double b, int panels = 200) {
    std::vector<double> e(panels + 1);
    for (int i = 0; i <= panels; ++i) e[i] = a + (b - a) * i / panels;
    return gl_panels(f, e);
}

/// Panels graded geometrically towards 0 on [0, 1], then uniform of width `width` up to `upper`.
inline std::vector<double> graded_edges(double upper, double width) {
    std::vector<double> e{0.0};
    for (double u = 1e-12; u < std::min(1.0, upper); u *= 2) e.push_back(u);
    for (double u = e.back() + width; u < upper; u += width) e.push_back(u);
    e.push_back(upper);
    return e;
}

/// Symmetric stable density (1 / pi) int_0^inf exp(-(sigma t)^alpha) cos(t (x - mu)) dt.
inline double stable_pdf_fourier(double alpha, double sigma, double mu, double x) {
    const double z = std::abs(x - mu) / sigma;
    const double upper = std::pow(50.0, 1.0 / alpha);
    const double width = std::min(0.25, 0.5 / std::max(z, 1.0));
    const double v = gl_panels([&](double t) { return std::exp(-std::pow(t, alpha)) * std::cos(t * z); },
                               graded_edges(upper, width));
    return v / (std::numbers::pi * sigma);
}

/// Symmetric stable CDF 1/2 + (1/pi) int_0^inf exp(-t^alpha) sin(t z) / t dt.
inline double stable_cdf_fourier(double alpha, double sigma, double mu, double x) {
    const double z = (x - mu) / sigma;
    const double upper = std::pow(50.0, 1.0 / alpha);
    const double width = std::min(0.25, 0.5 / std::max(std::abs(z), 1.0));
    const double v = gl_panels(
        [&](double t) { return t == 0 ? z : std::exp(-std::pow(t, alpha)) * std::sin(t * z) / t; },
        graded_edges(upper, width));
    return 0.5 + v / std::numbers::pi;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace oracle

namespace oracle {

/// Stable density for S_alpha(1, beta, 0) (alpha != 1):
/// (1 / pi) int_0^inf exp(-t^alpha) cos(t^alpha beta tan(pi alpha / 2) - t z) dt.
inline double stable_pdf_fourier_skew(double alpha, double beta, double z) {
    const double b = beta * std::tan(std::numbers::pi * alpha / 2);
    const double upper = std::pow(50.0, 1.0 / alpha);
    const double width = std::min(0.25, 0.5 / std::max(std::abs(z), 1.0));
    const double v = gl_panels(
        [&](double t) {
            const double ta = std::pow(t, alpha);
            return std::exp(-ta) * std::cos(ta * b - t * z);
        },
        graded_edges(upper, width));
    return v / std::numbers::pi;
}

/// Kolmogorov distance between a sample and a CDF.
template <class F>
double ks_distance(std::vector<double> x, F&& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = cdf(x[i]);
        d = std::max({d, u - i / n, (i + 1) / n - u});
    }
    return d;
}

} // namespace oracle
