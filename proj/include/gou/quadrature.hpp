#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"

namespace gou::quad {

struct Options {
    double rel_tol = 1e-13;
    double abs_tol = 0.0;
    int max_intervals = 2000;
    /// Final error estimates above max(fail_rel * |I|, fail_abs) raise NumericFailure.
    double fail_rel = 1e-7;
    double fail_abs = 1e-14;
};

namespace detail {

struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
};

/// 15/31-point Gauss-Kronrod pair on [a, b] (nodes and weights from Boost.Math)
/// with the QUADPACK error heuristic.
template <class F>
Piece gk31(F& f, double a, double b) {
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    using g = boost::math::quadrature::gauss<double, 15>;
    const auto& x = gk::abscissa();
    const auto& wk = gk::weights();
    const auto& wg = g::weights();
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    std::array<double, 31> fv;
    fv[0] = f(c);
    double k = fv[0] * wk[0];
    double gsum = fv[0] * wg[0];   // 15-point Gauss rule shares the centre node
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double fp = f(c + r * x[i]);
        const double fm = f(c - r * x[i]);
        fv[2 * i - 1] = fp;
        fv[2 * i] = fm;
        k += (fp + fm) * wk[i];
        if (i % 2 == 0) gsum += (fp + fm) * wg[i / 2];
    }
    const double mean = 0.5 * k;
    double resabs = std::abs(fv[0]) * wk[0], resasc = std::abs(fv[0] - mean) * wk[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        resabs += (std::abs(fv[2 * i - 1]) + std::abs(fv[2 * i])) * wk[i];
        resasc += (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean)) * wk[i];
    }
    const double ar = std::abs(r);
    double err = std::abs(k - gsum) * ar;
    resabs *= ar;
    resasc *= ar;
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(50 * eps * resabs, err);
    return {a, b, k * r, err};
}

} // namespace detail

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

/// Globally adaptive Gauss-Kronrod on a finite interval [a, b]: bisect the
/// piece with the largest error until error <= max(abs_tol, rel_tol * |I|).
/// Returns the estimate without judging it.
template <class F>
Estimate adapt(F& f, double a, double b, const Options& opt) {
    if (a == b) return {};
    gou::detail::require(std::isfinite(a) && std::isfinite(b), "integration limits must be finite");
    std::priority_queue<detail::Piece> heap;
    auto first = detail::gk31(f, a, b);
    double value = first.value, error = first.error;
    heap.push(first);
    int count = 1;
    while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value)) && count < opt.max_intervals) {
        const auto p = heap.top();
        heap.pop();
        const double mid = 0.5 * (p.a + p.b);
        if (mid == p.a || mid == p.b) {   // cannot split further
            heap.push(p);
            break;
        }
        const auto l = detail::gk31(f, p.a, mid);
        const auto r = detail::gk31(f, mid, p.b);
        value += l.value + r.value - p.value;
        error += l.error + r.error - p.error;
        heap.push(l);
        heap.push(r);
        ++count;
    }
    // re-add from the pieces to shed rounding in the running sums
    Estimate e;
    while (!heap.empty()) {
        e.value += heap.top().value;
        e.error += heap.top().error;
        heap.pop();
    }
    return e;
}

inline void check(const Estimate& e, double a, double b, const Options& opt) {
    if (!std::isfinite(e.value) || e.error > std::max(opt.fail_rel * std::abs(e.value), opt.fail_abs))
        throw NumericFailure("quadrature did not converge on [" + gou::detail::sci(a) + ", " + gou::detail::sci(b) +
                                 "]: value " + gou::detail::sci(e.value) + ", error estimate " +
                                 gou::detail::sci(e.error),
                             e.value);
}

/// Adaptive integral over a finite interval; throws NumericFailure when the
/// error estimate stays above the failure threshold.
template <class F>
double integrate(F&& f, double a, double b, const Options& opt = {}) {
    const auto e = adapt(f, a, b, opt);
    check(e, a, b, opt);
    return e.value;
}

/// Integrate over [a, b] split at the breakpoints that fall inside; use for
/// kinks, cusps and oscillation. Tolerances apply to the total: a coarse pass
/// sizes the integral, and each piece then gets an absolute share.
template <class F>
double integrate_pieces(F&& f, double a, double b, std::vector<double> breaks, const Options& opt = {}) {
    if (a == b) return 0.0;
    const double sign = a < b ? 1.0 : -1.0;
    if (a > b) std::swap(a, b);
    std::erase_if(breaks, [&](double x) { return !(x > a && x < b); });
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const std::size_t n = breaks.size() - 1;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(detail::gk31(f, breaks[i], breaks[i + 1]).value);
    Options piece = opt;
    piece.abs_tol = std::max(opt.abs_tol, opt.rel_tol * scale) / static_cast<double>(n);
    Estimate total;
    for (std::size_t i = 0; i < n; ++i) {
        const auto e = adapt(f, breaks[i], breaks[i + 1], piece);
        total.value += e.value;
        total.error += e.error;
    }
    Options judge = opt;
    judge.fail_abs = std::max(opt.fail_abs, opt.fail_rel * scale);
    check(total, a, b, judge);
    return sign * total.value;
}

/// Integral over [a, inf) via u = a + t / (1 - t).
template <class F>
double integrate_to_inf(F&& f, double a, const Options& opt = {}) {
    auto g = [&](double t) {
        const double s = 1.0 - t;
        const double v = f(a + t / s);
        return v == 0.0 ? 0.0 : v / (s * s);
    };
    return integrate(g, 0.0, 1.0, opt);
}

/// Points in (a, b) where cos(w*u + phase) vanishes, i.e. w*u + phase = pi/2 + k*pi.
inline std::vector<double> cos_zeros(double w, double phase, double a, double b) {
    std::vector<double> out;
    if (w == 0.0) return out;
    const double pi = 3.141592653589793238462643383279502884;
    const double lo = std::min(w * a + phase, w * b + phase);
    const double hi = std::max(w * a + phase, w * b + phase);
    for (double k = std::ceil((lo - pi / 2) / pi); pi / 2 + k * pi < hi; k += 1.0) {
        const double u = (pi / 2 + k * pi - phase) / w;
        if (u > std::min(a, b) && u < std::max(a, b)) out.push_back(u);
    }
    return out;
}

} // namespace gou::quad
