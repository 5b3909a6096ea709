#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "error.hpp"

namespace gou {

struct NelderMeadOptions {
    int max_evals = 2000;
    double ftol = 1e-10;           ///< spread of simplex values, relative to 1 + |f_best|
    double xtol = 1e-8;            ///< simplex diameter in the search coordinates
    std::vector<double> steps;     ///< initial edge per coordinate; default 0.1
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    int evals = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;   ///< best value after each iteration
};

/// Nelder-Mead simplex (standard coefficients 1, 2, 1/2, 1/2). Non-finite
/// values are treated as +inf, so the objective may reject points that way.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const NelderMeadOptions& opt = {}) {
    const std::size_t d = x0.size();
    detail::require(d >= 1, "nelder_mead needs at least one coordinate");
    detail::require(opt.steps.empty() || opt.steps.size() == d, "steps must match the dimension");
    NelderMeadResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    std::vector<std::vector<double>> s(d + 1, x0);
    std::vector<double> fv(d + 1);
    for (std::size_t i = 0; i < d; ++i) s[i + 1][i] += opt.steps.empty() ? 0.1 : opt.steps[i];
    for (std::size_t i = 0; i <= d; ++i) fv[i] = eval(s[i]);

    std::vector<std::size_t> idx(d + 1);
    std::vector<double> c(d), xr(d), xe(d), xc(d);
    while (true) {
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return fv[i] < fv[j]; });
        const std::size_t best = idx[0], worst = idx[d], second = idx[d - 1];
        res.history.push_back(fv[best]);

        double diam = 0.0;
        for (std::size_t i = 0; i <= d; ++i)
            for (std::size_t j = 0; j < d; ++j) diam = std::max(diam, std::abs(s[i][j] - s[best][j]));
        const bool flat = std::isfinite(fv[worst]) && fv[worst] - fv[best] <= opt.ftol * (1 + std::abs(fv[best]));
        if (flat && diam <= opt.xtol) {
            res.converged = true;
            break;
        }
        if (res.evals >= opt.max_evals) break;
        ++res.iterations;

        std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t i = 0; i <= d; ++i)
            if (i != worst)
                for (std::size_t j = 0; j < d; ++j) c[j] += s[i][j] / d;
        for (std::size_t j = 0; j < d; ++j) xr[j] = c[j] + (c[j] - s[worst][j]);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            for (std::size_t j = 0; j < d; ++j) xe[j] = c[j] + 2 * (c[j] - s[worst][j]);
            const double fe = eval(xe);
            if (fe < fr) {
                s[worst] = xe;
                fv[worst] = fe;
            } else {
                s[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            s[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        // contraction, outside if the reflected point beat the worst
        const bool outside = fr < fv[worst];
        for (std::size_t j = 0; j < d; ++j)
            xc[j] = outside ? c[j] + 0.5 * (xr[j] - c[j]) : c[j] + 0.5 * (s[worst][j] - c[j]);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fv[worst])) {
            s[worst] = xc;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < d; ++j) s[i][j] = s[best][j] + 0.5 * (s[i][j] - s[best][j]);
            fv[i] = eval(s[i]);
        }
    }
    const auto b = std::min_element(fv.begin(), fv.end()) - fv.begin();
    res.x = s[b];
    res.f = fv[b];
    return res;
}

} // namespace gou
