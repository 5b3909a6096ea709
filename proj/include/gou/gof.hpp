#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "log.hpp"
#include "optim.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stable.hpp"
#include "stats.hpp"

namespace gou {

/// (x - mean) / sd with the n - 1 divisor.
struct MomentStandardization {};
/// (x - mu) / sigma with a known stable scale and location.
struct StableStandardization {
    double sigma = 1.0;
    double mu = 0.0;
};
using Standardization = std::variant<MomentStandardization, StableStandardization>;

/// Standardized values, sorted ascending.
inline std::vector<double> standardize(std::span<const double> x, const Standardization& mode = {}) {
    std::vector<double> y(x.begin(), x.end());
    if (std::holds_alternative<MomentStandardization>(mode)) {
        detail::require(y.size() >= 2, "moment standardization needs at least two values");
        const double m = mean(y), s = sample_sd(y);
        if (!(s > 0)) throw NumericFailure("standardize: sample standard deviation is zero");
        for (double& v : y) v = (v - m) / s;
    } else {
        const auto& st = std::get<StableStandardization>(mode);
        detail::require(st.sigma > 0, "sigma must be > 0");
        for (double& v : y) v = (v - st.mu) / st.sigma;
    }
    std::sort(y.begin(), y.end());
    return y;
}

using CdfFn = std::function<double(double)>;

namespace detail {

inline std::vector<double> apply_cdf(std::span<const double> y, const CdfFn& F) {
    std::vector<double> u(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) u[i] = F(y[i]);
    return u;
}

} // namespace detail

/// max_j max(u_j - (j-1)/n, j/n - u_j) for u_j = F(y_(j)).
inline double ks_from_probs(std::span<const double> u) {
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t j = 1; j <= u.size(); ++j) d = std::max({d, u[j - 1] - (j - 1) / n, j / n - u[j - 1]});
    return d;
}

/// -n - sum_j (2j - 1)/n [ln u_j + ln(1 - u_{n-j+1})]; probabilities at 0 or 1
/// are clamped to machine epsilon with a warning.
inline double ad_from_probs(std::span<const double> u) {
    const std::size_t n = u.size();
    constexpr double eps = std::numeric_limits<double>::epsilon();
    bool clamped = false;
    auto c = [&](double p) {
        if (p < eps || p > 1 - eps) clamped = true;
        return std::clamp(p, eps, 1 - eps);
    };
    double s = 0.0;
    for (std::size_t j = 1; j <= n; ++j)
        s += (2.0 * j - 1.0) / n * (std::log(c(u[j - 1])) + std::log1p(-c(u[n - j])));
    if (clamped) warn("ad_stat: fitted probabilities reached 0 or 1 and were clamped");
    return -static_cast<double>(n) - s;
}

/// sqrt(n) max_j |j/n - u_j| / (u_j (1 - u_j) + 1/n).
inline double mks_from_probs(std::span<const double> u) {
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t j = 1; j <= u.size(); ++j) {
        const double p = u[j - 1];
        d = std::max(d, std::abs(j / n - p) / (p * (1 - p) + 1 / n));
    }
    return std::sqrt(n) * d;
}

inline double ks_stat(std::span<const double> y, const CdfFn& F) { return ks_from_probs(detail::apply_cdf(y, F)); }
inline double ad_stat(std::span<const double> y, const CdfFn& F) { return ad_from_probs(detail::apply_cdf(y, F)); }
inline double mks_stat(std::span<const double> y, const CdfFn& F) { return mks_from_probs(detail::apply_cdf(y, F)); }

/// Quantile ratios phi1 = (q95 - q05) / (q75 - q25), phi2 = (q95 + q05 - 2 q50) / (q95 - q05).
struct McPhi {
    double phi1 = 0.0;
    double phi2 = 0.0;
};

inline McPhi mc_phi(std::span<const double> sorted) {
    detail::require(sorted.size() >= 20, "the quantile statistic needs at least 20 values");
    const double q05 = quantile_sorted(sorted, 0.05), q25 = quantile_sorted(sorted, 0.25);
    const double q50 = quantile_sorted(sorted, 0.50), q75 = quantile_sorted(sorted, 0.75);
    const double q95 = quantile_sorted(sorted, 0.95);
    if (!(q75 > q25) || !(q95 > q05)) throw NumericFailure("mc_stat: degenerate interquantile range");
    return {(q95 - q05) / (q75 - q25), (q95 + q05 - 2 * q50) / (q95 - q05)};
}

/// Mean phi1, phi2 over `draws` simulated S_alpha0(1, 0, 0) samples of size n;
/// draw i uses the stream derived from (seed, "mc-calibration", i).
inline McPhi mc_reference(double alpha0, std::size_t n, int draws, std::uint64_t seed, unsigned threads = 0) {
    detail::require(draws >= 1, "calibration draws must be >= 1");
    std::vector<McPhi> r(draws);
    const StableParams sp{alpha0, 1.0, 0.0, 0.0};
    parallel_for(draws, threads, [&](std::size_t i) {
        RandomStream rng = RandomStream::derive(seed, "mc-calibration", i);
        std::vector<double> x(n);
        for (double& v : x) v = sample_stable(sp, rng);
        std::sort(x.begin(), x.end());
        r[i] = mc_phi(x);
    });
    McPhi m;
    for (const auto& p : r) {
        m.phi1 += p.phi1 / draws;
        m.phi2 += p.phi2 / draws;
    }
    return m;
}

/// Deviations |phi_i - phi_i(alpha0)|.
struct McStat {
    double phi1_dev = 0.0;
    double phi2_dev = 0.0;
};

inline McStat mc_stat(std::span<const double> sorted, const McPhi& ref) {
    const McPhi p = mc_phi(sorted);
    return {std::abs(p.phi1 - ref.phi1), std::abs(p.phi2 - ref.phi2)};
}

inline McStat mc_stat(std::span<const double> sorted, double alpha0, int calibration_draws, std::uint64_t seed) {
    return mc_stat(sorted, mc_reference(alpha0, sorted.size(), calibration_draws, seed));
}

/// Statistic of a sorted standardized sample.
using StatFn = std::function<double(std::span<const double>)>;

/// p = (1 + #{b : T_b >= T_obs}) / (B + 1), where T_b is the statistic of an
/// S_alpha0(1, 0, 0) sample of the same size passed through the same
/// standardization (moment mode re-standardizes each draw; stable mode uses
/// the draw as is, since it is already standard). Draw b uses the stream
/// derived from (seed, "bootstrap", b).
inline double bootstrap_pvalue(const StatFn& stat, std::span<const double> raw, const Standardization& mode,
                               double alpha0, int n_boot, std::uint64_t seed, unsigned threads = 0,
                               double* observed = nullptr) {
    detail::require(n_boot >= 99, "bootstrap needs at least 99 draws");
    const double t_obs = stat(standardize(raw, mode));
    if (observed) *observed = t_obs;
    const StableParams sp{alpha0, 1.0, 0.0, 0.0};
    const bool moment = std::holds_alternative<MomentStandardization>(mode);
    std::vector<char> ge(n_boot, 0);
    parallel_for(n_boot, threads, [&](std::size_t b) {
        RandomStream rng = RandomStream::derive(seed, "bootstrap", b);
        std::vector<double> x(raw.size());
        for (double& v : x) v = sample_stable(sp, rng);
        const auto y = moment ? standardize(x, mode) : standardize(x, StableStandardization{});
        ge[b] = stat(y) >= t_obs;
    });
    const long count = std::count(ge.begin(), ge.end(), 1);
    return (1.0 + count) / (n_boot + 1.0);
}

struct GofResult {
    std::string name;
    double value = 0.0;
    double p_value = 1.0;
    double alpha0 = 2.0;
    int boots = 0;
};

struct GofOptions {
    std::vector<std::string> tests{"ks", "ad", "mks", "mc"};
    int boots = 999;
    int calibration_draws = 200;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    Standardization mode = MomentStandardization{};
};

/// Reference CDF of S_alpha0(1, 0, 0) for the EDF statistics: closed forms at
/// alpha0 in {1, 2}, otherwise an interpolation table.
inline CdfFn stable_reference_cdf(double alpha0) {
    const StableParams sp{alpha0, 1.0, 0.0, 0.0};
    validate(sp);
    if (alpha0 == 1.0 || alpha0 == 2.0) return [sp](double x) { return stable_cdf(sp, x); };
    auto table = std::make_shared<const StableCdfTable>(sp);
    return [table](double x) { return (*table)(x); };
}

/// Run the named tests ("ks", "ad", "mks", "mc"; "mc" yields mc-phi1 and mc-phi2).
inline std::vector<GofResult> run_gof(std::span<const double> raw, double alpha0, const GofOptions& opt) {
    const CdfFn F = stable_reference_cdf(alpha0);
    std::vector<std::pair<std::string, StatFn>> stats;
    for (const auto& t : opt.tests) {
        if (t == "ks") {
            stats.emplace_back("ks", [F](std::span<const double> y) { return ks_stat(y, F); });
        } else if (t == "ad") {
            stats.emplace_back("ad", [F](std::span<const double> y) { return ad_stat(y, F); });
        } else if (t == "mks") {
            stats.emplace_back("mks", [F](std::span<const double> y) { return mks_stat(y, F); });
        } else if (t == "mc") {
            const McPhi ref = mc_reference(alpha0, raw.size(), opt.calibration_draws,
                                           derive_seed(opt.seed, "mc-reference", 0), opt.threads);
            stats.emplace_back("mc-phi1", [ref](std::span<const double> y) { return mc_stat(y, ref).phi1_dev; });
            stats.emplace_back("mc-phi2", [ref](std::span<const double> y) { return mc_stat(y, ref).phi2_dev; });
        } else {
            throw InvalidArgument("unknown test '" + t + "'");
        }
    }
    std::vector<GofResult> out;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        GofResult r;
        r.name = stats[i].first;
        r.alpha0 = alpha0;
        r.boots = opt.boots;
        r.p_value = bootstrap_pvalue(stats[i].second, raw, opt.mode, alpha0, opt.boots,
                                     derive_seed(opt.seed, "gof-" + r.name, 0), opt.threads, &r.value);
        out.push_back(r);
    }
    return out;
}

/// Maximum-likelihood S_alpha(sigma, 0, mu) fit of an i.i.d. sample, used to
/// plug an estimated alpha into the tests.
inline StableParams fit_symmetric_stable(std::span<const double> x) {
    detail::require(x.size() >= 10, "fit needs at least 10 values");
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const double med = quantile_sorted(s, 0.5);
    const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
    if (!(iqr > 0)) throw NumericFailure("fit_symmetric_stable: zero interquartile range");
    std::optional<StableDensity> dens;
    auto to_p = [](const std::vector<double>& u) {
        return StableParams{2.0 / (1.0 + std::exp(-u[0])), std::exp(u[1]), 0.0, u[2]};
    };
    auto nll = [&](const std::vector<double>& u) {
        const StableParams p = to_p(u);
        if (!(p.alpha > 0.1)) return HUGE_VAL;
        try {
            if (!dens || dens->params().alpha != p.alpha) dens.emplace(StableParams{p.alpha, 1.0, 0.0, 0.0});
            double f = static_cast<double>(x.size()) * std::log(p.sigma);
            for (double v : x) f -= std::log((*dens)((v - p.mu) / p.sigma));
            return f;
        } catch (const NumericFailure&) {
            return HUGE_VAL;
        }
    };
    // IQR of S_alpha(1) is about 1.35 sqrt(2) at alpha = 2 and 2 at alpha = 1
    const std::vector<double> u0{std::log(1.5 / 0.5), std::log(iqr / 1.7), med};
    NelderMeadOptions o;
    o.steps = {0.3, 0.2, 0.1 * iqr};
    o.ftol = 1e-10;
    o.xtol = 1e-6;
    const auto r = nelder_mead(nll, u0, o);
    if (!r.converged) warn("fit_symmetric_stable: simplex stopped before convergence");
    return to_p(r.x);
}

} // namespace gou
