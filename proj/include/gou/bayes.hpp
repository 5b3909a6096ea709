#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "log.hpp"
#include "mle.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace gou {

/// alpha ~ U[0, 2], a ~ U[0, a_max], sigma ~ Gamma(shape, rate).
struct PriorConfig {
    double alpha_max = 2.0;
    double a_max = 3.0;
    double gamma_shape = 1.0;
    double gamma_rate = 2.0;
};

inline double log_prior(const Eta& eta, const PriorConfig& pr = {}) {
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    if (!(eta.alpha > 0 && eta.alpha <= pr.alpha_max)) return ninf;
    if (!(eta.a > 0 && eta.a <= pr.a_max)) return ninf;
    if (!(eta.sigma > 0) || !std::isfinite(eta.sigma)) return ninf;
    const double k = pr.gamma_shape, r = pr.gamma_rate;
    return -std::log(pr.alpha_max) - std::log(pr.a_max) + k * std::log(r) - std::lgamma(k) +
           (k - 1) * std::log(eta.sigma) - r * eta.sigma;
}

/// log prior - NLL; -inf outside the support or when the density fails.
inline double log_posterior(const Eta& eta, const CosineLikelihood& lik, const PriorConfig& pr = {}) {
    const double lp = log_prior(eta, pr);
    if (!std::isfinite(lp)) return lp;
    try {
        return lp - lik(eta);
    } catch (const NumericFailure& e) {
        warn(std::string("log_posterior: ") + e.what());
        return -std::numeric_limits<double>::infinity();
    }
}

inline double log_posterior(const Eta& eta, std::span<const double> v, double h, const PriorConfig& pr = {}) {
    return log_posterior(eta, CosineLikelihood(v, h), pr);
}

namespace detail {

/// Fold x into [lo, hi] by reflection at the bounds (hi may be +inf).
inline double reflect(double x, double lo, double hi) {
    if (std::isinf(hi)) return x < lo ? 2 * lo - x : x;
    const double w = hi - lo;
    double y = std::fmod(x - lo, 2 * w);
    if (y < 0) y += 2 * w;
    return lo + (y <= w ? y : 2 * w - y);
}

} // namespace detail

struct MwgOptions {
    int n_iter = 30000;
    int burn_in = 10000;
    int thin = 10;
    bool adapt = true;          ///< tune scales during burn-in, then freeze them
    int adapt_every = 100;
    double accept_lo = 0.20, accept_hi = 0.45;
};

struct MwgResult {
    std::vector<std::vector<double>> chains;   ///< per coordinate, kept draws
    std::vector<double> acceptance;            ///< per coordinate, after burn-in
    std::vector<double> final_scales;
};

/// Random-walk Metropolis within Gibbs: each iteration updates the coordinates
/// in order with a Gaussian proposal reflected into [lo, hi]. `logp` takes the
/// state and the index of the coordinate just changed (-1 for the initial call).
template <class LogP>
MwgResult metropolis_within_gibbs(LogP&& logp, std::vector<double> x, const std::vector<double>& lo,
                                  const std::vector<double>& hi, std::vector<double> scales, const MwgOptions& opt,
                                  RandomStream& rng) {
    const std::size_t d = x.size();
    detail::require(d >= 1 && lo.size() == d && hi.size() == d && scales.size() == d, "dimension mismatch");
    detail::require(opt.n_iter > 0 && opt.burn_in >= 0 && opt.burn_in < opt.n_iter, "need 0 <= burn_in < n_iter");
    detail::require(opt.thin >= 1, "thin must be >= 1");
    for (std::size_t j = 0; j < d; ++j) {
        detail::require(scales[j] > 0, "proposal scales must be > 0");
        detail::require(x[j] >= lo[j] && x[j] <= hi[j], "initial state outside the bounds");
    }
    double cur = logp(x, -1);
    detail::require(std::isfinite(cur), "initial state has zero posterior density");

    MwgResult out;
    out.chains.assign(d, {});
    std::vector<long> acc(d, 0), batch(d, 0);
    for (int it = 0; it < opt.n_iter; ++it) {
        for (std::size_t j = 0; j < d; ++j) {
            const double old = x[j];
            x[j] = detail::reflect(old + scales[j] * rng.normal(), lo[j], hi[j]);
            const double prop = logp(x, static_cast<int>(j));
            const double u = rng.uniform();
            if (std::isfinite(prop) && std::log(u) < prop - cur) {
                cur = prop;
                ++batch[j];
                if (it >= opt.burn_in) ++acc[j];
            } else {
                x[j] = old;
            }
        }
        if (opt.adapt && it < opt.burn_in && (it + 1) % opt.adapt_every == 0) {
            for (std::size_t j = 0; j < d; ++j) {
                const double rate = double(batch[j]) / opt.adapt_every;
                if (rate < opt.accept_lo) scales[j] *= 0.8;
                if (rate > opt.accept_hi) scales[j] *= 1.25;
                batch[j] = 0;
            }
        }
        if (it >= opt.burn_in && (it - opt.burn_in) % opt.thin == 0)
            for (std::size_t j = 0; j < d; ++j) out.chains[j].push_back(x[j]);
    }
    const double kept = opt.n_iter - opt.burn_in;
    for (std::size_t j = 0; j < d; ++j) out.acceptance.push_back(acc[j] / kept);
    out.final_scales = scales;
    return out;
}

struct McmcConfig {
    int n_iter = 30000;
    int burn_in = 10000;
    int thin = 10;
    std::array<double, 3> proposal_scales{0.02, 0.02, 0.005};   ///< alpha, sigma, a
    std::optional<Eta> init;                                     ///< default: MLE fit
    std::uint64_t seed = 1;
    bool adapt = true;
    int chains = 1;
    unsigned threads = 0;
    PriorConfig prior;
};

struct ParamPosterior {
    double mean = 0.0;
    double sd = 0.0;          ///< posterior standard deviation
    double mc_se = 0.0;       ///< Monte Carlo standard error of the mean, sd / sqrt(ESS)
    double ess = 0.0;
    double lower = 0.0;       ///< 2.5% quantile
    double upper = 0.0;       ///< 97.5% quantile
    std::optional<double> truth;
    std::optional<double> bias;   ///< truth - mean
    double acceptance = 0.0;
};

struct PosteriorSummary {
    ParamPosterior alpha, sigma, a;
    bool all_rejected = false;
};

struct McmcResult {
    /// chains[c] holds the kept draws of chain c, one vector per parameter
    std::vector<std::array<std::vector<double>, 3>> chains;
    PosteriorSummary summary;
    Eta init;
};

struct ChainDiagnostics {
    std::vector<double> autocorrelation;   ///< lags 1..L
    double ess = 0.0;
    bool degenerate = false;               ///< constant chain
};

/// Sample autocorrelations (biased estimator, divisor N) and ESS with Geyer's
/// initial positive sequence: pairs rho_{2m} + rho_{2m+1} summed until the
/// first negative pair.
inline ChainDiagnostics chain_diagnostics(std::span<const double> x, int max_lag = 50) {
    detail::require(x.size() >= 10, "chain_diagnostics needs at least 10 draws");
    const std::size_t n = x.size();
    ChainDiagnostics d;
    const double m = mean(x);
    double c0 = 0.0;
    for (double v : x) c0 += (v - m) * (v - m);
    c0 /= n;
    if (!(c0 > 0)) {
        d.degenerate = true;
        d.ess = 0.0;
        d.autocorrelation.assign(std::min<std::size_t>(max_lag, n - 1), std::numeric_limits<double>::quiet_NaN());
        return d;
    }
    auto acf = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - m) * (x[i + lag] - m);
        return s / n / c0;
    };
    for (std::size_t l = 1; l <= std::min<std::size_t>(max_lag, n - 1); ++l) d.autocorrelation.push_back(acf(l));
    double tau = -1.0;   // 1 + 2 sum_{l>=1} rho_l  =  -1 + 2 sum_m (rho_{2m} + rho_{2m+1})
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        const double pair = (k == 0 ? 1.0 : acf(2 * k)) + acf(2 * k + 1);
        if (pair < 0) break;
        tau += 2 * pair;
    }
    d.ess = std::min(static_cast<double>(n), n / std::max(tau, 1e-12));
    return d;
}

inline std::string chain_trace_csv(const std::array<std::vector<double>, 3>& c, int thin = 1, int offset = 0) {
    std::string s = "iter,alpha,sigma,a\n";
    char buf[128];
    for (std::size_t i = 0; i < c[0].size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", offset + static_cast<int>(i) * thin, c[0][i], c[1][i],
                      c[2][i]);
        s += buf;
    }
    return s;
}

/// Posterior sampling for the cosine process; chain c uses the stream derived
/// from (seed, "mcmc", c). Summaries pool the chains in index order.
inline McmcResult mcmc_sample(std::span<const double> v, double h, const McmcConfig& cfg,
                              std::optional<Eta> truth = std::nullopt) {
    detail::require(!v.empty(), "no data");
    detail::require(v.size() >= 10, "need at least 10 observations");
    detail::require(cfg.chains >= 1, "chains must be >= 1");
    McmcResult res;
    res.init = cfg.init ? *cfg.init : [&] {
        const auto e = fit_mle(v, h);
        return Eta{e.alpha_hat, e.sigma_eps_hat, e.a_hat};
    }();
    res.init.alpha = std::min(res.init.alpha, cfg.prior.alpha_max);
    res.init.a = std::min(res.init.a, cfg.prior.a_max);
    res.chains.resize(cfg.chains);
    std::vector<MwgResult> raw(cfg.chains);
    MwgOptions mo;
    mo.n_iter = cfg.n_iter;
    mo.burn_in = cfg.burn_in;
    mo.thin = cfg.thin;
    mo.adapt = cfg.adapt;
    parallel_for(cfg.chains, cfg.threads, [&](std::size_t c) {
        RandomStream rng = RandomStream::derive(cfg.seed, "mcmc", c);
        CosineLikelihood lik(v, h);
        auto logp = [&](const std::vector<double>& x, int) { return log_posterior({x[0], x[1], x[2]}, lik, cfg.prior); };
        const std::vector<double> lo{0.0, 0.0, 0.0};
        const std::vector<double> hi{cfg.prior.alpha_max, std::numeric_limits<double>::infinity(), cfg.prior.a_max};
        raw[c] = metropolis_within_gibbs(logp, {res.init.alpha, res.init.sigma, res.init.a}, lo, hi,
                                         {cfg.proposal_scales.begin(), cfg.proposal_scales.end()}, mo, rng);
        for (int j = 0; j < 3; ++j) res.chains[c][j] = std::move(raw[c].chains[j]);
    });

    ParamPosterior* out[3] = {&res.summary.alpha, &res.summary.sigma, &res.summary.a};
    const std::optional<double> tv[3] = {truth ? std::optional(truth->alpha) : std::nullopt,
                                         truth ? std::optional(truth->sigma) : std::nullopt,
                                         truth ? std::optional(truth->a) : std::nullopt};
    bool all_rejected = true;
    for (int j = 0; j < 3; ++j) {
        std::vector<double> pooled;
        double ess = 0.0, acc = 0.0;
        for (int c = 0; c < cfg.chains; ++c) {
            const auto& ch = res.chains[c][j];
            pooled.insert(pooled.end(), ch.begin(), ch.end());
            if (ch.size() >= 10) ess += chain_diagnostics(ch).ess;
            acc += raw[c].acceptance[j] / cfg.chains;
        }
        ParamPosterior& p = *out[j];
        p.acceptance = acc;
        if (acc > 0) all_rejected = false;
        std::sort(pooled.begin(), pooled.end());
        p.mean = mean(pooled);
        p.sd = pooled.size() >= 2 ? sample_sd(pooled) : 0.0;
        p.ess = ess;
        p.mc_se = ess > 0 ? p.sd / std::sqrt(ess) : std::numeric_limits<double>::quiet_NaN();
        p.lower = quantile_sorted(pooled, 0.025);
        p.upper = quantile_sorted(pooled, 0.975);
        p.truth = tv[j];
        if (tv[j]) p.bias = *tv[j] - p.mean;
    }
    res.summary.all_rejected = all_rejected;
    if (all_rejected) warn("mcmc_sample: every proposal was rejected");
    return res;
}

} // namespace gou
