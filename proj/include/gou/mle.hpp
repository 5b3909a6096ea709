#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "error.hpp"
#include "log.hpp"
#include "optim.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "simulate.hpp"
#include "stable.hpp"
#include "stats.hpp"

namespace gou {

/// Cosine-process parameters: stability index, innovation scale, frequency.
struct Eta {
    double alpha = 2.0;
    double sigma = 1.0;
    double a = 1.0;
};

struct EtaEstimate {
    double alpha_hat = 0.0;
    double sigma_eps_hat = 0.0;
    double a_hat = 0.0;
    double neg_log_lik = 0.0;
    bool converged = false;
    int iterations = 0;
    int evals = 0;
};

/// eps_k = V_{k+1} - 2 cos(ah) V_k + V_{k-1}, k = 1..n-2.
inline std::vector<double> cosine_residuals(std::span<const double> v, double h, double a) {
    detail::require(v.size() >= 3, "need at least three observations");
    detail::require(h > 0 && std::isfinite(h), "h must be > 0");
    detail::require(a > 0 && std::isfinite(a), "a must be > 0");
    const double c = 2.0 * std::cos(a * h);
    std::vector<double> e(v.size() - 2);
    for (std::size_t k = 1; k + 1 < v.size(); ++k) e[k - 1] = v[k + 1] - c * v[k] + v[k - 1];
    return e;
}

inline void validate(const Eta& eta) {
    detail::require(eta.alpha > 0 && eta.alpha <= 2, "alpha must lie in (0, 2]");
    detail::require(eta.sigma > 0 && std::isfinite(eta.sigma), "sigma must be > 0");
    detail::require(eta.a > 0 && std::isfinite(eta.a), "a must be > 0");
}

/// Conditional likelihood of a cosine path given its first two values. Keeps
/// the unit-scale density of the last alpha so that scale and frequency moves
/// do not rebuild series tables.
class CosineLikelihood {
public:
    CosineLikelihood(std::span<const double> v, double h) : v_(v.begin(), v.end()), h_(h) {
        detail::require(v_.size() >= 3, "need at least three observations");
        detail::require(h > 0 && std::isfinite(h), "h must be > 0");
        for (double x : v_) detail::require(std::isfinite(x), "observations must be finite");
    }

    std::span<const double> values() const { return v_; }
    double h() const { return h_; }

    double operator()(const Eta& eta) const {
        validate(eta);
        const auto e = cosine_residuals(v_, h_, eta.a);
        const double ls = std::log(eta.sigma);
        double nll = static_cast<double>(e.size()) * ls;
        if (eta.alpha == 2.0) {
            const double c = std::log(2.0 * std::sqrt(std::numbers::pi));
            for (double x : e) {
                const double z = x / eta.sigma;
                nll += 0.25 * z * z + c;
            }
            return nll;
        }
        if (eta.alpha == 1.0) {
            for (double x : e) {
                const double z = x / eta.sigma;
                nll += std::log(std::numbers::pi * (1.0 + z * z));
            }
            return nll;
        }
        const StableDensity& d = density(eta.alpha);
        for (std::size_t k = 0; k < e.size(); ++k) {
            double f;
            try {
                f = d(e[k] / eta.sigma);
            } catch (const NumericFailure& ex) {
                throw NumericFailure("likelihood: density failed at residual " + std::to_string(k + 1) + ": " + ex.what(),
                                     ex.partial());
            }
            nll -= std::log(f);
        }
        return nll;
    }

private:
    const StableDensity& density(double alpha) const {
        if (!dens_ || dens_->params().alpha != alpha) dens_.emplace(StableParams{alpha, 1.0, 0.0, 0.0});
        return *dens_;
    }

    std::vector<double> v_;
    double h_;
    mutable std::optional<StableDensity> dens_;
};

/// -sum_k ln f(eps_k; alpha, sigma, 0, 0).
inline double neg_log_likelihood(std::span<const double> v, double h, const Eta& eta) {
    return CosineLikelihood(v, h)(eta);
}

struct MleOptions {
    int grid_points = 32;              ///< frequencies on (0, pi/h) used to seed the search
    int starts = 2;                    ///< best distinct seeds refined by the simplex
    std::optional<double> fix_alpha;   ///< hold alpha fixed (e.g. 2 for a Gaussian fit)
    double alpha_start = 1.5;
    NelderMeadOptions simplex{1500, 1e-10, 1e-5, {}};
};

namespace detail {

inline double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Least-squares frequency: c = sum (V_{k+1} + V_{k-1}) V_k / sum V_k^2 = 2 cos(ah).
inline std::optional<double> ls_frequency(std::span<const double> v, double h) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 1; k + 1 < v.size(); ++k) {
        num += (v[k + 1] + v[k - 1]) * v[k];
        den += v[k] * v[k];
    }
    if (!(den > 0)) return std::nullopt;
    const double c = std::clamp(num / den / 2.0, -1.0, 1.0);
    const double a = std::acos(c) / h;
    if (!(a > 0 && a < std::numbers::pi / h)) return std::nullopt;
    return a;
}

inline double median_abs(std::vector<double> e) {
    for (double& x : e) x = std::abs(x);
    return quantile(std::move(e), 0.5);
}

} // namespace detail

/// Maximum-likelihood fit of (alpha, sigma, a) with a restricted to (0, pi/h).
/// Search coordinates: logit(alpha/2), log(sigma), logit(a h / pi). Seeds come
/// from a frequency grid, the least-squares frequency and `init`; the best
/// `starts` seeds are refined by Nelder-Mead and the best optimum returned. A
/// seed within one grid spacing of an optimum already found is skipped.
inline EtaEstimate fit_mle(std::span<const double> v, double h, std::optional<Eta> init = std::nullopt,
                           const MleOptions& opt = {}) {
    detail::require(v.size() >= 10, "fit needs at least 10 observations");
    detail::require(opt.grid_points >= 1 && opt.starts >= 1, "grid_points and starts must be >= 1");
    if (opt.fix_alpha) detail::require(*opt.fix_alpha > 0 && *opt.fix_alpha <= 2, "fixed alpha must lie in (0, 2]");
    CosineLikelihood lik(v, h);
    const double amax = std::numbers::pi / h;
    const bool free_alpha = !opt.fix_alpha;

    auto to_eta = [&](const std::vector<double>& u) {
        std::size_t i = 0;
        Eta e;
        e.alpha = free_alpha ? 2.0 * detail::logistic(u[i++]) : *opt.fix_alpha;
        e.sigma = std::exp(u[i++]);
        e.a = amax * detail::logistic(u[i]);
        return e;
    };
    auto to_u = [&](const Eta& e) {
        std::vector<double> u;
        if (free_alpha) u.push_back(detail::logit(std::clamp(e.alpha, 1e-6, 2 - 1e-9) / 2.0));
        u.push_back(std::log(e.sigma));
        u.push_back(detail::logit(std::clamp(e.a / amax, 1e-9, 1 - 1e-9)));
        return u;
    };
    auto objective = [&](const std::vector<double>& u) {
        const Eta e = to_eta(u);
        if (!(e.sigma > 0) || !(e.a > 0) || !(e.a < amax) || !(e.alpha > 0)) return HUGE_VAL;
        try {
            return lik(e);
        } catch (const NumericFailure&) {
            return HUGE_VAL;
        }
    };

    const double alpha0 = opt.fix_alpha.value_or(init ? init->alpha : opt.alpha_start);
    struct Seed {
        Eta eta;
        double f;
    };
    std::vector<Seed> seeds;
    auto add_seed = [&](double a, std::optional<double> sigma) {
        Eta e{alpha0, 1.0, a};
        const double s = sigma.value_or(detail::median_abs(cosine_residuals(v, h, a)));
        e.sigma = s > 0 && std::isfinite(s) ? s : 1e-3;
        seeds.push_back({e, objective(to_u(e))});
    };
    for (int i = 0; i < opt.grid_points; ++i) add_seed(amax * (i + 0.5) / opt.grid_points, std::nullopt);
    if (auto a = detail::ls_frequency(v, h)) add_seed(*a, std::nullopt);
    if (init) {
        detail::require(init->a > 0 && init->a < amax, "initial a must lie in (0, pi/h)");
        detail::require(init->sigma > 0, "initial sigma must be > 0");
        add_seed(init->a, init->sigma);
    }
    std::stable_sort(seeds.begin(), seeds.end(), [](const Seed& x, const Seed& y) { return x.f < y.f; });

    NelderMeadOptions nm = opt.simplex;
    if (nm.steps.empty()) {
        nm.steps = free_alpha ? std::vector<double>{0.3, 0.2, 0.05} : std::vector<double>{0.2, 0.05};
    }
    EtaEstimate best;
    best.neg_log_lik = HUGE_VAL;
    const double spacing = amax / opt.grid_points;
    // later seeds get a coarse search first and are refined only if they win
    NelderMeadOptions coarse = nm;
    coarse.ftol = std::max(nm.ftol, 1e-6);
    coarse.xtol = std::max(nm.xtol, 1e-2);
    coarse.max_evals = std::min(nm.max_evals, 300);
    std::vector<double> found;
    for (std::size_t r = 0; r < seeds.size() && static_cast<int>(found.size()) < opt.starts; ++r) {
        const double a0 = seeds[r].eta.a;
        if (std::any_of(found.begin(), found.end(), [&](double a) { return std::abs(a - a0) < spacing; })) continue;
        auto res = nelder_mead(objective, to_u(seeds[r].eta), found.empty() ? nm : coarse);
        best.iterations += res.iterations;
        best.evals += res.evals;
        if (!found.empty() && res.f < best.neg_log_lik) {
            res = nelder_mead(objective, res.x, nm);
            best.iterations += res.iterations;
            best.evals += res.evals;
        }
        found.push_back(to_eta(res.x).a);
        if (res.f < best.neg_log_lik) {
            const Eta e = to_eta(res.x);
            best.alpha_hat = e.alpha;
            best.sigma_eps_hat = e.sigma;
            best.a_hat = e.a;
            best.neg_log_lik = res.f;
            best.converged = res.converged;
        }
    }
    if (!best.converged) warn("fit_mle: simplex stopped before convergence; returning best point found");
    return best;
}

struct StudyConfig {
    double alpha = 2.0;
    double a = 1.0;
    std::size_t n = 2000;
    double h = 1.0;
    int replications = 50;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    MleOptions mle;
};

struct ParamSummary {
    double truth = 0.0;
    double mean = 0.0;
    double bias = 0.0;     ///< truth - mean
    double se = 0.0;       ///< sample SD of the estimates
    double lower = 0.0;    ///< 2.5% empirical quantile
    double upper = 0.0;    ///< 97.5% empirical quantile
};

struct StudyReport {
    ParamSummary alpha, sigma, a;
    int used = 0;
    int failed = 0;
    int not_converged = 0;
    std::vector<EtaEstimate> estimates;   ///< by replication; failed ones have neg_log_lik = NaN
};

inline ParamSummary summarize_param(double truth, std::vector<double> x) {
    ParamSummary s;
    s.truth = truth;
    if (x.empty()) {
        s.mean = s.bias = s.se = s.lower = s.upper = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    std::sort(x.begin(), x.end());
    s.mean = mean(x);
    s.bias = truth - s.mean;
    s.se = x.size() >= 2 ? sample_sd(x) : 0.0;
    s.lower = quantile_sorted(x, 0.025);
    s.upper = quantile_sorted(x, 0.975);
    return s;
}

/// Simulate-and-fit replications of the cosine process (start V(0) = V(h) = 0).
/// Replication i uses the stream derived from (seed, "study", i).
inline StudyReport run_study(const StudyConfig& cfg) {
    detail::require(cfg.replications >= 2, "study needs at least 2 replications");
    detail::require(cfg.n >= 10, "study needs n >= 10");
    StudyReport rep;
    rep.estimates.resize(cfg.replications);
    std::vector<char> ok(cfg.replications, 0);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t i) {
        RandomStream rng = RandomStream::derive(cfg.seed, "study", i);
        try {
            const Path p = simulate_cosine(cfg.a, cfg.alpha, cfg.h, cfg.n, {}, rng);
            rep.estimates[i] = fit_mle(p.values, cfg.h, std::nullopt, cfg.mle);
            ok[i] = std::isfinite(rep.estimates[i].neg_log_lik);
        } catch (const NumericFailure&) {
            ok[i] = 0;
        }
        if (!ok[i]) rep.estimates[i].neg_log_lik = std::numeric_limits<double>::quiet_NaN();
    });
    std::vector<double> al, si, aa;
    for (int i = 0; i < cfg.replications; ++i) {
        if (!ok[i]) {
            ++rep.failed;
            continue;
        }
        const auto& e = rep.estimates[i];
        if (!e.converged) ++rep.not_converged;
        al.push_back(e.alpha_hat);
        si.push_back(e.sigma_eps_hat);
        aa.push_back(e.a_hat);
    }
    rep.used = static_cast<int>(al.size());
    rep.alpha = summarize_param(cfg.alpha, al);
    rep.sigma = summarize_param(sigma_eps_cosine(cfg.alpha, cfg.a, cfg.h), si);
    rep.a = summarize_param(cfg.a, aa);
    return rep;
}

} // namespace gou
