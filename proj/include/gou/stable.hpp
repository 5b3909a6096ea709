#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <quadmath.h>

#include <boost/math/special_functions/sin_pi.hpp>
#include <boost/math/tools/roots.hpp>

#include "error.hpp"
#include "quadrature.hpp"
#include "rng.hpp"

namespace gou {

/// Stable law with characteristic function
///   exp(-sigma^a |t|^a (1 - i beta sgn(t) tan(pi a / 2)) + i mu t),  a != 1,
///   exp(-sigma |t| + i mu t),                                      a == 1 (beta = 0 only).
/// At alpha = 2 this is Gaussian with variance 2 sigma^2.
struct StableParams {
    double alpha = 2.0;
    double sigma = 1.0;
    double beta = 0.0;
    double mu = 0.0;
};

inline void validate(const StableParams& p) {
    detail::require(std::isfinite(p.alpha) && p.alpha > 0 && p.alpha <= 2, "stable alpha must lie in (0, 2]");
    detail::require(std::isfinite(p.sigma) && p.sigma > 0, "stable sigma must be > 0");
    detail::require(std::isfinite(p.beta) && std::abs(p.beta) <= 1, "stable beta must lie in [-1, 1]");
    detail::require(std::isfinite(p.mu), "stable mu must be finite");
    detail::require(!(p.alpha == 1 && p.beta != 0), "alpha = 1 with beta != 0 is not supported");
}

inline std::complex<double> stable_cf(const StableParams& p, double theta) {
    validate(p);
    const double st = std::pow(p.sigma * std::abs(theta), p.alpha);
    if (p.alpha == 1.0) return std::exp(std::complex<double>(-st, p.mu * theta));
    const double skew = p.alpha == 2.0 ? 0.0 : p.beta * std::tan(std::numbers::pi * p.alpha / 2);
    const double sgn = theta > 0 ? 1.0 : (theta < 0 ? -1.0 : 0.0);
    return std::exp(std::complex<double>(-st, st * skew * sgn + p.mu * theta));
}

namespace detail {

using quad_t = __float128;

inline quad_t quad_pi() {
    static const quad_t pi = 4 * atanq(1);
    return pi;
}

/// Skewness and scale in the form used by the series expansions.
struct SeriesForm {
    double beta_b;
    double scale;
};

inline SeriesForm series_form(const StableParams& p) {
    if (p.beta == 0.0) return {0.0, p.sigma};
    const double k = p.alpha < 1 ? p.alpha : p.alpha - 2.0;
    const double b = p.beta * std::tan(std::numbers::pi * p.alpha / 2);
    return {2.0 * std::atan(b) / (std::numbers::pi * k), p.sigma * std::pow(1.0 + b * b, 1.0 / (2.0 * p.alpha))};
}

struct SeriesResult {
    double value = 0.0;     // standardized density
    double error = 0.0;     // truncation plus rounding estimate
    int terms = 0;
    bool ok = false;
};

inline constexpr int series_budget = 500;

/// Which sum: in powers of |z| (central part for alpha > 1, small-|z| expansion
/// for alpha < 1) or in powers of |z|^{-alpha} (tails for alpha > 1, the
/// everywhere-convergent series for alpha < 1).
enum class SeriesKind { power, inverse };

/// Series for the standardized density f(z) (mu = 0, unit series scale) at a
/// fixed (alpha, beta_b). Coefficients are precomputed in double; a
/// quad-precision copy is built on first need.
class StableSeries {
public:
    StableSeries(double alpha, double beta_b) : alpha_(alpha), bb_(beta_b) {
        const double k = alpha < 1 ? alpha : alpha - 2.0;
        // Angles are pi * (nu + 1) * q for the upper side (z >= 0) and lower side.
        if (alpha > 1) {
            q_pow_[0] = (alpha + bb_ * k) / (2 * alpha);
            q_pow_[1] = (alpha - bb_ * k) / (2 * alpha);
        } else {
            q_pow_[0] = (1 - bb_) / 2;
            q_pow_[1] = (1 + bb_) / 2;
        }
        q_inv_[0] = (alpha + bb_ * k) / 2;
        q_inv_[1] = (alpha - bb_ * k) / 2;

        constexpr double eps = std::numeric_limits<double>::epsilon();
        for (int nu = 0; nu < series_budget; ++nu) {
            const double lf = std::lgamma(nu + 1.0);
            const double lp = std::lgamma((nu + 1.0) / alpha);
            const double li = std::lgamma((nu + 1.0) * alpha);
            pow_c_[nu] = std::exp(lp - lf);
            if (pow_len_ == series_budget && !std::isnormal(pow_c_[nu])) pow_len_ = nu;
            pow_err_[nu] = eps * (std::abs(lp) + std::abs(lf) + nu + 4);
            inv_c_[nu] = std::exp(li - lf);
            if (inv_len_ == series_budget && !std::isnormal(inv_c_[nu])) inv_len_ = nu;
            inv_err_[nu] = eps * (std::abs(li) + std::abs(lf) + nu + 4);
            for (int s = 0; s < 2; ++s) {
                pow_sin_[s][nu] = boost::math::sin_pi((nu + 1.0) * q_pow_[s]);
                inv_sin_[s][nu] = boost::math::sin_pi((nu + 1.0) * q_inv_[s]) * (nu % 2 ? -1.0 : 1.0);
            }
        }
    }

    double alpha() const { return alpha_; }
    double beta_b() const { return bb_; }

    bool asymptotic(SeriesKind kind) const { return (kind == SeriesKind::power) == (alpha_ < 1); }

    /// Evaluate at z; never throws. `tol` is the term-stopping tolerance,
    /// `target` the relative accuracy required for ok = true. Falls back to
    /// quad precision when double rounding is the only obstacle, unless
    /// `allow_quad` is false.
    SeriesResult eval(SeriesKind kind, double z, double tol, double target, bool allow_quad = true) const {
        Raw r = run<double>(kind, z, tol, target);
        if (r.ok || !r.needs_more_precision || !allow_quad) return r;
        return run<quad_t>(kind, z, tol, target);
    }

private:
    struct QuadTables {
        std::array<quad_t, series_budget> pow_c, inv_c;
        std::array<std::array<quad_t, series_budget>, 2> pow_sin, inv_sin;
    };

    struct Raw : SeriesResult {
        bool needs_more_precision = false;
    };

    /// Quad tables with at least `need` entries; filled in chunks, since most
    /// escalated sums stop long before the budget.
    const QuadTables& quad_tables(int need) const {
        if (quad_len_.load(std::memory_order_acquire) >= need) return *quad_;
        std::lock_guard lock(quad_mu_);
        if (!quad_) quad_ = std::make_unique<QuadTables>();
        int len = quad_len_.load(std::memory_order_relaxed);
        if (len >= need) return *quad_;
        const int upto = std::min(series_budget, std::max(need, len + quad_chunk));
        QuadTables& t = *quad_;
        const quad_t a = alpha_;
        for (int nu = len; nu < upto; ++nu) {
            const quad_t n1 = nu + 1;
            const quad_t lf = lgammaq(n1);
            t.pow_c[nu] = expq(lgammaq(n1 / a) - lf);
            t.inv_c[nu] = expq(lgammaq(n1 * a) - lf);
            for (int s = 0; s < 2; ++s) {
                t.pow_sin[s][nu] = sin_pi_q(n1 * quad_t(q_pow_[s]));
                t.inv_sin[s][nu] = sin_pi_q(n1 * quad_t(q_inv_[s])) * (nu % 2 ? -1 : 1);
            }
        }
        quad_len_.store(upto, std::memory_order_release);
        return t;
    }

    static quad_t sin_pi_q(quad_t x) {
        // reduce to (-1, 1] so integer and half-integer arguments come out exact
        quad_t r = fmodq(x, 2);
        if (r > 1) r -= 2;
        if (r <= -1) r += 2;
        if (r == 0 || r == 1) return 0;
        if (2 * r == 1) return 1;
        if (2 * r == -1) return -1;
        return sinq(quad_pi() * r);
    }

    static double mag(double x) { return std::abs(x); }
    static double mag(quad_t x) { return static_cast<double>(fabsq(x)); }

    template <class T>
    Raw run(SeriesKind kind, double z, double tol, double target) const {
        constexpr bool is_double = std::is_same_v<T, double>;
        const int side = z >= 0 ? 0 : 1;
        const double az = std::abs(z);
        const bool asym = asymptotic(kind);
        const bool inverse = kind == SeriesKind::inverse;
        Raw r;
        if (inverse && az == 0.0) return r;   // not defined at the origin

        const T* coef;
        const T* sinv;
        const double* cerr = inverse ? inv_err_.data() : pow_err_.data();
        int len = series_budget;
        double eps_scale = 1.0;
        if constexpr (is_double) {
            coef = inverse ? inv_c_.data() : pow_c_.data();
            sinv = inverse ? inv_sin_[side].data() : pow_sin_[side].data();
            len = inverse ? inv_len_ : pow_len_;
        } else {
            const auto& q = quad_tables(quad_chunk);
            coef = inverse ? q.inv_c.data() : q.pow_c.data();
            sinv = inverse ? q.inv_sin[side].data() : q.pow_sin[side].data();
            len = quad_chunk;
            eps_scale = 1e-34 / std::numeric_limits<double>::epsilon();
        }

        // term_nu = coef_nu * sin_nu * m_nu,  m_{nu+1} = m_nu * step
        T step, m;
        if (inverse) {
            if constexpr (is_double)
                step = std::pow(az, -alpha_);
            else
                step = powq(T(az), -T(alpha_));
            m = step;
        } else {
            step = T(alpha_ > 1 ? -az : az);
            m = 1;
        }

        T sum = 0;
        double round = 0.0, prev_env = std::numeric_limits<double>::infinity();
        bool converged = false, overflow = false;
        int nu = 0;
        for (; nu < series_budget; ++nu) {
            if (nu >= len) {
                if constexpr (is_double) {
                    overflow = true;   // coefficient not representable in double
                    break;
                } else {
                    quad_tables(nu + 1);
                    len = quad_len_.load(std::memory_order_acquire);
                }
            }
            const T t = coef[nu] * m;
            const double env = mag(t);
            if (!std::isfinite(env)) {
                overflow = true;
                break;
            }
            // a diverging asymptotic series stops at its smallest term
            if (asym && nu > 0 && env > prev_env) break;
            sum += t * sinv[nu];
            round += env * cerr[nu] * eps_scale;
            prev_env = env;
            if (nu > 0 && env <= tol * mag(sum)) {
                converged = true;
                ++nu;
                break;
            }
            m *= step;
        }
        const double asum = mag(sum);
        const double pre = inverse ? alpha_ / (std::numbers::pi * az) : 1.0 / (std::numbers::pi * alpha_);
        const double want = target * std::max(asum, 1e-300);
        const double trunc = converged ? 0.0 : prev_env;
        const bool trunc_ok = !overflow && (converged || (asym && trunc <= std::max(want, 1e-9 * asum)));
        const bool round_ok = round <= want;

        r.value = std::max(0.0, static_cast<double>(sum) * pre);
        r.terms = nu;
        r.error = (overflow || (!converged && !asym) ? std::numeric_limits<double>::infinity() : trunc + round) * pre;
        r.ok = trunc_ok && round_ok;
        r.needs_more_precision = is_double && (overflow || (trunc_ok && !round_ok));
        return r;
    }

    double alpha_, bb_;
    double q_pow_[2], q_inv_[2];
    std::array<double, series_budget> pow_c_, pow_err_, inv_c_, inv_err_;
    int pow_len_ = series_budget, inv_len_ = series_budget;
    std::array<std::array<double, series_budget>, 2> pow_sin_, inv_sin_;
    static constexpr int quad_chunk = 50;
    mutable std::mutex quad_mu_;
    mutable std::atomic<int> quad_len_{0};
    mutable std::unique_ptr<QuadTables> quad_;
};

/// Radius |z| at which the two series hand over. Both are evaluated on a
/// grid; where both report success the score is the larger of their
/// disagreement and their own error estimates. Among grid points scoring
/// within a factor 10 of the best (or below 1e-13) the asymptotic series is
/// preferred: it is cheaper and stays in double precision.
inline double find_crossover(const StableSeries& s) {
    constexpr int n = 200;
    constexpr double z_lo = 1e-3, z_hi = 40.0;
    std::array<double, n> zs, score;
    const bool sides = s.beta_b() != 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        zs[i] = z_lo * std::pow(z_hi / z_lo, i / (n - 1.0));
        score[i] = 0.0;
        for (int side = 0; side < (sides ? 2 : 1); ++side) {
            const double z = side ? -zs[i] : zs[i];
            const auto a = s.eval(SeriesKind::power, z, 1e-17, 1e-14);
            const auto b = s.eval(SeriesKind::inverse, z, 1e-17, 1e-14);
            const double ref = std::max(a.value, b.value);
            double si = std::numeric_limits<double>::infinity();
            if (a.ok && b.ok && ref > 0)
                si = std::max({std::abs(a.value - b.value), a.error, b.error}) / ref;
            score[i] = std::max(score[i], si);
        }
        best = std::min(best, score[i]);
    }
    if (!(best <= 1e-6)) return s.alpha() > 1 ? 3.0 : 0.0;
    const double thr = std::max(1e-13, 10 * best);
    if (s.alpha() > 1) {
        for (int i = 0; i < n; ++i)
            if (score[i] <= thr) return zs[i];
    } else {
        for (int i = n - 1; i >= 0; --i)
            if (score[i] <= thr) return zs[i];
    }
    return s.alpha() > 1 ? 3.0 : 0.0;
}

/// Crossover radius for (alpha, beta_b). The symmetric case is tabulated on an
/// alpha grid of step 1/40 (filled lazily) and interpolated; skewed cases are
/// computed and cached per exact parameter pair.
inline double crossover_radius(double alpha, double beta_b) {
    struct Cache {
        std::mutex mu;
        std::map<int, double> nodes;
        std::map<std::pair<double, double>, double> skewed;
    };
    static Cache cache;
    auto node = [&](int k) {
        {
            std::lock_guard lock(cache.mu);
            if (auto it = cache.nodes.find(k); it != cache.nodes.end()) return it->second;
        }
        const double r = find_crossover(StableSeries(k / 40.0, 0.0));
        std::lock_guard lock(cache.mu);
        cache.nodes.emplace(k, r);
        return r;
    };
    if (beta_b != 0.0) {
        const auto key = std::make_pair(alpha, beta_b);
        {
            std::lock_guard lock(cache.mu);
            if (auto it = cache.skewed.find(key); it != cache.skewed.end()) return it->second;
        }
        const double r = find_crossover(StableSeries(alpha, beta_b));
        std::lock_guard lock(cache.mu);
        if (cache.skewed.size() > 4096) cache.skewed.clear();
        cache.skewed.emplace(key, r);
        return r;
    }
    // grid nodes k/40 on the same side of alpha = 1 as alpha
    const double x = alpha * 40.0;
    int lo = static_cast<int>(std::floor(x)), hi = lo + 1;
    if (alpha < 1) {
        lo = std::max(lo, 1);
        hi = std::min(hi, 39);
    } else {
        lo = std::max(lo, 41);
        hi = std::min(hi, 79);
    }
    if (lo >= hi) return node(lo);
    const double t = std::clamp(x - lo, 0.0, 1.0);
    return (1 - t) * node(lo) + t * node(hi);
}

/// Breakpoints for the inversion integrals on [0, upper]: geometric near the
/// origin (the integrands have a u^alpha cusp there) and one per half period.
inline std::vector<double> inversion_breaks(double z, double upper) {
    std::vector<double> b;
    for (double u = 1e-8; u < std::min(1.0, upper); u *= 10) b.push_back(u);
    const double period = std::numbers::pi / std::max(std::abs(z), 1.0);
    for (double u = period; u < upper && b.size() < 100000; u += period) b.push_back(u);
    return b;
}

inline double gaussian_pdf(double x, double sigma, double mu) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.25 * z * z) / (2.0 * sigma * std::sqrt(std::numbers::pi));
}

inline double cauchy_pdf(double x, double sigma, double mu) {
    const double z = (x - mu) / sigma;
    return 1.0 / (std::numbers::pi * sigma * (1.0 + z * z));
}

} // namespace detail

/// Density evaluation through the series expansions with precomputed
/// coefficients; build once per parameter set and evaluate many points.
class StableDensity {
public:
    struct Options {
        double tol = 1e-16;       ///< term-stopping tolerance
        double target = 1e-12;    ///< relative accuracy before escalating precision
        bool inversion_fallback = true;
    };

    explicit StableDensity(const StableParams& p) : StableDensity(p, Options{}) {}

    StableDensity(const StableParams& p, Options opt) : p_(p), opt_(opt) {
        validate(p);
        if (p.alpha != 1.0 && p.alpha != 2.0) {
            const auto f = detail::series_form(p);
            scale_ = f.scale;
            series_ = std::make_shared<const detail::StableSeries>(p.alpha, f.beta_b);
            radius_ = detail::crossover_radius(p.alpha, f.beta_b);
        }
    }

    const StableParams& params() const { return p_; }
    double crossover() const { return radius_; }

    /// Density at x, from the series only. Throws NumericFailure (carrying the
    /// partial sum) when neither expansion reaches the requested accuracy.
    double series(double x) const { return eval(x, false); }

    /// Density at x; when both series fail, falls back to cf inversion.
    double operator()(double x) const { return eval(x, opt_.inversion_fallback); }

private:
    double eval(double x, bool fallback) const;

    StableParams p_;
    Options opt_;
    double scale_ = 1.0;
    double radius_ = 0.0;
    std::shared_ptr<const detail::StableSeries> series_;
};

/// Density by numerical inversion of the characteristic function.
inline double stable_pdf_inversion(const StableParams& p, double x) {
    validate(p);
    const double z = (x - p.mu) / p.sigma;
    const double a = p.alpha;
    const double b = (a == 1.0 || a == 2.0) ? 0.0 : p.beta * std::tan(std::numbers::pi * a / 2);
    const double upper = std::pow(40.0, 1.0 / a);
    std::vector<double> breaks = detail::inversion_breaks(z, upper);
    quad::Options opt;
    opt.rel_tol = 1e-13;
    opt.fail_rel = 1e-9;
    opt.fail_abs = 1e-12;
    const double v = quad::integrate_pieces(
        [&](double u) {
            const double ua = std::pow(u, a);
            return std::exp(-ua) * std::cos(ua * b - u * z);
        },
        0.0, upper, breaks, opt);
    return std::max(0.0, v / (std::numbers::pi * p.sigma));
}

inline double StableDensity::eval(double x, bool fallback) const {
    detail::require(!std::isnan(x), "density argument is NaN");
    if (p_.alpha == 2.0) return detail::gaussian_pdf(x, p_.sigma, p_.mu);
    if (p_.alpha == 1.0) return detail::cauchy_pdf(x, p_.sigma, p_.mu);
    if (std::isinf(x)) return 0.0;
    const double z = (x - p_.mu) / scale_;
    using detail::SeriesKind;
    const SeriesKind first = std::abs(z) < radius_ ? SeriesKind::power : SeriesKind::inverse;
    const SeriesKind second = first == SeriesKind::power ? SeriesKind::inverse : SeriesKind::power;
    // both series in double first; the quad tables cost far more than a sum
    for (bool quad : {false, true}) {
        for (const SeriesKind kind : {first, second}) {
            const auto r = series_->eval(kind, z, opt_.tol, opt_.target, quad);
            if (r.ok) return r.value / scale_;
        }
    }
    const auto r1 = series_->eval(first, z, opt_.tol, opt_.target);
    if (fallback) return stable_pdf_inversion(p_, x);
    throw NumericFailure("stable density series did not converge at x = " + std::to_string(x) + " (alpha = " +
                             std::to_string(p_.alpha) + ")",
                         r1.value / scale_);
}

/// Density from the series expansions (closed forms at alpha = 1, 2).
/// `tol` is the relative size of the last retained term.
inline double stable_pdf_series(const StableParams& p, double x, double tol = 1e-16) {
    StableDensity::Options opt;
    opt.tol = tol;
    opt.inversion_fallback = false;
    return StableDensity(p, opt).series(x);
}

/// Density with the inversion fallback enabled.
inline double stable_pdf(const StableParams& p, double x) { return StableDensity(p)(x); }

inline double stable_cdf(const StableParams& p, double x) {
    validate(p);
    const double z = (x - p.mu) / p.sigma;
    if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
    if (p.alpha == 2.0) return 0.5 * std::erfc(-z / 2.0);
    if (p.alpha == 1.0) return 0.5 + std::atan(z) / std::numbers::pi;
    if (z == 0.0 && p.beta == 0.0) return 0.5;
    const double a = p.alpha;
    const double b = p.beta * std::tan(std::numbers::pi * a / 2);
    try {
        // Gil-Pelaez: F = 1/2 - (1/pi) int_0^inf Im[e^{-iuz} phi(u)] / u du
        const double upper = std::pow(40.0, 1.0 / a);
        std::vector<double> breaks = detail::inversion_breaks(z, upper);
        quad::Options opt;
        opt.rel_tol = 1e-13;
        opt.fail_rel = 1e-9;
        opt.fail_abs = 1e-11;
        const double v = quad::integrate_pieces(
            [&](double u) {
                const double ua = std::pow(u, a);
                return std::exp(-ua) * std::sin(ua * b - u * z) / u;
            },
            0.0, upper, breaks, opt);
        return std::clamp(0.5 - v / std::numbers::pi, 0.0, 1.0);
    } catch (const NumericFailure&) {
        // fall back to integrating the density
        const StableDensity f(p);
        quad::Options opt;
        opt.fail_rel = 1e-6;
        if (x < p.mu)
            return std::clamp(quad::integrate_to_inf([&](double u) { return f(2 * x - u); }, x, opt), 0.0, 1.0);
        return std::clamp(1.0 - quad::integrate_to_inf(f, x, opt), 0.0, 1.0);
    }
}

/// Quantile by bracketing and TOMS 748 on the CDF.
inline double stable_quantile(const StableParams& p, double prob) {
    validate(p);
    detail::require(prob > 0 && prob < 1, "quantile probability must lie in (0, 1)");
    auto g = [&](double x) { return stable_cdf(p, x) - prob; };
    double lo = p.mu - p.sigma, hi = p.mu + p.sigma;
    while (g(lo) > 0) lo = p.mu - 2 * (p.mu - lo);
    while (g(hi) < 0) hi = p.mu + 2 * (hi - p.mu);
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
}

/// One variate by the Chambers-Mallows-Stuck transform.
inline double sample_stable(const StableParams& p, RandomStream& rng) {
    const double v = std::numbers::pi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    const double a = p.alpha;
    double x;
    if (a == 1.0) {
        x = std::tan(v);
    } else if (p.beta == 0.0) {
        x = std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) * std::pow(std::cos((1.0 - a) * v) / w, (1.0 - a) / a);
    } else {
        const double t = p.beta * std::tan(std::numbers::pi * a / 2);
        const double b = std::atan(t) / a;
        const double s = std::pow(1.0 + t * t, 1.0 / (2.0 * a));
        x = s * std::sin(a * (v + b)) / std::pow(std::cos(v), 1.0 / a) *
            std::pow(std::cos(v - a * (v + b)) / w, (1.0 - a) / a);
    }
    return p.sigma * x + p.mu;
}

/// Tabulated CDF for repeated evaluation (bootstrap loops). The table holds
/// F on nodes z = tan(pi u / 2) and is built by integrating the density
/// between nodes with 10-point Gauss-Legendre; cubic Hermite interpolation
/// uses the density as derivative. Outside the table stable_cdf is called.
class StableCdfTable {
public:
    explicit StableCdfTable(const StableParams& p, int nodes = 1601) : p_(p), density_(p) {
        validate(p);
        detail::require(nodes >= 11 && nodes % 2 == 1, "table needs an odd node count >= 11");
        if (p.alpha == 1.0 || p.alpha == 2.0) return;   // closed forms, no table
        const int half = nodes / 2;
        const double umax = 2.0 / std::numbers::pi * std::atan(zmax);
        du_ = umax / half;
        z_.resize(nodes);
        f_.resize(nodes);
        d_.resize(nodes);
        for (int i = 0; i < nodes; ++i) {
            const double u = (i - half) * du_;
            z_[i] = std::tan(std::numbers::pi * u / 2);
            d_[i] = density_(p.mu + p.sigma * z_[i]) * p.sigma;
        }
        f_[half] = p.beta == 0.0 ? 0.5 : stable_cdf(p, p.mu);
        for (int i = half; i + 1 < nodes; ++i) f_[i + 1] = f_[i] + segment(z_[i], z_[i + 1]);
        for (int i = half; i > 0; --i) f_[i - 1] = f_[i] - segment(z_[i - 1], z_[i]);
        for (auto& v : f_) v = std::clamp(v, 0.0, 1.0);
    }

    double operator()(double x) const {
        if (z_.empty()) return stable_cdf(p_, x);
        const double z = (x - p_.mu) / p_.sigma;
        if (!(std::abs(z) < zmax)) return stable_cdf(p_, x);
        const int half = static_cast<int>(z_.size()) / 2;
        const double u = 2.0 / std::numbers::pi * std::atan(z);
        const int i = std::clamp(static_cast<int>(std::floor(u / du_)) + half, 0, static_cast<int>(z_.size()) - 2);
        const double a = z_[i], b = z_[i + 1];
        if (a >= tail_z || b <= -tail_z) {
            // tails: log of the tail probability against log |z| is close to linear
            const bool upper = a > 0;
            auto tail = [&](int k) { return upper ? 1.0 - f_[k] : f_[k]; };
            const double ta = tail(i), tb = tail(i + 1);
            if (ta > 0 && tb > 0) {
                const double sa = std::log(std::abs(a)), sb = std::log(std::abs(b));
                const double ga = -std::abs(a) * d_[i] / ta, gb = -std::abs(b) * d_[i + 1] / tb;
                const double y = hermite(sa, sb, std::log(ta), std::log(tb), ga, gb, std::log(std::abs(z)));
                const double t = std::exp(y);
                return std::clamp(upper ? 1.0 - t : t, 0.0, 1.0);
            }
        }
        return std::clamp(hermite(a, b, f_[i], f_[i + 1], d_[i], d_[i + 1], z), 0.0, 1.0);
    }

    const StableParams& params() const { return p_; }

private:
    static constexpr double zmax = 2000.0;
    static constexpr double tail_z = 4.0;

    /// Cubic through (a, fa), (b, fb) with slopes da, db, evaluated at x.
    static double hermite(double a, double b, double fa, double fb, double da, double db, double x) {
        const double h = b - a, t = (x - a) / h;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * fa + (t3 - 2 * t2 + t) * h * da + (-2 * t3 + 3 * t2) * fb + (t3 - t2) * h * db;
    }

    double segment(double a, double b) const {
        static constexpr std::array<double, 5> x{0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                                 0.8650633666889845, 0.9739065285171717};
        static constexpr std::array<double, 5> w{0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                                 0.1494513491505806, 0.0666713443086881};
        const double c = 0.5 * (a + b), r = 0.5 * (b - a);
        double s = 0.0;
        for (int k = 0; k < 5; ++k)
            s += w[k] * (density_(p_.mu + p_.sigma * (c - r * x[k])) + density_(p_.mu + p_.sigma * (c + r * x[k])));
        return s * r * p_.sigma;
    }

    StableParams p_;
    StableDensity density_;
    double du_ = 0.0;
    std::vector<double> z_, f_, d_;
};

} // namespace gou
