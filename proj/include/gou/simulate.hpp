#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "kernels.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "stable.hpp"

namespace gou {

/// Standard Brownian motion, Var B(t) = t.
struct BrownianStd {};
/// Symmetric alpha-stable motion with increments L(t) - L(s) ~ S_alpha((t-s)^{1/alpha}).
/// At alpha = 2 the increments have variance 2(t-s), i.e. this is sqrt(2) B.
struct SymmetricStable {
    double alpha;
};
/// Poisson process with unit jumps at rate lambda.
struct PoissonUnitJump {
    double lambda;
};

using NoiseSpec = std::variant<BrownianStd, SymmetricStable, PoissonUnitJump>;

inline void validate(const NoiseSpec& n) {
    std::visit(overloaded{
                   [](const BrownianStd&) {},
                   [](const SymmetricStable& s) {
                       detail::require(s.alpha > 1 && s.alpha <= 2, "stable noise needs alpha in (1, 2]");
                   },
                   [](const PoissonUnitJump& p) {
                       detail::require(p.lambda > 0 && std::isfinite(p.lambda), "poisson noise needs lambda > 0");
                   },
               },
               n);
}

inline std::string to_string(const NoiseSpec& n) {
    return std::visit(overloaded{
                          [](const BrownianStd&) { return std::string("brownian"); },
                          [](const SymmetricStable& s) { return "stable:alpha=" + std::to_string(s.alpha); },
                          [](const PoissonUnitJump& p) { return "poisson:lambda=" + std::to_string(p.lambda); },
                      },
                      n);
}

/// Parse "brownian", "stable:alpha=1.5" or "poisson:lambda=2".
inline NoiseSpec parse_noise(std::string_view spec) {
    const std::string name(spec.substr(0, spec.find(':')));
    NoiseSpec n;
    if (name == "brownian" || name == "gaussian") {
        n = BrownianStd{};
    } else if (name == "stable") {
        auto [_, v] = detail::split_spec(spec, "alpha");
        detail::require(!v.empty(), "stable noise needs alpha");
        n = SymmetricStable{detail::parse_double(v, "alpha")};
    } else if (name == "poisson") {
        auto [_, v] = detail::split_spec(spec, "lambda");
        detail::require(!v.empty(), "poisson noise needs lambda");
        n = PoissonUnitJump{detail::parse_double(v, "lambda")};
    } else {
        throw InvalidArgument("unknown noise '" + name + "'");
    }
    validate(n);
    return n;
}

struct PathMeta {
    std::string kernel;
    std::string noise;
    double v0 = 0.0;
    std::uint64_t seed = 0;
};

/// Values on the grid k*h, k = 0..n-1.
struct Path {
    double h = 1.0;
    std::vector<double> values;
    PathMeta meta;
};

struct SimOptions {
    /// Replace every noise draw by 0 (test hook; the stream is not consumed).
    bool zero_noise = false;
};

namespace detail {

inline void check_grid(double h, std::size_t n) {
    require(h > 0 && std::isfinite(h), "step h must be > 0");
    require(n >= 2, "path length must be >= 2");
}

} // namespace detail

/// (2 int_0^h |cos(a s)|^alpha ds)^{1/alpha}: scale of the one-step innovation
/// of the cosine recursion.
inline double sigma_eps_cosine(double alpha, double a, double h) {
    detail::require(alpha > 0 && alpha <= 2, "alpha must lie in (0, 2]");
    detail::require(a > 0 && h > 0, "a and h must be > 0");
    const double v = quad::integrate_pieces([&](double s) { return std::pow(std::abs(std::cos(a * s)), alpha); }, 0.0,
                                            h, quad::cos_zeros(a, 0.0, 0.0, h));
    return std::pow(2.0 * v, 1.0 / alpha);
}

/// Initial pair (V(0), V(h)) for the cosine recursion.
struct CosineStart {
    double v0 = 0.0;
    double v1 = 0.0;
    /// Draw V(0), V(h) independently from S_alpha(1, 0, 0) instead.
    bool stable = false;
};

/// V((k+1)h) = 2 cos(ah) V(kh) - V((k-1)h) + eps_k,  eps_k ~ S_alpha(sigma_eps, 0, 0).
inline Path simulate_cosine(double a, double alpha, double h, std::size_t n, CosineStart start, RandomStream& rng,
                            SimOptions opt = {}) {
    detail::check_grid(h, n);
    detail::require(a > 0, "a must be > 0");
    detail::require(alpha > 0 && alpha <= 2, "alpha must lie in (0, 2]");
    Path p;
    p.h = h;
    p.meta = {to_string(KernelSpec{Cosine{a}}), "stable:alpha=" + std::to_string(alpha), start.v0, rng.seed()};
    p.values.resize(n);
    const StableParams unit{alpha, 1.0, 0.0, 0.0};
    if (start.stable && !opt.zero_noise) {
        start.v0 = sample_stable(unit, rng);
        start.v1 = sample_stable(unit, rng);
        p.meta.v0 = start.v0;
    }
    p.values[0] = start.v0;
    p.values[1] = start.v1;
    const double c = 2.0 * std::cos(a * h);
    const StableParams noise{alpha, opt.zero_noise ? 1.0 : sigma_eps_cosine(alpha, a, h), 0.0, 0.0};
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double e = opt.zero_noise ? 0.0 : sample_stable(noise, rng);
        p.values[k + 1] = c * p.values[k] - p.values[k - 1] + e;
    }
    return p;
}

/// Scale of W_k in V((k+1)h) = exp(-a(2k+1)h^2) V(kh) + W_k. The first
/// integrand exp(-alpha a((kh-s)^2 + (2k+1)h^2)) (e^{2ash} - 1)^alpha is
/// evaluated in the equivalent form exp(-alpha a((k+1)h-s)^2) (1 - e^{-2ash})^alpha,
/// which cannot overflow.
inline double sigma_W_quadratic(double alpha, double a, double h, std::size_t k) {
    detail::require(alpha > 0 && alpha <= 2, "alpha must lie in (0, 2]");
    detail::require(a > 0 && h > 0, "a and h must be > 0");
    const double kh = static_cast<double>(k) * h, end = kh + h;
    auto gauss = [&](double s) {
        const double d = end - s;
        return std::exp(-alpha * a * d * d);
    };
    double v = quad::integrate(gauss, kh, end);
    if (k > 0) {
        // the integrand is below e^{-60} of its peak before this point
        const double lo = std::max(0.0, end - std::sqrt(h * h + 60.0 / (alpha * a)));
        v += quad::integrate([&](double s) { return gauss(s) * std::pow(-std::expm1(-2.0 * a * s * h), alpha); },
                             lo, kh);
    }
    return std::pow(v, 1.0 / alpha);
}

inline Path simulate_quadratic(double a, double alpha, double h, std::size_t n, double v0, RandomStream& rng,
                               SimOptions opt = {}) {
    detail::check_grid(h, n);
    detail::require(a > 0, "a must be > 0");
    detail::require(alpha > 0 && alpha <= 2, "alpha must lie in (0, 2]");
    Path p;
    p.h = h;
    p.meta = {to_string(KernelSpec{QuadraticGaussian{a}}), "stable:alpha=" + std::to_string(alpha), v0, rng.seed()};
    p.values.resize(n);
    p.values[0] = v0;
    double sw = 0.0;
    bool settled = false;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double w = 0.0;
        if (!opt.zero_noise) {
            if (!settled) {
                const double next = sigma_W_quadratic(alpha, a, h, k);
                settled = k > 0 && std::abs(next - sw) <= 1e-15 * next;
                sw = next;
            }
            w = sample_stable(StableParams{alpha, sw, 0.0, 0.0}, rng);
        }
        p.values[k + 1] = std::exp(-a * (2.0 * k + 1.0) * h * h) * p.values[k] + w;
    }
    return p;
}

/// Jump times of a rate-lambda Poisson process on (0, horizon], by exponential gaps.
inline std::vector<double> poisson_event_times(double lambda, double horizon, RandomStream& rng) {
    detail::require(lambda > 0, "lambda must be > 0");
    std::vector<double> t;
    for (double s = rng.exponential() / lambda; s <= horizon; s += rng.exponential() / lambda) t.push_back(s);
    return t;
}

/// Exact OU paths: AR(1) with the exact innovation law for Brownian and stable
/// noise; event-driven sum of decayed unit jumps for Poisson noise.
inline Path simulate_ou(double theta, const NoiseSpec& noise, double h, std::size_t n, double v0, RandomStream& rng,
                        SimOptions opt = {}) {
    detail::check_grid(h, n);
    detail::require(theta > 0, "theta must be > 0");
    validate(noise);
    Path p;
    p.h = h;
    p.meta = {to_string(KernelSpec{Exponential{theta}}), to_string(noise), v0, rng.seed()};
    p.values.resize(n);
    p.values[0] = v0;
    const double decay = std::exp(-theta * h);
    if (opt.zero_noise) {
        for (std::size_t k = 1; k < n; ++k) p.values[k] = v0 * std::exp(-theta * h * k);
        return p;
    }
    if (const auto* pois = std::get_if<PoissonUnitJump>(&noise)) {
        const auto times = poisson_event_times(pois->lambda, h * (n - 1), rng);
        std::size_t j = 0;
        for (std::size_t k = 1; k < n; ++k) {
            const double t = h * k;
            double v = decay * p.values[k - 1];
            for (; j < times.size() && times[j] <= t; ++j) v += std::exp(-theta * (t - times[j]));
            p.values[k] = v;
        }
        return p;
    }
    double alpha = 2.0, scale;
    if (const auto* st = std::get_if<SymmetricStable>(&noise)) {
        alpha = st->alpha;
        scale = std::pow(-std::expm1(-alpha * theta * h) / (alpha * theta), 1.0 / alpha);
    } else {
        // N(0, (1 - e^{-2 theta h}) / (2 theta)) written as S_2 with sigma^2 = variance / 2
        scale = std::sqrt(-std::expm1(-2.0 * theta * h) / (4.0 * theta));
    }
    const StableParams xi{alpha, scale, 0.0, 0.0};
    for (std::size_t k = 1; k < n; ++k) p.values[k] = decay * p.values[k - 1] + sample_stable(xi, rng);
    return p;
}

/// V(kh) = v0 rho(kh) + sum_{j < k m} rho(kh - j dt) dL_j with dt = h / m and
/// increments dL_j over [j dt, (j+1) dt).
inline std::vector<double> convolve_increments(const KernelSpec& kernel, double h, std::size_t n, double v0,
                                               const std::vector<double>& increments, std::size_t substeps) {
    const std::size_t m = substeps, total = (n - 1) * m;
    detail::require(increments.size() >= total, "not enough noise increments");
    const double dt = h / static_cast<double>(m);
    std::vector<double> rho(total + 1);
    for (std::size_t i = 0; i <= total; ++i) rho[i] = eval_kernel(kernel, static_cast<double>(i) * dt);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        double s = v0 == 0.0 ? 0.0 : v0 * eval_kernel(kernel, h * static_cast<double>(k));
        const std::size_t km = k * m;
        for (std::size_t j = 0; j < km; ++j) s += rho[km - j] * increments[j];
        v[k] = s;
    }
    return v;
}

/// Riemann-sum path for any kernel/noise pair on a grid refined `substeps` times,
/// with left-endpoint kernel evaluation and one shared increment stream.
inline Path simulate_general(const KernelSpec& kernel, const NoiseSpec& noise, double h, std::size_t n, double v0,
                             RandomStream& rng, std::size_t substeps = 10, SimOptions opt = {}) {
    detail::check_grid(h, n);
    detail::require(substeps >= 1, "substeps must be >= 1");
    validate(kernel);
    validate(noise);
    Path p;
    p.h = h;
    p.meta = {to_string(kernel), to_string(noise), v0, rng.seed()};
    const std::size_t total = (n - 1) * substeps;
    const double dt = h / static_cast<double>(substeps);
    std::vector<double> inc(total, 0.0);
    if (!opt.zero_noise) {
        std::visit(overloaded{
                       [&](const BrownianStd&) {
                           const double s = std::sqrt(dt);
                           for (auto& x : inc) x = s * rng.normal();
                       },
                       [&](const SymmetricStable& st) {
                           const StableParams sp{st.alpha, std::pow(dt, 1.0 / st.alpha), 0.0, 0.0};
                           for (auto& x : inc) x = sample_stable(sp, rng);
                       },
                       [&](const PoissonUnitJump& pj) {
                           for (double t : poisson_event_times(pj.lambda, h * (n - 1), rng)) {
                               const auto j = std::min(total - 1, static_cast<std::size_t>(t / dt));
                               inc[j] += 1.0;
                           }
                       },
                   },
                   noise);
    }
    p.values = convolve_increments(kernel, h, n, v0, inc, substeps);
    return p;
}

/// Generate `count` paths concurrently; path i uses the stream derived from
/// (master_seed, "path", i), so the result does not depend on `threads`.
template <class Gen>
std::vector<Path> simulate_batch(std::size_t count, std::uint64_t master_seed, unsigned threads, Gen&& gen) {
    std::vector<Path> out(count);
    parallel_for(count, threads, [&](std::size_t i) {
        RandomStream rng = RandomStream::derive(master_seed, "path", i);
        out[i] = gen(rng);
    });
    return out;
}

} // namespace gou
