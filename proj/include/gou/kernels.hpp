#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "error.hpp"

namespace gou {

struct Exponential {
    double theta;
};
struct Cosine {
    double a;
};
struct QuadraticGaussian {
    double a;
};
/// Power-series kernel 1 + sum_k t^{3k} / ((2*3)(5*6)...((3k-1)(3k))).
/// n_terms counts the terms after the leading 1; empty means adaptive.
struct Airy {
    std::optional<int> n_terms;
};

using KernelSpec = std::variant<Exponential, Cosine, QuadraticGaussian, Airy>;

/// Largest argument accepted for the Airy series.
inline constexpr double airy_max_t = 5.0;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

inline void validate(const KernelSpec& k) {
    std::visit(overloaded{
                   [](const Exponential& e) { detail::require(e.theta > 0 && std::isfinite(e.theta), "exponential kernel needs theta > 0"); },
                   [](const Cosine& c) { detail::require(c.a > 0 && std::isfinite(c.a), "cosine kernel needs a > 0"); },
                   [](const QuadraticGaussian& q) { detail::require(q.a > 0 && std::isfinite(q.a), "quadratic kernel needs a > 0"); },
                   [](const Airy& s) { detail::require(!s.n_terms || *s.n_terms >= 1, "airy kernel needs n_terms >= 1"); },
               },
               k);
}

inline double airy_series(double t, std::optional<int> n_terms) {
    const double t3 = t * t * t;
    double term = 1.0, sum = 1.0;
    const int limit = n_terms.value_or(1000);
    for (int k = 1; k <= limit; ++k) {
        term *= t3 / ((3.0 * k - 1.0) * (3.0 * k));
        sum += term;
        if (!n_terms && term < 1e-14 * sum) break;
    }
    return sum;
}

inline double eval_kernel(const KernelSpec& k, double t) {
    validate(k);
    detail::require(t >= 0 && std::isfinite(t), "kernel argument must be a finite t >= 0");
    return std::visit(overloaded{
                          [&](const Exponential& e) { return std::exp(-e.theta * t); },
                          [&](const Cosine& c) { return std::cos(c.a * t); },
                          [&](const QuadraticGaussian& q) { return std::exp(-q.a * t * t); },
                          [&](const Airy& s) {
                              detail::require(t <= airy_max_t, "airy kernel is evaluated on [0, 5] only");
                              return airy_series(t, s.n_terms);
                          },
                      },
                      k);
}

/// Central-difference estimate of rho''(t) + f(t) rho(t) for the second-order families.
/// f = a^2 (cosine), 2a(1 - 2a t^2) (quadratic). The Airy series as defined solves
/// rho'' = t rho, so its residual is rho'' - t rho.
inline double kernel_ode_residual(const KernelSpec& k, double t, double step) {
    validate(k);
    detail::require(!std::holds_alternative<Exponential>(k),
                    "exponential kernel is first order; use exponential_ode_residual");
    detail::require(step > 0 && t - step >= 0, "need 0 < step <= t");
    const double r0 = eval_kernel(k, t);
    const double d2 = (eval_kernel(k, t + step) - 2.0 * r0 + eval_kernel(k, t - step)) / (step * step);
    const double f = std::visit(overloaded{
                                    [](const Exponential&) { return 0.0; },
                                    [](const Cosine& c) { return c.a * c.a; },
                                    [&](const QuadraticGaussian& q) { return 2.0 * q.a * (1.0 - 2.0 * q.a * t * t); },
                                    [&](const Airy&) { return -t; },
                                },
                                k);
    return d2 + f * r0;
}

/// Central-difference estimate of rho'(t) + theta rho(t).
inline double exponential_ode_residual(const Exponential& e, double t, double step) {
    const KernelSpec k = e;
    detail::require(step > 0 && t - step >= 0, "need 0 < step <= t");
    const double d1 = (eval_kernel(k, t + step) - eval_kernel(k, t - step)) / (2.0 * step);
    return d1 + e.theta * eval_kernel(k, t);
}

/// Upper bound of |rho| on [0, t]; 1 for the bounded families.
inline double kernel_sup(const KernelSpec& k, double t) {
    return std::holds_alternative<Airy>(k) ? eval_kernel(k, std::min(t, airy_max_t)) : 1.0;
}

inline std::string to_string(const KernelSpec& k) {
    return std::visit(overloaded{
                          [](const Exponential& e) { return "exponential:theta=" + std::to_string(e.theta); },
                          [](const Cosine& c) { return "cosine:a=" + std::to_string(c.a); },
                          [](const QuadraticGaussian& q) { return "quadratic:a=" + std::to_string(q.a); },
                          [](const Airy& s) {
                              return s.n_terms ? "airy:n=" + std::to_string(*s.n_terms) : std::string("airy");
                          },
                      },
                      k);
}

namespace detail {

inline double parse_double(std::string_view s, std::string_view what) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc() && p == s.data() + s.size(), "cannot parse number '" + std::string(s) + "' for " + std::string(what));
    return v;
}

/// "name:key=value" or "name:value" -> (name, value text); value empty if absent.
inline std::pair<std::string, std::string> split_spec(std::string_view spec, std::string_view key) {
    const auto colon = spec.find(':');
    std::string name(spec.substr(0, colon));
    if (colon == std::string_view::npos) return {name, ""};
    std::string_view rest = spec.substr(colon + 1);
    if (auto eq = rest.find('='); eq != std::string_view::npos) {
        require(rest.substr(0, eq) == key, "unknown parameter '" + std::string(rest.substr(0, eq)) + "' in '" + std::string(spec) + "'");
        rest = rest.substr(eq + 1);
    }
    return {name, std::string(rest)};
}

} // namespace detail

/// Parse "exponential:theta=0.5", "cosine:a=2", "quadratic:a=1", "airy" or "airy:n=40".
inline KernelSpec parse_kernel(std::string_view spec) {
    const std::string name(spec.substr(0, spec.find(':')));
    KernelSpec k;
    if (name == "exponential" || name == "exp" || name == "ou") {
        auto [n, v] = detail::split_spec(spec, "theta");
        detail::require(!v.empty(), "exponential kernel needs theta");
        k = Exponential{detail::parse_double(v, "theta")};
    } else if (name == "cosine" || name == "cos") {
        auto [n, v] = detail::split_spec(spec, "a");
        detail::require(!v.empty(), "cosine kernel needs a");
        k = Cosine{detail::parse_double(v, "a")};
    } else if (name == "quadratic" || name == "gaussian") {
        auto [n, v] = detail::split_spec(spec, "a");
        detail::require(!v.empty(), "quadratic kernel needs a");
        k = QuadraticGaussian{detail::parse_double(v, "a")};
    } else if (name == "airy") {
        auto [n, v] = detail::split_spec(spec, "n");
        Airy s;
        if (!v.empty()) s.n_terms = static_cast<int>(detail::parse_double(v, "n"));
        k = s;
    } else {
        throw InvalidArgument("unknown kernel '" + name + "'");
    }
    validate(k);
    return k;
}

} // namespace gou
