#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>

namespace gou {

/// SplitMix64 finalizer (Steele, Lea, Flood). Used only for seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed for task `label`, item `index` under `master`. Depends only on the
/// triple, so results do not depend on which worker runs which item.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                    std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master ^ fnv1a(label)) + splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Seeded random stream. The engine is std::mt19937_64, whose output sequence is
/// fixed by the standard; the conversions to uniform, exponential and normal
/// variates are done here so that no implementation-defined distribution is used.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    static RandomStream derive(std::uint64_t master, std::string_view label, std::uint64_t index) {
        return RandomStream(derive_seed(master, label, index));
    }

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return eng_(); }

    std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform on the open interval (0,1).
    double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double exponential() { return -std::log(uniform()); }

    /// Standard normal by Box-Muller; always consumes two draws.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

} // namespace gou
