#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gou/bayes.hpp"

using namespace gou;

namespace {

std::vector<double> cosine_path(double a, double alpha, std::size_t n, std::uint64_t seed) {
    RandomStream rng(seed);
    return simulate_cosine(a, alpha, 1.0, n, {}, rng).values;
}

} // namespace

TEST(Prior, OutsideSupport) {
    EXPECT_EQ(log_prior({2.5, 1.0, 1.0}), -INFINITY);
    EXPECT_EQ(log_prior({1.5, 1.0, 3.5}), -INFINITY);
    EXPECT_EQ(log_prior({1.5, -1.0, 1.0}), -INFINITY);
    EXPECT_EQ(log_prior({0.0, 1.0, 1.0}), -INFINITY);
}

TEST(Prior, DensityValue) {
    // Gamma(shape 1, rate 2) has density 2 e^{-2 s}
    EXPECT_NEAR(log_prior({1.5, 1.0, 1.0}), std::log(0.5) + std::log(1.0 / 3) + std::log(2 * std::exp(-2.0)), 1e-15);
    PriorConfig pr;
    pr.gamma_shape = 3.0;
    pr.gamma_rate = 0.5;
    const double s = 1.7;
    const double gamma = std::pow(0.5, 3) * s * s * std::exp(-0.5 * s) / 2.0;
    EXPECT_NEAR(log_prior({1.0, s, 2.0}, pr), std::log(0.5) + std::log(1.0 / 3) + std::log(gamma), 1e-14);
}

TEST(Prior, FlatInAlphaAndA) {
    for (double s : {0.2, 1.0, 3.0})
        EXPECT_DOUBLE_EQ(log_prior({0.3, s, 0.1}), log_prior({1.9, s, 2.9}));
}

TEST(Posterior, OutsideSupport) {
    const auto v = cosine_path(1.0, 2.0, 100, 1);
    EXPECT_EQ(log_posterior({2.1, 1.0, 1.0}, v, 1.0), -INFINITY);
    EXPECT_EQ(log_posterior({1.5, 1.0, 3.2}, v, 1.0), -INFINITY);
}

TEST(Posterior, DifferencesSplit) {
    const auto v = cosine_path(1.0, 1.6, 200, 2);
    const Eta e1{1.6, 1.3, 1.0}, e2{1.8, 0.9, 1.2};
    const double d = log_posterior(e1, v, 1.0) - log_posterior(e2, v, 1.0);
    const double want = -(neg_log_likelihood(v, 1.0, e1) - neg_log_likelihood(v, 1.0, e2)) + (log_prior(e1) - log_prior(e2));
    EXPECT_NEAR(d, want, 1e-12 * (1 + std::abs(neg_log_likelihood(v, 1.0, e1))));
}

TEST(Posterior, GaussianSlice) {
    const auto v = cosine_path(1.0, 2.0, 400, 3);
    for (double s : {0.8, 1.2})
        for (double a : {0.95, 1.0}) {
            double lp = std::log(0.5) + std::log(1.0 / 3) + std::log(2.0) - 2 * s;
            const double var = 2 * s * s;
            for (std::size_t k = 1; k + 1 < v.size(); ++k) {
                const double e = v[k + 1] - 2 * std::cos(a) * v[k] + v[k - 1];
                lp += -0.5 * std::log(2 * std::numbers::pi * var) - e * e / (2 * var);
            }
            EXPECT_NEAR(log_posterior({2.0, s, a}, v, 1.0), lp, 1e-8);
        }
}

TEST(Reflect, StaysInBounds) {
    EXPECT_DOUBLE_EQ(detail::reflect(2.3, 0.0, 2.0), 1.7);
    EXPECT_DOUBLE_EQ(detail::reflect(-0.4, 0.0, 2.0), 0.4);
    EXPECT_DOUBLE_EQ(detail::reflect(-0.4, 0.0, INFINITY), 0.4);
    EXPECT_DOUBLE_EQ(detail::reflect(5.0, 0.0, 2.0), 1.0);
    EXPECT_DOUBLE_EQ(detail::reflect(1.0, 0.0, 2.0), 1.0);
}

TEST(Sampler, TwoPointTarget) {
    // mass 0.3 on [0, 1), 0.7 on [1, 2], uniform within each half
    auto logp = [](const std::vector<double>& x, int) { return std::log(x[0] < 1 ? 0.3 : 0.7); };
    MwgOptions o;
    o.n_iter = 200000;
    o.burn_in = 1000;
    o.thin = 1;
    o.adapt = false;
    RandomStream rng(4);
    const auto r = metropolis_within_gibbs(logp, {0.5}, {0.0}, {2.0}, {0.8}, o, rng);
    std::vector<double> ind;
    for (double x : r.chains[0]) ind.push_back(x >= 1 ? 1.0 : 0.0);
    const double p = mean(ind);
    const double ess = chain_diagnostics(ind).ess;
    const double se = std::sqrt(0.7 * 0.3 / ess);
    EXPECT_LT(std::abs(p - 0.7), 3 * se) << "p " << p << " ess " << ess;
}

TEST(Sampler, GaussianTargetMoments) {
    auto logp = [](const std::vector<double>& x, int) { return -0.5 * (x[0] * x[0] + (x[1] - 1) * (x[1] - 1) / 4); };
    MwgOptions o;
    o.n_iter = 60000;
    o.burn_in = 5000;
    o.thin = 1;
    RandomStream rng(5);
    const double big = 1e6;
    const auto r = metropolis_within_gibbs(logp, {0.0, 0.0}, {-big, -big}, {big, big}, {0.1, 0.1}, o, rng);
    EXPECT_NEAR(mean(r.chains[0]), 0.0, 0.05);
    EXPECT_NEAR(mean(r.chains[1]), 1.0, 0.1);
    EXPECT_NEAR(sample_sd(r.chains[0]), 1.0, 0.05);
    EXPECT_NEAR(sample_sd(r.chains[1]), 2.0, 0.1);
    // adaptation moved the scales toward the acceptance band
    for (double a : r.acceptance) {
        EXPECT_GT(a, 0.15);
        EXPECT_LT(a, 0.55);
    }
}

TEST(Sampler, RejectsBadConfig) {
    auto logp = [](const std::vector<double>&, int) { return 0.0; };
    RandomStream rng(1);
    MwgOptions o;
    o.n_iter = 10;
    o.burn_in = 10;
    EXPECT_THROW(metropolis_within_gibbs(logp, {0.5}, {0.0}, {1.0}, {0.1}, o, rng), InvalidArgument);
    o.burn_in = 2;
    o.thin = 0;
    EXPECT_THROW(metropolis_within_gibbs(logp, {0.5}, {0.0}, {1.0}, {0.1}, o, rng), InvalidArgument);
}

TEST(Diagnostics, WhiteNoise) {
    RandomStream rng(6);
    std::vector<double> x(20000);
    for (double& v : x) v = rng.normal();
    const auto d = chain_diagnostics(x);
    EXPECT_FALSE(d.degenerate);
    EXPECT_LT(std::abs(d.autocorrelation[0]), 3 / std::sqrt(20000.0));
    EXPECT_LE(d.ess, 20000.0);
    EXPECT_GT(d.ess, 15000.0);
}

TEST(Diagnostics, Ar1EffectiveSize) {
    RandomStream rng(7);
    const double phi = 0.8;
    const std::size_t n = 100000;
    std::vector<double> x(n);
    for (std::size_t i = 1; i < n; ++i) x[i] = phi * x[i - 1] + rng.normal();
    const auto d = chain_diagnostics(x);
    EXPECT_NEAR(d.autocorrelation[0], phi, 0.01);
    EXPECT_NEAR(d.ess, n * (1 - phi) / (1 + phi), 0.15 * n * (1 - phi) / (1 + phi));
}

TEST(Diagnostics, ConstantChain) {
    const std::vector<double> x(100, 1.25);
    const auto d = chain_diagnostics(x);
    EXPECT_TRUE(d.degenerate);
    EXPECT_EQ(d.ess, 0.0);
    EXPECT_THROW(chain_diagnostics(std::vector<double>(5, 0.0)), InvalidArgument);
}

TEST(Diagnostics, TraceCsv) {
    std::array<std::vector<double>, 3> c{std::vector<double>{1.5, 1.6}, {0.9, 1.0}, {1.0, 0.5}};
    EXPECT_EQ(chain_trace_csv(c, 10, 100), "iter,alpha,sigma,a\n100,1.5,0.90000000000000002,1\n110,1.6000000000000001,1,0.5\n");
}

TEST(Mcmc, RejectsEmptyData) {
    McmcConfig c;
    EXPECT_THROW(mcmc_sample(std::vector<double>{}, 1.0, c), InvalidArgument);
}

TEST(Mcmc, DeterministicAndInSupport) {
    const auto v = cosine_path(1.0, 1.8, 150, 8);
    McmcConfig c;
    c.n_iter = 400;
    c.burn_in = 100;
    c.thin = 2;
    c.init = Eta{1.8, 1.0, 1.0};
    c.seed = 99;
    c.chains = 2;
    c.threads = 2;
    const auto r1 = mcmc_sample(v, 1.0, c, Eta{1.8, 1.3, 1.0});
    c.threads = 1;
    const auto r2 = mcmc_sample(v, 1.0, c, Eta{1.8, 1.3, 1.0});
    ASSERT_EQ(r1.chains.size(), 2u);
    for (int ch = 0; ch < 2; ++ch)
        for (int j = 0; j < 3; ++j) {
            EXPECT_EQ(r1.chains[ch][j], r2.chains[ch][j]);
            EXPECT_EQ(r1.chains[ch][j].size(), 150u);
        }
    EXPECT_NE(r1.chains[0][2], r1.chains[1][2]);
    for (const auto& ch : r1.chains) {
        for (double x : ch[0]) EXPECT_TRUE(x > 0 && x <= 2);
        for (double x : ch[1]) EXPECT_GT(x, 0);
        for (double x : ch[2]) EXPECT_TRUE(x > 0 && x <= 3);
    }
    const auto& s = r1.summary;
    EXPECT_NEAR(*s.a.bias, 1.0 - s.a.mean, 1e-15);
    EXPECT_LE(s.a.lower, s.a.upper);
    EXPECT_FALSE(s.all_rejected);
    EXPECT_GT(s.a.acceptance, 0.0);
}

TEST(Mcmc, PosteriorConcentrates) {
    auto sd_a = [](std::size_t n) {
        const auto v = cosine_path(1.0, 2.0, n, 10);
        McmcConfig c;
        c.n_iter = 2000;
        c.burn_in = 500;
        c.thin = 1;
        c.init = Eta{1.99, sigma_eps_cosine(2.0, 1.0, 1.0), 1.0};
        c.seed = 3;
        return mcmc_sample(v, 1.0, c).summary.a.sd;
    };
    EXPECT_LT(sd_a(2000), sd_a(500));
}
