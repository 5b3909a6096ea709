// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gou/gou.hpp"
#include "oracles.hpp"

using namespace gou;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string sci(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", x);
    return b;
}

// 1. six sigma_eps values at h = 1
Outcome noise_scale_table() {
    struct Row {
        double alpha, a, want;
    };
    const Row rows[] = {{1.1, 1, 1.5824}, {1.1, 2, 1.0452}, {1.5, 1, 1.3450},
                        {1.5, 2, 0.9467}, {2.0, 1, 1.2061}, {2.0, 2, 0.9004}};
    double worst = 0;
    for (const auto& r : rows) worst = std::max(worst, std::abs(sigma_eps_cosine(r.alpha, r.a, 1.0) - r.want));
    return {worst <= 5e-4, "max |err| " + sci(worst) + " (tol 5e-4)"};
}

// 2. replication study, 50 replications, n = 2000
Outcome mle_study() {
    StudyConfig c;
    c.n = 2000;
    c.h = 1.0;
    c.replications = 50;
    c.seed = 20240501;
    c.alpha = 2.0;
    c.a = 1.0;
    const auto g = run_study(c);
    c.alpha = 1.5;
    c.a = 2.0;
    const auto s = run_study(c);
    const double e1 = std::abs(g.a.mean - 1.0), e2 = std::abs(g.alpha.mean - 2.0);
    const double e3 = std::abs(s.a.mean - 2.0), e4 = std::abs(s.sigma.mean - 0.9467);
    std::ostringstream d;
    d << "(2,1): |a-1| " << sci(e1) << " |alpha-2| " << sci(e2) << "; (1.5,2): |a-2| " << sci(e3) << " |sigma-0.9467| "
      << sci(e4) << "; failed " << g.failed + s.failed;
    return {e1 <= 0.005 && e2 <= 0.03 && e3 <= 0.01 && e4 <= 0.1, d.str()};
}

// 3. series density vs Fourier inversion, closed forms, normalization
Outcome stable_density() {
    double sup = 0;
    for (double a : {0.6, 0.8, 1.3, 1.5, 1.9}) {
        StableDensity::Options o;
        o.inversion_fallback = false;
        const StableDensity d({a, 1, 0, 0}, o);
        for (double x = -5; x <= 5.0001; x += 0.05) sup = std::max(sup, std::abs(d.series(x) - oracle::stable_pdf_fourier(a, 1, 0, x)));
    }
    double closed = 0;
    for (double x = -5; x <= 5.0001; x += 0.05) {
        closed = std::max(closed, std::abs(stable_pdf_series({1, 1, 0, 0}, x) - 1 / (std::numbers::pi * (1 + x * x))));
        closed = std::max(closed, std::abs(stable_pdf_series({2, 1, 0, 0}, x) - std::exp(-x * x / 4) / (2 * std::sqrt(std::numbers::pi))));
    }
    // whole-line mass: [-50, 50] by panels plus both tails by x = 50 e^w
    double mass_err = 0, window_min = 1;
    for (double a : {0.6, 1.3, 1.5, 1.9}) {
        const StableDensity d({a, 1, 0, 0});
        std::vector<double> e;
        for (double x = -50; x <= 50.0001; x += 0.5) e.push_back(x);
        const double centre = oracle::gl_panels([&](double x) { return d(x); }, e);
        const double tail = oracle::gl([&](double w) { return 50 * std::exp(w) * d(50 * std::exp(w)); }, 0.0, 80.0 / a, 400);
        mass_err = std::max(mass_err, std::abs(centre + 2 * tail - 1));
        window_min = std::min(window_min, centre);
    }
    return {sup < 1e-6 && closed <= 1e-12 && mass_err <= 1e-3,
            "sup vs inversion " + sci(sup) + ", closed forms " + sci(closed) + ", |mass-1| " + sci(mass_err) +
                " (mass inside [-50,50] alone >= " + sci(window_min) + ")"};
}

// 4. exponential kernel stationary at sigma0^2 = 1 / (2 theta); Markov factorization
Outcome stationarity_markov() {
    double dev = 0;
    for (double th : {0.5, 1.0, 3.0})
        for (double h : {0.0, 0.4, 2.0}) {
            const double want = std::exp(-th * h) / (2 * th);
            for (int i = 0; i < 20; ++i) dev = std::max(dev, std::abs(acf_theoretical(Exponential{th}, 1 / (2 * th), 0.25 * i, h) - want));
        }
    const double r_exp = std::abs(markov_residual(Exponential{1.0}, 0.5, 1.0, 1.0));
    const double r_cos = std::abs(markov_residual(Cosine{1.0}, 0.5, 1.0, 1.0));
    return {dev < 1e-8 && r_exp < 1e-8 && r_cos > 1e-3,
            "acf drift over t " + sci(dev) + ", Markov residual exp " + sci(r_exp) + " cos " + sci(r_cos)};
}

// 5. A_t closed forms vs quadrature; total jump mass
Outcome triplets() {
    double a_err = 0, m_err = 0;
    for (double p : {0.3, 1.0, 2.5})
        for (double t : {0.1, 1.0, 3.0, 10.0}) {
            const double G = 1.7, lam = 2.3;
            const LevyTriplet L{G, 0.0, lam};
            const double q_ou = G * oracle::gl([&](double u) { return std::exp(-2 * p * u); }, 0.0, t, 200);
            const double q_cos = G * oracle::gl([&](double u) { return std::cos(p * u) * std::cos(p * u); }, 0.0, t, 200);
            const auto ou = triplet_ou_poisson(p, L, 0.0, t);
            const auto co = triplet_cosine_poisson(p, L, 0.0, t);
            a_err = std::max({a_err, std::abs(ou.A_t - q_ou), std::abs(co.A_t - q_cos)});
            m_err = std::max({m_err, std::abs(ou.total_mass - lam * t), std::abs(co.total_mass - lam * t)});
            // mass of the jump measure summed over a partition of its support
            double parts = 0;
            for (double l = -1; l < 1; l += 0.125) parts += co.nu_on(l, l + 0.125);
            m_err = std::max(m_err, std::abs(parts - lam * t));
        }
    return {a_err <= 1e-10 && m_err <= 1e-6, "A_t err " + sci(a_err) + ", nu mass err " + sci(m_err)};
}

// 6. zero-noise exactness; Poisson OU convergence
Outcome simulation() {
    SimOptions opt;
    opt.zero_noise = true;
    const double h = 0.05, v0 = 2.0;
    std::size_t mismatch = 0;
    double closed = 0;
    for (const KernelSpec& k :
         {KernelSpec{Exponential{0.7}}, KernelSpec{Cosine{2.0}}, KernelSpec{QuadraticGaussian{0.4}}, KernelSpec{Airy{}}}) {
        RandomStream rng(1);
        const auto p = simulate_general(k, BrownianStd{}, h, 100, v0, rng, 10, opt);
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            const double t = h * i;
            mismatch += p.values[i] != v0 * eval_kernel(k, t);
            double want = NAN;
            if (std::holds_alternative<Exponential>(k)) want = v0 * std::exp(-0.7 * t);
            if (std::holds_alternative<Cosine>(k)) want = v0 * std::cos(2.0 * t);
            if (std::holds_alternative<QuadraticGaussian>(k)) want = v0 * std::exp(-0.4 * t * t);
            if (!std::isnan(want)) closed = std::max(closed, std::abs(p.values[i] - want));
        }
    }
    // sup error against the event sum v0 e^{-theta t} + sum_{s <= t} e^{-theta (t - s)},
    // averaged over paths, as substeps double
    const double th = 1.0, lam = 3.0, hh = 0.5, x0 = 0.5;
    const std::size_t n = 40;
    const int paths = 40;
    std::vector<double> errs;
    for (std::size_t m : {5, 10, 20, 40, 80, 160}) {
        double e = 0;
        for (int r = 0; r < paths; ++r) {
            RandomStream r1 = RandomStream::derive(3, "accept-conv", r), r2 = RandomStream::derive(3, "accept-conv", r);
            const auto T = poisson_event_times(lam, hh * (n - 1), r1);
            const auto approx = simulate_general(Exponential{th}, PoissonUnitJump{lam}, hh, n, x0, r2, m);
            double sup = 0;
            for (std::size_t k = 0; k < n; ++k) {
                const double t = hh * k;
                double v = x0 * std::exp(-th * t);
                for (double s : T)
                    if (s <= t) v += std::exp(-th * (t - s));
                sup = std::max(sup, std::abs(approx.values[k] - v));
            }
            e += sup / paths;
        }
        errs.push_back(e);
    }
    bool halving = true;
    std::string ratios;
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double q = errs[i] / errs[i - 1];
        halving = halving && q > 0.35 && q < 0.65;
        ratios += (i > 1 ? " " : "") + sci(q);
    }
    return {mismatch == 0 && closed <= 1e-15 && halving,
            "zero-noise mismatches " + std::to_string(mismatch) + ", closed-form err " + sci(closed) + ", error ratios per doubling " +
                ratios};
}

// 7. empirical codifference of Gaussian OU; alpha = 2 vs covariance
Outcome codifference() {
    RandomStream rng(7001);
    const auto p = simulate_ou(1.0, BrownianStd{}, 1.0, 10000, 0.0, rng);
    double emp = 0;
    for (std::size_t k : {1, 2, 3}) emp = std::max(emp, std::abs(codiff_empirical_normalized(p.values, 0.01, k) - std::exp(-double(k))));
    double gauss = 0;
    for (const KernelSpec& kr : {KernelSpec{Cosine{1}}, KernelSpec{Exponential{0.8}}, KernelSpec{QuadraticGaussian{0.5}}})
        for (double t : {0.5, 1.0, 3.0})
            for (double k : {0.0, 0.5, 1.0, 2.0})
                gauss = std::max(gauss, std::abs(codiff_theoretical(kr, 2.0, 1.0, k, t) - 2 * acf_theoretical(kr, 0.0, t, k)));
    return {emp <= 0.1 && gauss <= 1e-6, "empirical max err " + sci(emp) + ", alpha=2 vs 2 cov " + sci(gauss)};
}

// 8. KS calibration under a Gaussian null and power against alpha = 1.5
Outcome gof() {
    const CdfFn F = stable_reference_cdf(2.0);
    const StatFn ks = [&](std::span<const double> y) { return ks_stat(y, F); };
    const int trials = 200;
    int reject = 0;
    for (int t = 0; t < trials; ++t) {
        RandomStream rng = RandomStream::derive(8001, "accept-h0", t);
        std::vector<double> x(500);
        for (double& v : x) v = rng.normal();
        reject += bootstrap_pvalue(ks, x, MomentStandardization{}, 2.0, 199, derive_seed(8001, "accept-h0-boot", t)) < 0.05;
    }
    const double rate = double(reject) / trials;
    std::vector<double> pv;
    for (int t = 0; t < 21; ++t) {
        RandomStream rng = RandomStream::derive(8002, "accept-h1", t);
        std::vector<double> x(2000);
        for (double& v : x) v = sample_stable({1.5, 1.0, 0.0, 0.0}, rng);
        pv.push_back(bootstrap_pvalue(ks, x, MomentStandardization{}, 2.0, 199, derive_seed(8002, "accept-h1-boot", t)));
    }
    const double med = quantile(pv, 0.5);
    return {rate >= 0.02 && rate <= 0.09 && med < 0.05, "null rejection rate " + sci(rate) + ", median p under alpha=1.5 " + sci(med)};
}

// 9. posterior for one Gaussian cosine path
Outcome bayes() {
    RandomStream rng(9001);
    const auto v = simulate_cosine(1.0, 2.0, 1.0, 2000, {}, rng).values;
    McmcConfig c;
    c.n_iter = 30000;
    c.burn_in = 10000;
    c.thin = 10;
    c.seed = 9002;
    const Eta truth{2.0, sigma_eps_cosine(2.0, 1.0, 1.0), 1.0};
    const auto r = mcmc_sample(v, 1.0, c, truth).summary;
    const double err = std::abs(r.a.mean - 1.0);
    const bool covers = r.a.lower <= 1.0 && 1.0 <= r.a.upper;
    return {err <= 0.01 && covers, "|mean a - 1| " + sci(err) + ", interval [" + format_double(r.a.lower) + ", " +
                                       format_double(r.a.upper) + "], alpha interval [" + format_double(r.alpha.lower) + ", " +
                                       format_double(r.alpha.upper) + "]"};
}

} // namespace

int main() {
    set_warning_sink([](std::string_view) {});
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"noise-scale table", noise_scale_table}, {"MLE study", mle_study},
        {"stable density", stable_density},       {"stationarity and Markov", stationarity_markov},
        {"triplet closed forms", triplets},       {"simulation exactness", simulation},
        {"codifference", codifference},           {"GoF calibration and power", gof},
        {"Bayesian recovery", bayes},
    };
    int failed = 0, i = 0;
    for (const auto& [name, fn] : criteria) {
        ++i;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i, name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
