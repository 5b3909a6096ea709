// Command-line front end. Exit codes: 0 success, 2 usage error, 3 numeric failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gou/gou.hpp"

using namespace gou;
using nlohmann::ordered_json;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string out;
    std::string config;
    std::string save_config;
};

std::vector<double> parse_list(const std::string& s, std::size_t expect, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(detail::parse_double(item, what));
    detail::require(expect == 0 || v.size() == expect,
                    what + " needs " + std::to_string(expect) + " comma-separated numbers");
    return v;
}

/// (t0, t0 + step, ...) with n points.
std::vector<double> grid(double lo, double hi, int n) {
    detail::require(n >= 1, "point count must be >= 1");
    detail::require(hi >= lo, "grid end must not precede its start");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return g;
}

std::vector<double> load_values(const std::string& path, const std::string& column) {
    detail::require(!path.empty(), "--input is required");
    return read_series_file(path, column).values;
}

std::string csv(const std::vector<std::string>& names, const std::vector<std::vector<double>>& cols) {
    std::ostringstream o;
    write_csv(o, names, cols);
    return o.str();
}

std::vector<double> seq(std::size_t n) {
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) k[i] = static_cast<double>(i);
    return k;
}

ordered_json to_json(const ParamSummary& p) {
    return {{"true", p.truth}, {"mean", p.mean}, {"bias", p.bias}, {"se", p.se}, {"lower", p.lower}, {"upper", p.upper}};
}

ordered_json to_json(const ParamPosterior& p) {
    ordered_json j{{"mean", p.mean}, {"sd", p.sd},       {"mc_se", p.mc_se},         {"ess", p.ess},
                   {"lower", p.lower}, {"upper", p.upper}, {"acceptance", p.acceptance}};
    if (p.truth) j["true"] = *p.truth;
    if (p.bias) j["bias"] = *p.bias;
    return j;
}

Eta eta_from_a_alpha_sigma(const std::string& s, const std::string& what) {
    const auto v = parse_list(s, 3, what);
    return Eta{v[1], v[2], v[0]};
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

class Cli {
public:
    Cli() : app_("Generalized Ornstein-Uhlenbeck toolkit: kernels, stable laws, simulation, dependence, inference, goodness of fit") {
        app_.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        app_.set_help_flag("--help", "print help and exit");
        app_.require_subcommand(1);
        app_.fallthrough();
        app_.add_option("--seed", g_.seed, "master seed");
        app_.add_option("--threads", g_.threads, "worker threads (0 = all cores)");
        app_.add_option("--out", g_.out, "output file (default stdout)");
        app_.add_option("--config", g_.config, "replay a saved run configuration (JSON)");
        app_.add_option("--save-config", g_.save_config, "write this run's configuration as JSON");
        add_kernel();
        add_stable();
        add_simulate();
        add_codiff();
        add_acf();
        add_triplet();
        add_fit_mle();
        add_study();
        add_fit_bayes();
        add_gof();
        add_transform();
    }

    int run(int argc, char** argv) {
        std::vector<std::string> args(argv + 1, argv + argc);
        try {
            if (auto cfg = find_config(args)) args = replay_args(RunConfig::load(*cfg), args);
            std::vector<std::string> rev(args.rbegin(), args.rend());
            app_.parse(rev);
        } catch (const CLI::ParseError& e) {
            return app_.exit(e) == 0 ? 0 : 2;
        } catch (const InvalidArgument& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        }
        try {
            CLI::App* sub = app_.get_subcommands().front();
            if (!g_.save_config.empty()) record(sub).save(g_.save_config);
            const std::string text = actions_.at(sub->get_name())();
            if (g_.out.empty()) {
                std::cout << text;
            } else {
                std::ofstream f(g_.out);
                detail::require(f.good(), "cannot write '" + g_.out + "'");
                f << text;
            }
            return 0;
        } catch (const InvalidArgument& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        } catch (const NumericFailure& e) {
            std::cerr << "numeric failure: " << e.what() << '\n';
            return 3;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 3;
        }
    }

private:
    CLI::App* sub(const std::string& name, const std::string& help, std::function<std::string()> action) {
        actions_[name] = std::move(action);
        return app_.add_subcommand(name, help);
    }

    void flag(CLI::App* s, const std::string& name, bool& var, const std::string& help) {
        flags_.insert(name);
        s->add_flag("--" + name, var, help);
    }

    static std::optional<std::string> find_config(const std::vector<std::string>& args) {
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config") {
                detail::require(i + 1 < args.size(), "--config needs a file");
                return args[i + 1];
            }
            if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
        }
        return std::nullopt;
    }

    /// Saved globals, then command-line globals (later wins), then the saved subcommand.
    std::vector<std::string> replay_args(const RunConfig& cfg, const std::vector<std::string>& cmdline) {
        const auto it = cfg.entries.find("subcommand");
        detail::require(it != cfg.entries.end(), "config has no 'subcommand'");
        CLI::App* s = nullptr;
        try {
            s = app_.get_subcommand(it->second);
        } catch (const CLI::OptionNotFound&) {
            throw InvalidArgument("config names unknown subcommand '" + it->second + "'");
        }
        std::vector<std::string> out;
        for (const char* k : {"seed", "threads", "out"})
            if (auto e = cfg.entries.find(k); e != cfg.entries.end()) out.insert(out.end(), {std::string("--") + k, e->second});
        for (std::size_t i = 0; i < cmdline.size(); ++i) {
            if (cmdline[i] == "--config") {
                ++i;
                continue;
            }
            if (cmdline[i].rfind("--config=", 0) == 0) continue;
            out.push_back(cmdline[i]);
        }
        out.push_back(it->second);
        for (const auto& [k, v] : cfg.entries) {
            if (k == "subcommand" || k == "seed" || k == "threads" || k == "out") continue;
            const CLI::Option* o = s->get_option_no_throw("--" + k);
            detail::require(o != nullptr, "config key '" + k + "' is not an option of " + it->second);
            if (flags_.count(o->get_lnames()[0]) > 0) {
                if (v == "true") out.push_back("--" + k);
            } else {
                out.insert(out.end(), {"--" + k, v});
            }
        }
        return out;
    }

    RunConfig record(CLI::App* s) const {
        RunConfig c;
        c.entries["subcommand"] = s->get_name();
        c.entries["seed"] = std::to_string(g_.seed);
        c.entries["threads"] = std::to_string(g_.threads);
        if (!g_.out.empty()) c.entries["out"] = g_.out;
        for (const CLI::Option* o : s->get_options()) {
            if (o->get_lnames().empty() || o->get_lnames()[0] == "help") continue;
            const std::string key = o->get_lnames()[0];
            if (flags_.count(o->get_lnames()[0]) > 0) {
                c.entries[key] = o->count() > 0 ? "true" : "false";
            } else if (o->count() > 0) {
                c.entries[key] = o->results().back();
            } else if (!o->get_default_str().empty()) {
                c.entries[key] = o->get_default_str();
            }
        }
        return c;
    }

    void add_kernel() {
        auto* s = sub("kernel", "evaluate a memory kernel on a grid", [this] {
            const auto k = parse_kernel(kernel_.spec);
            const auto t = grid(0.0, kernel_.t_max, kernel_.points);
            std::vector<double> r(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) r[i] = eval_kernel(k, t[i]);
            return csv({"t", "rho"}, {t, r});
        });
        s->add_option("--kernel", kernel_.spec, "exponential:theta=, cosine:a=, quadratic:a=, airy[:n=]")->required();
        s->add_option("--t-max", kernel_.t_max, "last grid point");
        s->add_option("--points", kernel_.points, "grid points");
    }

    void add_stable() {
        auto* s = sub("stable", "stable density, distribution function, quantiles or draws", [this] {
            const StableParams p{stable_.alpha, stable_.sigma, stable_.beta, stable_.mu};
            validate(p);
            const auto& w = stable_.what;
            if (w == "sample") {
                RandomStream rng = RandomStream::derive(g_.seed, "stable-sample", 0);
                std::vector<double> x(stable_.points);
                for (double& v : x) v = sample_stable(p, rng);
                return csv({"k", "value"}, {seq(x.size()), x});
            }
            if (w == "quantile") {
                const auto q = grid(stable_.p_min, stable_.p_max, stable_.points);
                std::vector<double> x(q.size());
                for (std::size_t i = 0; i < q.size(); ++i) x[i] = stable_quantile(p, q[i]);
                return csv({"p", "quantile"}, {q, x});
            }
            detail::require(w == "pdf" || w == "cdf", "--what must be pdf, cdf, quantile or sample");
            const auto x = grid(stable_.x_min, stable_.x_max, stable_.points);
            std::vector<double> y(x.size());
            const StableDensity d(p);
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = w == "pdf" ? d(x[i]) : stable_cdf(p, x[i]);
            return csv({"x", w}, {x, y});
        });
        s->add_option("--alpha", stable_.alpha, "stability index in (0, 2]")->required();
        s->add_option("--beta", stable_.beta, "skewness in [-1, 1]");
        s->add_option("--sigma", stable_.sigma, "scale");
        s->add_option("--mu", stable_.mu, "location");
        s->add_option("--what", stable_.what, "pdf, cdf, quantile or sample");
        s->add_option("--x-min", stable_.x_min, "first x");
        s->add_option("--x-max", stable_.x_max, "last x");
        s->add_option("--p-min", stable_.p_min, "first probability (quantile)");
        s->add_option("--p-max", stable_.p_max, "last probability (quantile)");
        s->add_option("--points", stable_.points, "grid points or sample size");
    }

    void add_simulate() {
        auto* s = sub("simulate", "simulate paths; CSV k,t,value (path,k,t,value for several paths)", [this] {
            auto& o = sim_;
            SimOptions so;
            so.zero_noise = o.zero_noise;
            detail::require(o.paths >= 1, "--paths must be >= 1");
            auto gen = [&](RandomStream& rng) {
                if (o.process == "cosine") {
                    CosineStart st{o.v0, o.v1, o.stable_start};
                    return simulate_cosine(o.a, o.alpha, o.h, o.n, st, rng, so);
                }
                if (o.process == "quadratic") return simulate_quadratic(o.a, o.alpha, o.h, o.n, o.v0, rng, so);
                if (o.process == "ou") return simulate_ou(o.theta, parse_noise(o.noise), o.h, o.n, o.v0, rng, so);
                if (o.process == "general")
                    return simulate_general(parse_kernel(o.kernel), parse_noise(o.noise), o.h, o.n, o.v0, rng, o.substeps, so);
                throw InvalidArgument("--process must be ou, cosine, quadratic or general");
            };
            const auto paths = simulate_batch(o.paths, g_.seed, g_.threads, gen);
            std::vector<double> pid, k, t, v;
            for (std::size_t p = 0; p < paths.size(); ++p)
                for (std::size_t i = 0; i < paths[p].values.size(); ++i) {
                    pid.push_back(static_cast<double>(p));
                    k.push_back(static_cast<double>(i));
                    t.push_back(paths[p].h * static_cast<double>(i));
                    v.push_back(paths[p].values[i]);
                }
            if (o.paths == 1) return csv({"k", "t", "value"}, {k, t, v});
            return csv({"path", "k", "t", "value"}, {pid, k, t, v});
        });
        s->add_option("--process", sim_.process, "ou, cosine, quadratic or general")->required();
        s->add_option("--kernel", sim_.kernel, "kernel for the general integrator");
        s->add_option("--noise", sim_.noise, "brownian, stable:alpha=, poisson:lambda= (ou, general)");
        s->add_option("--theta", sim_.theta, "OU rate");
        s->add_option("--a", sim_.a, "cosine / quadratic parameter");
        s->add_option("--alpha", sim_.alpha, "stability index (cosine, quadratic)");
        s->add_option("--h", sim_.h, "step size");
        s->add_option("--n", sim_.n, "path length");
        s->add_option("--v0", sim_.v0, "initial value");
        s->add_option("--v1", sim_.v1, "second value of the cosine recursion");
        flag(s, "stable-start", sim_.stable_start, "draw the two cosine start values from S_alpha(1)");
        s->add_option("--substeps", sim_.substeps, "grid refinement of the general integrator");
        s->add_option("--paths", sim_.paths, "number of independent paths");
        flag(s, "zero-noise", sim_.zero_noise, "replace noise by zero");
    }

    void add_codiff() {
        auto* s = sub("codiff", "codifference by lag: empirical from --input, or theoretical from --kernel", [this] {
            auto& o = cod_;
            std::vector<double> k, c;
            if (!o.input.empty()) {
                const auto v = load_values(o.input, o.column);
                detail::require(o.max_lag >= 0 && static_cast<std::size_t>(o.max_lag) < v.size(), "--max-lag must be < series length");
                for (int j = 0; j <= o.max_lag; ++j) {
                    k.push_back(j);
                    c.push_back(o.normalized ? codiff_empirical_normalized(v, o.s, j) : codiff_empirical(v, o.s, j).real);
                }
            } else {
                detail::require(!o.kernel.empty(), "codiff needs --input or --kernel");
                const auto kr = parse_kernel(o.kernel);
                const double t = o.t.value_or(o.step);
                for (int j = 0; j <= o.max_lag; ++j) {
                    k.push_back(j);
                    c.push_back(o.normalized ? codiff_theoretical_normalized(kr, o.alpha, o.s, j * o.step, t)
                                             : codiff_theoretical(kr, o.alpha, o.s, j * o.step, t));
                }
            }
            return csv({"k", "codiff"}, {k, c});
        });
        s->add_option("--input", cod_.input, "series file (empirical)");
        s->add_option("--column", cod_.column, "value column name or index");
        s->add_option("--kernel", cod_.kernel, "kernel (theoretical)");
        s->add_option("--alpha", cod_.alpha, "stability index in (1, 2] (theoretical)");
        s->add_option("--s", cod_.s, "characteristic-function argument");
        s->add_option("--max-lag", cod_.max_lag, "largest lag in steps");
        s->add_option("--step", cod_.step, "time per lag step (theoretical)");
        s->add_option("--t", cod_.t, "reference time (theoretical; default one step)");
        flag(s, "normalized", cod_.normalized, "divide by the lag-0 value");
    }

    void add_acf() {
        auto* s = sub("acf", "Gaussian-noise autocovariance gamma(t, t+h) on a grid of h", [this] {
            const auto k = parse_kernel(acf_.kernel);
            const auto h = grid(0.0, acf_.max_h, acf_.points);
            std::vector<double> g(h.size());
            for (std::size_t i = 0; i < h.size(); ++i) g[i] = acf_theoretical(k, acf_.sigma0sq, acf_.t, h[i]);
            return csv({"h", "acf"}, {h, g});
        });
        s->add_option("--kernel", acf_.kernel, "kernel spec")->required();
        s->add_option("--sigma0sq", acf_.sigma0sq, "variance of V(0)");
        s->add_option("--t", acf_.t, "reference time");
        s->add_option("--max-h", acf_.max_h, "largest lag");
        s->add_option("--points", acf_.points, "grid points");
    }

    void add_triplet() {
        auto* s = sub("triplet", "generating triplet of V(t) for unit-jump Poisson noise; CSV quantity,value", [this] {
            auto& o = trip_;
            const LevyTriplet L{o.G, o.beta, o.lambda};
            TripletSummary ts;
            if (o.process == "ou") {
                ts = triplet_ou_poisson(o.theta, L, o.v0, o.t);
            } else if (o.process == "cosine") {
                ts = triplet_cosine_poisson(o.a, L, o.v0, o.t);
            } else {
                detail::require(o.process == "general", "--process must be ou, cosine or general");
                detail::require(!o.kernel.empty(), "--process general needs --kernel");
                ts = triplet_generic(parse_kernel(o.kernel), L, o.v0, o.t);
            }
            std::ostringstream out;
            out << "quantity,value\n";
            out << "A_t," << format_double(ts.A_t) << "\n";
            out << "gamma_t," << format_double(ts.gamma_t) << "\n";
            out << "total_mass," << format_double(ts.total_mass) << "\n";
            if (!o.nu.empty()) {
                const auto lu = parse_list(o.nu, 2, "--nu-interval");
                out << "nu[" << format_double(lu[0]) << ";" << format_double(lu[1]) << ")," << format_double(ts.nu_on(lu[0], lu[1]))
                    << "\n";
            }
            return out.str();
        });
        s->add_option("--process", trip_.process, "ou, cosine or general")->required();
        s->add_option("--kernel", trip_.kernel, "kernel for --process general");
        s->add_option("--G", trip_.G, "Gaussian variance rate");
        s->add_option("--beta", trip_.beta, "drift");
        s->add_option("--lambda", trip_.lambda, "jump rate");
        s->add_option("--theta", trip_.theta, "OU rate");
        s->add_option("--a", trip_.a, "cosine frequency");
        s->add_option("--v0", trip_.v0, "initial value");
        s->add_option("--t", trip_.t, "time");
        s->add_option("--nu-interval", trip_.nu, "l,u: report the jump measure of [l, u)");
    }

    void add_fit_mle() {
        auto* s = sub("fit-mle", "maximum-likelihood fit of the cosine process", [this] {
            auto& o = mle_;
            const auto v = load_values(o.input, o.column);
            MleOptions mo;
            mo.grid_points = o.grid;
            mo.starts = o.starts;
            if (o.fix_alpha) mo.fix_alpha = *o.fix_alpha;
            std::optional<Eta> init;
            if (!o.init.empty()) init = eta_from_a_alpha_sigma(o.init, "--init");
            const auto e = fit_mle(v, o.h, init, mo);
            if (o.format == "json")
                return dump({{"alpha_hat", e.alpha_hat}, {"sigma_eps_hat", e.sigma_eps_hat}, {"a_hat", e.a_hat},
                             {"neg_log_lik", e.neg_log_lik}, {"converged", e.converged}, {"iterations", e.iterations}});
            detail::require(o.format == "csv", "--format must be csv or json");
            std::ostringstream out;
            out << "parameter,estimate\n"
                << "alpha," << format_double(e.alpha_hat) << "\nsigma_eps," << format_double(e.sigma_eps_hat) << "\na,"
                << format_double(e.a_hat) << "\nneg_log_lik," << format_double(e.neg_log_lik) << "\nconverged,"
                << (e.converged ? 1 : 0) << "\niterations," << e.iterations << "\n";
            return out.str();
        });
        s->add_option("--input", mle_.input, "series file")->required();
        s->add_option("--column", mle_.column, "value column name or index");
        s->add_option("--h", mle_.h, "sampling step");
        s->add_option("--init", mle_.init, "a,alpha,sigma starting point");
        s->add_option("--fix-alpha", mle_.fix_alpha, "hold alpha fixed");
        s->add_option("--grid", mle_.grid, "frequency seeds on (0, pi/h)");
        s->add_option("--starts", mle_.starts, "seeds refined by the simplex");
        s->add_option("--format", mle_.format, "csv or json");
    }

    void add_study() {
        auto* s = sub("study", "simulate-and-fit replication study of the cosine process", [this] {
            auto& o = study_;
            StudyConfig c;
            c.alpha = o.alpha;
            c.a = o.a;
            c.n = o.n;
            c.h = o.h;
            c.replications = o.reps;
            c.seed = g_.seed;
            c.threads = g_.threads;
            const auto r = run_study(c);
            std::cerr << "study: " << r.used << " used, " << r.failed << " failed, " << r.not_converged << " not converged\n";
            if (o.format == "json")
                return dump({{"alpha", to_json(r.alpha)}, {"sigma_eps", to_json(r.sigma)}, {"a", to_json(r.a)},
                             {"used", r.used}, {"failed", r.failed}, {"not_converged", r.not_converged}});
            detail::require(o.format == "csv", "--format must be csv or json");
            std::ostringstream out;
            out << "parameter,true,mean,bias,se,lower,upper\n";
            for (auto [name, p] : {std::pair{"alpha", &r.alpha}, {"sigma_eps", &r.sigma}, {"a", &r.a}})
                out << name << "," << format_double(p->truth) << "," << format_double(p->mean) << "," << format_double(p->bias)
                    << "," << format_double(p->se) << "," << format_double(p->lower) << "," << format_double(p->upper) << "\n";
            return out.str();
        });
        s->add_option("--alpha", study_.alpha, "true alpha");
        s->add_option("--a", study_.a, "true frequency");
        s->add_option("--n", study_.n, "path length");
        s->add_option("--h", study_.h, "step");
        s->add_option("--reps", study_.reps, "replications");
        s->add_option("--format", study_.format, "csv or json");
    }

    void add_fit_bayes() {
        auto* s = sub("fit-bayes", "posterior sampling for the cosine process; JSON summary", [this] {
            auto& o = bay_;
            const auto v = load_values(o.input, o.column);
            McmcConfig c;
            c.n_iter = o.iters;
            c.burn_in = o.burn;
            c.thin = o.thin;
            c.seed = g_.seed;
            c.threads = g_.threads;
            c.chains = o.chains;
            c.adapt = !o.no_adapt;
            const auto sc = parse_list(o.scales, 3, "--scales");
            c.proposal_scales = {sc[0], sc[1], sc[2]};
            if (!o.init.empty()) c.init = eta_from_a_alpha_sigma(o.init, "--init");
            std::optional<Eta> truth;
            if (!o.truth.empty()) truth = eta_from_a_alpha_sigma(o.truth, "--truth");
            const auto r = mcmc_sample(v, o.h, c, truth);
            if (!o.chains_prefix.empty())
                for (std::size_t i = 0; i < r.chains.size(); ++i) {
                    const std::string path = o.chains_prefix + "_chain" + std::to_string(i) + ".csv";
                    std::ofstream f(path);
                    detail::require(f.good(), "cannot write '" + path + "'");
                    f << chain_trace_csv(r.chains[i], c.thin, c.burn_in);
                }
            return dump({{"alpha", to_json(r.summary.alpha)},
                         {"sigma_eps", to_json(r.summary.sigma)},
                         {"a", to_json(r.summary.a)},
                         {"init", {{"alpha", r.init.alpha}, {"sigma_eps", r.init.sigma}, {"a", r.init.a}}},
                         {"all_rejected", r.summary.all_rejected},
                         {"iterations", c.n_iter},
                         {"burn_in", c.burn_in},
                         {"thin", c.thin},
                         {"chains", c.chains}});
        });
        s->add_option("--input", bay_.input, "series file")->required();
        s->add_option("--column", bay_.column, "value column name or index");
        s->add_option("--h", bay_.h, "sampling step");
        s->add_option("--iters", bay_.iters, "iterations per chain");
        s->add_option("--burn", bay_.burn, "burn-in iterations");
        s->add_option("--thin", bay_.thin, "keep every thin-th draw");
        s->add_option("--chains", bay_.chains, "independent chains");
        s->add_option("--scales", bay_.scales, "alpha,sigma,a proposal standard deviations");
        s->add_option("--init", bay_.init, "a,alpha,sigma start (default: maximum likelihood)");
        s->add_option("--truth", bay_.truth, "a,alpha,sigma for bias columns");
        flag(s, "no-adapt", bay_.no_adapt, "keep proposal scales fixed during burn-in");
        s->add_option("--chains-prefix", bay_.chains_prefix, "write PREFIX_chainI.csv traces");
    }

    void add_gof() {
        auto* s = sub("gof", "goodness of fit against a symmetric stable law; CSV test,statistic,p_value,alpha0,boots", [this] {
            auto& o = gof_;
            const auto x = load_values(o.input, o.column);
            GofOptions go;
            go.boots = o.boots;
            go.calibration_draws = o.calibration;
            go.seed = g_.seed;
            go.threads = g_.threads;
            go.tests.clear();
            std::stringstream ss(o.tests);
            for (std::string t; std::getline(ss, t, ',');) go.tests.push_back(t);
            std::optional<StableParams> fitted;
            double alpha0;
            if (o.alpha0 == "mle") {
                fitted = fit_symmetric_stable(x);
                alpha0 = fitted->alpha;
                std::cerr << "gof: fitted alpha " << format_double(fitted->alpha) << ", sigma " << format_double(fitted->sigma)
                          << ", mu " << format_double(fitted->mu) << "\n";
            } else {
                alpha0 = detail::parse_double(o.alpha0, "--alpha0");
            }
            if (o.standardize == "stable") {
                StableStandardization st;
                if (o.sigma) {
                    st.sigma = *o.sigma;
                } else {
                    detail::require(fitted.has_value(), "--standardize stable needs --sigma or --alpha0 mle");
                    st.sigma = fitted->sigma;
                }
                st.mu = o.mu ? *o.mu : fitted ? fitted->mu : 0.0;
                go.mode = st;
            } else {
                detail::require(o.standardize == "moment", "--standardize must be moment or stable");
            }
            std::ostringstream out;
            out << "test,statistic,p_value,alpha0,boots\n";
            for (const auto& r : run_gof(x, alpha0, go))
                out << r.name << "," << format_double(r.value) << "," << format_double(r.p_value) << "," << format_double(r.alpha0)
                    << "," << r.boots << "\n";
            return out.str();
        });
        s->add_option("--input", gof_.input, "series file")->required();
        s->add_option("--column", gof_.column, "value column name or index");
        s->add_option("--alpha0", gof_.alpha0, "hypothesized alpha, or 'mle' to plug in a fitted value");
        s->add_option("--tests", gof_.tests, "comma list of ks, ad, mks, mc");
        s->add_option("--boots", gof_.boots, "bootstrap draws");
        s->add_option("--calibration", gof_.calibration, "draws for the quantile-statistic reference values");
        s->add_option("--standardize", gof_.standardize, "moment or stable");
        s->add_option("--sigma", gof_.sigma, "stable scale for --standardize stable");
        s->add_option("--mu", gof_.mu, "stable location for --standardize stable");
    }

    void add_transform() {
        auto* s = sub("transform", "apply log-returns, aggregate:m, difference:lag in the given order; CSV k,value", [this] {
            auto x = load_values(tr_.input, tr_.column);
            std::stringstream ss(tr_.ops);
            for (std::string op; std::getline(ss, op, ',');) {
                const auto colon = op.find(':');
                const std::string name = op.substr(0, colon);
                auto arg = [&] {
                    detail::require(colon != std::string::npos, "'" + name + "' needs an argument, e.g. " + name + ":5");
                    const double v = detail::parse_double(op.substr(colon + 1), name);
                    detail::require(v >= 0 && v == std::floor(v), name + " argument must be a whole number");
                    return static_cast<std::size_t>(v);
                };
                if (name == "log-returns") {
                    x = log_returns(x);
                } else if (name == "aggregate") {
                    x = aggregate_returns(x, arg());
                } else if (name == "difference") {
                    x = difference(x, arg());
                } else {
                    throw InvalidArgument("unknown transform '" + name + "'");
                }
            }
            return csv({"k", "value"}, {seq(x.size()), x});
        });
        s->add_option("--input", tr_.input, "series file")->required();
        s->add_option("--column", tr_.column, "value column name or index");
        s->add_option("--ops", tr_.ops, "e.g. log-returns,aggregate:5 or difference:1,difference:52")->required();
    }

    CLI::App app_;
    Globals g_;
    std::map<std::string, std::function<std::string()>> actions_;
    std::set<std::string> flags_;

    struct {
        std::string spec;
        double t_max = 5.0;
        int points = 101;
    } kernel_;
    struct {
        double alpha = 1.5, beta = 0.0, sigma = 1.0, mu = 0.0;
        std::string what = "pdf";
        double x_min = -5, x_max = 5, p_min = 0.01, p_max = 0.99;
        int points = 101;
    } stable_;
    struct {
        std::string process, kernel = "cosine:a=1", noise = "brownian";
        double theta = 1.0, a = 1.0, alpha = 2.0, h = 1.0, v0 = 0.0, v1 = 0.0;
        std::size_t n = 1000, substeps = 10, paths = 1;
        bool stable_start = false, zero_noise = false;
    } sim_;
    struct {
        std::string input, column, kernel;
        double alpha = 2.0, s = 0.01, step = 1.0;
        std::optional<double> t;
        int max_lag = 20;
        bool normalized = false;
    } cod_;
    struct {
        std::string kernel;
        double sigma0sq = 0.0, t = 1.0, max_h = 5.0;
        int points = 51;
    } acf_;
    struct {
        std::string process, kernel, nu;
        double G = 1.0, beta = 0.0, lambda = 1.0, theta = 1.0, a = 1.0, v0 = 0.0, t = 1.0;
    } trip_;
    struct {
        std::string input, column, init, format = "csv";
        double h = 1.0;
        std::optional<double> fix_alpha;
        int grid = 32, starts = 2;
    } mle_;
    struct {
        double alpha = 2.0, a = 1.0, h = 1.0;
        std::size_t n = 2000;
        int reps = 50;
        std::string format = "csv";
    } study_;
    struct {
        std::string input, column, scales = "0.02,0.02,0.005", init, truth, chains_prefix;
        double h = 1.0;
        int iters = 30000, burn = 10000, thin = 10, chains = 1;
        bool no_adapt = false;
    } bay_;
    struct {
        std::string input, column, alpha0 = "2", tests = "ks,ad,mks,mc", standardize = "moment";
        int boots = 999, calibration = 200;
        std::optional<double> sigma, mu;
    } gof_;
    struct {
        std::string input, column, ops;
    } tr_;
};

} // namespace

int main(int argc, char** argv) {
    Cli cli;
    return cli.run(argc, argv);
}
