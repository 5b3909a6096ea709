#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gou/gou.hpp"

using namespace gou;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(GOU_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, ""};
    std::string out;
    char buf[4096];
    for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, n);
    const int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("gou_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("kernel --kernel cosine:a=1 --bogus 1").code, 2);
    EXPECT_EQ(run("kernel --kernel wavelet").code, 2);
    EXPECT_EQ(run("stable --alpha 2.5").code, 2);
    EXPECT_EQ(run("fit-mle --input " + path("missing.csv")).code, 2);
    {
        std::ofstream f(path("flat.csv"));
        write_csv(f, {"v"}, {std::vector<double>(40, 1.0)});
    }
    EXPECT_EQ(run("gof --input " + path("flat.csv") + " --boots 99").code, 3);
}

TEST_F(Cli, KernelMatchesLibrary) {
    const auto r = run("kernel --kernel quadratic:a=0.7 --t-max 2 --points 5");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    const auto s = read_series(in, "rho");
    ASSERT_EQ(s.values.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(s.values[i], eval_kernel(parse_kernel("quadratic:a=0.7"), 0.5 * i));
        EXPECT_NEAR(s.values[i], std::exp(-0.7 * std::pow(0.5 * i, 2)), 1e-15);
    }
}

TEST_F(Cli, ConfigReplayIsByteIdentical) {
    const auto first = run("--seed 42 simulate --process general --kernel airy --noise stable:alpha=1.4 --n 200 --h 0.02 --substeps 4 "
                           "--save-config " +
                           path("run.json"));
    ASSERT_EQ(first.code, 0);
    ASSERT_TRUE(fs::exists(path("run.json")));
    const auto again = run("--config " + path("run.json"));
    EXPECT_EQ(again.code, 0);
    EXPECT_EQ(again.out, first.out);
    // a command-line global overrides the saved one
    const auto other = run("--config " + path("run.json") + " --seed 43");
    EXPECT_EQ(other.code, 0);
    EXPECT_NE(other.out, first.out);
}

TEST_F(Cli, ConfigReplayKeepsFlags) {
    const auto first = run("simulate --process cosine --a 2 --zero-noise --v0 1 --v1 0.3 --n 20 --save-config " + path("z.json"));
    ASSERT_EQ(first.code, 0);
    const auto again = run("--config " + path("z.json"));
    EXPECT_EQ(again.out, first.out);
    EXPECT_EQ(run("--config " + path("nothere.json")).code, 2);
}

TEST_F(Cli, OutFileMatchesStdout) {
    const auto a = run("acf --kernel cosine:a=1 --sigma0sq 0.3 --points 11");
    ASSERT_EQ(a.code, 0);
    ASSERT_EQ(run("acf --kernel cosine:a=1 --sigma0sq 0.3 --points 11 --out " + path("acf.csv")).code, 0);
    EXPECT_EQ(slurp(path("acf.csv")), a.out);
}

TEST_F(Cli, ThreadCountDoesNotChangeOutput) {
    const std::string args = "simulate --process ou --noise poisson:lambda=3 --n 100 --h 0.1 --paths 6";
    const auto one = run("--threads 1 " + args);
    const auto four = run("--threads 4 " + args);
    ASSERT_EQ(one.code, 0);
    EXPECT_EQ(one.out, four.out);
}

TEST_F(Cli, TransformChain) {
    std::ofstream(path("px.csv")) << "date,close\n1,100\n2,101\n3,103\n4,102\n5,104\n";
    const auto r = run("transform --input " + path("px.csv") + " --ops log-returns,aggregate:2");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    const auto s = read_series(in);
    const auto want = aggregate_returns(log_returns(std::vector<double>{100, 101, 103, 102, 104}), 2);
    EXPECT_EQ(s.values, want);
    EXPECT_EQ(run("transform --input " + path("px.csv") + " --ops difference").code, 2);
}

TEST_F(Cli, FitMleRecoversFrequency) {
    RandomStream rng(21);
    const auto p = simulate_cosine(1.0, 2.0, 1.0, 1500, {}, rng);
    {
        std::ofstream f(path("path.csv"));
        write_csv(f, {"value"}, {p.values});
    }
    const auto r = run("fit-mle --input " + path("path.csv") + " --format json");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["a_hat"].get<double>(), 1.0, 0.01);
    EXPECT_TRUE(j["converged"].get<bool>());
}

TEST_F(Cli, GofReport) {
    RandomStream rng(22);
    std::vector<double> x(300);
    for (double& v : x) v = sample_stable({1.7, 1.0, 0.0, 0.0}, rng);
    {
        std::ofstream f(path("x.csv"));
        write_csv(f, {"value"}, {x});
    }
    const auto r = run("--seed 3 gof --input " + path("x.csv") + " --alpha0 1.7 --tests ks,ad --boots 99");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string header, ks, ad, extra;
    std::getline(in, header);
    std::getline(in, ks);
    std::getline(in, ad);
    EXPECT_EQ(header, "test,statistic,p_value,alpha0,boots");
    EXPECT_EQ(ks.substr(0, 3), "ks,");
    EXPECT_EQ(ad.substr(0, 3), "ad,");
    EXPECT_FALSE(std::getline(in, extra));
}
