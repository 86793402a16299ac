#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run run(const std::string& args)
{
    const std::string err_path = std::string(MACROSIZE_TEST_TMP) + "/cli_stderr.txt";
    const std::string cmd = std::string(MACROSIZE_CLI_PATH) + " " + args + " 2>" + err_path;
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err_path);
    return r;
}

std::size_t count_lines(const std::string& s)
{
    std::size_t n = 0;
    for (char c : s)
        n += c == '\n';
    return n;
}

} // namespace

TEST(Cli, SizeFockPair)
{
    const auto r = run("size --state fock:M=0 --pair fock:M=20 --pg 0.6667");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_NEAR(j["size"].get<double>(), 20.0, 0.1);
    EXPECT_EQ(j["pg"].get<double>(), 0.6667);
    EXPECT_TRUE(j.contains("sigma_max"));
    EXPECT_TRUE(j.contains("p_at_sigma0"));
}

TEST(Cli, SizeCat)
{
    const auto r = run("size --state cat:a2=0,b2=40 --pg 0.6667");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out)["size"].get<double>(), 39.8, 0.02 * 39.8);
}

TEST(Cli, SizeUnreachable)
{
    const auto r = run("size --state dsp:a2=400 --pg 0.95");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["size"].get<double>(), 0.0);
    EXPECT_NEAR(j["p_at_sigma0"].get<double>(), 0.899, 2e-3);
}

TEST(Cli, ParseErrorsExitTwo)
{
    for (const char* args : {"size --state nope:x=1", "size --state fock:M=1", "size --state fock:M=0 --pair fock:M=3 --pg 1.5",
                             "sweep --state dsp:a2=1 --sweep a2=1:2", "size", "bogus",
                             "sweep --state dsp:a2=1 --sweep b2=1:2:3"}) {
        const auto r = run(args);
        EXPECT_EQ(r.code, 2) << args;
        EXPECT_TRUE(r.out.empty()) << args;
        EXPECT_EQ(count_lines(r.err), 1u) << args << ": " << r.err;
    }
}

TEST(Cli, NumericalFailureExitsThree)
{
    const auto r = run("size --state coherent:a2=400 --pair fock:M=0 --cutoff-override 50");
    EXPECT_EQ(r.code, 3);
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(count_lines(r.err), 1u) << r.err;
}

TEST(Cli, SweepCsvIsStable)
{
    const std::string args = "sweep --state cat:a2=0,b2=1 --sweep b2=5:200:6:log";
    const auto a = run(args), b = run(args + " --threads 1");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.find('\r'), std::string::npos);
    std::istringstream in(a.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "param,size,sigma_max,p_at_sigma0");
    double prev_param = 0, prev_size = -1;
    int rows = 0;
    while (std::getline(in, line)) {
        double param, size;
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf", &param, &size), 2) << line;
        EXPECT_GT(param, prev_param);
        EXPECT_GT(size, prev_size);
        prev_param = param;
        prev_size = size;
        ++rows;
    }
    EXPECT_EQ(rows, 6);
}

TEST(Cli, IntegerSweepRoundsAndDedups)
{
    const auto r = run("sweep --state spins:N=1,delta=0.3 --sweep N=1:3:5");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count_lines(r.out), 4u); // header + N = 1, 2, 3
}

TEST(Cli, PgSweepFlatForFock)
{
    const auto r = run("pg-sweep --state fock:M=0 --pair fock:M=10 --sweep pg=0.55:0.95:5 --json");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    ASSERT_EQ(j.size(), 5u);
    for (const auto& row : j)
        EXPECT_NEAR(row["size"].get<double>(), 10.0, 0.05);
}

TEST(Cli, Calibrate)
{
    auto r = run("calibrate --sigma 1 --pg 0.6666666666666666");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out)["size"].get<double>(), 0.8614, 5e-4);
    r = run("calibrate --sigma 0");
    EXPECT_EQ(json::parse(r.out)["size"].get<double>(), 0.0);
    r = run("calibrate --sigma 2.5 --csv");
    EXPECT_EQ(r.out.substr(0, 14), "sigma,pg,size\n");
}

TEST(Cli, PhaseBound)
{
    auto r = run("phase-bound --state fock:M=0 --pair fock:M=20 --E 0.5");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out)["dphi"].get<double>(), 0.0754, 1e-3);
    r = run("phase-bound --state fock:M=0 --pair fock:M=20 --E 1");
    EXPECT_EQ(json::parse(r.out)["dphi"].get<double>(), 0.0);
    r = run("phase-bound --state dsp:a2=400 --E 0.2");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_TRUE(j["unbounded"].get<bool>());
    EXPECT_TRUE(j["dphi"].is_null());
}

TEST(Cli, Dephase)
{
    const auto r = run("dephase --state fock:M=0 --pair fock:M=10 --dphi 0.1");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_NEAR(j["fraction"].get<double>(), std::exp(-0.5), 1e-8);
    EXPECT_LT(j["trace_check"].get<double>(), 1e-10);
}

TEST(Cli, OutFileLeavesStdoutEmpty)
{
    const std::string path = std::string(MACROSIZE_TEST_TMP) + "/cli_out.json";
    std::filesystem::remove(path);
    const auto r = run("calibrate --sigma 1 --out " + path);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_NEAR(json::parse(slurp(path))["size"].get<double>(), 0.8614, 5e-4);
}

TEST(Cli, McCheckPasses)
{
    const auto r = run("mc-check --samples 100000 --seed 7");
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_EQ(count_lines(r.out), 14u);
    EXPECT_NE(r.out.find("seed=7"), std::string::npos);
    const auto scaled = run("mc-check --samples 100000 --seed 7 --sigma-scale 1.5");
    EXPECT_EQ(scaled.code, 0) << scaled.out;
}
