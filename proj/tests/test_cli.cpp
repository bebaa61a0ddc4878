#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace nira;
using namespace nira::test;
namespace fs = std::filesystem;

namespace {

fs::path scratch()
{
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("nira_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args, const std::string& log = "/dev/null")
{
    const std::string cmd = std::string(NIRA_CLI_PATH) + " " + args + " >" + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string out(const std::string& name) { return (scratch() / name).string(); }

// Stats text without wall-clock content.
std::string without_timing(const std::string& stats)
{
    std::istringstream in(stats);
    std::string line, kept;
    bool in_timing = false;
    while (std::getline(in, line)) {
        if (line.rfind("table timing", 0) == 0) in_timing = true;
        if (!in_timing && line.rfind("timing.", 0) != 0) kept += line + '\n';
        if (in_timing && line == "end") in_timing = false;
    }
    return kept;
}

} // namespace

TEST(Cli, HelpListsDefaults)
{
    const std::string log = out("help.txt");
    EXPECT_EQ(run("extract --help", log), 0);
    const std::string h = slurp(log);
    EXPECT_NE(h.find("--depth"), std::string::npos);
    EXPECT_NE(h.find("[9]"), std::string::npos) << h;
    EXPECT_NE(h.find("[up]"), std::string::npos) << h;
}

TEST(Cli, UsageErrorsExitTwo)
{
    const std::string w = asset("sphere_sine.net");
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("extract --weights " + w), 2); // missing --out
    EXPECT_EQ(run("extract --weights " + w + " --depth 10 --out " + out("d10.obj")), 2);
    EXPECT_EQ(run("extract --weights " + w + " --method bogus --out " + out("bogus.obj")), 2);
    EXPECT_EQ(run("extract --weights /nonexistent.net --out " + out("missing.obj")), 2);
    EXPECT_EQ(run("raycast --weights " + w + " --up 0,0,1 --out " + out("bad.pgm")), 2);
    EXPECT_EQ(run("eval-dist --weights " + w + " --sample-k 1 --out " + out("k1.stats")), 2);
    EXPECT_FALSE(fs::exists(out("d10.obj")));
}

TEST(Cli, DivergenceExitsThree)
{
    const std::string vol = out("div.f32");
    ASSERT_EQ(run("synth --field wave --dims 6,6,6 --out " + vol), 0);
    EXPECT_EQ(run("train --volume " + vol + " --dims 6,6,6 --activation relu --width 8 --depth 3 --epochs 10 --lr 1e300 --out " +
                  out("div.net")),
              3);
}

TEST(Cli, SynthTrainExtractPipeline)
{
    const std::string vol = out("pipe.f32"), net = out("pipe.net"), obj = out("pipe.obj");
    ASSERT_EQ(run("synth --field sphere --dims 16,16,16 --out " + vol), 0);
    EXPECT_EQ(fs::file_size(vol), 16u * 16u * 16u * 4u);
    ASSERT_EQ(run("train --volume " + vol + " --dims 16,16,16 --width 16 --depth 3 --epochs 20 --omega0 10 --out " + net), 0);
    EXPECT_TRUE(fs::exists(net + ".stats"));
    ASSERT_EQ(run("extract --weights " + net + " --truth --out " + obj), 0);
    const TriangleMesh m = import_obj(obj);
    EXPECT_GT(m.triangles.size(), 0u);
    const std::string st = slurp(obj + ".stats");
    EXPECT_EQ(st.rfind("nira-stats-v1\n", 0), 0u);
    EXPECT_NE(st.find("score.fnr"), std::string::npos) << st;
}

TEST(Cli, ExtractIsByteIdenticalAcrossRunsAndThreads)
{
    const std::string w = asset("torus_elu.net");
    for (const std::string method : {"up", "ra-full", "ra-ua", "dense"}) {
        const std::string a = out("a_" + method + ".obj"), b = out("b_" + method + ".obj"), c = out("c_" + method + ".obj");
        const std::string common = "extract --weights " + w + " --depth 12 --method " + method;
        ASSERT_EQ(run(common + " --threads 1 --out " + a), 0);
        ASSERT_EQ(run(common + " --threads 1 --out " + b), 0);
        ASSERT_EQ(run(common + " --threads 4 --out " + c), 0);
        EXPECT_EQ(slurp(a), slurp(b)) << method;
        EXPECT_EQ(slurp(a), slurp(c)) << method;
        EXPECT_EQ(slurp(a + ".stats"), slurp(c + ".stats")) << method;
    }
}

TEST(Cli, RaycastIsByteIdenticalAcrossThreads)
{
    const std::string w = asset("sphere_sine.net");
    const std::string a = out("a.pgm"), b = out("b.pgm");
    const std::string common = "raycast --weights " + w + " --width 40 --height 30";
    ASSERT_EQ(run(common + " --threads 1 --out " + a), 0);
    ASSERT_EQ(run(common + " --threads 3 --out " + b), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(slurp(a + ".stats"), slurp(b + ".stats"));
    const Pgm16 img = read_pgm(a);
    EXPECT_EQ(img.width, 40u);
    EXPECT_EQ(img.height, 30u);
}

TEST(Cli, EvalDistIsByteIdenticalAcrossThreads)
{
    const std::string w = asset("gaussians_sine.net");
    const std::string a = out("a.dist"), b = out("b.dist");
    const std::string common = "eval-dist --weights " + w + " --blocks 4 --samples 100000";
    ASSERT_EQ(run(common + " --threads 1 --out " + a), 0);
    ASSERT_EQ(run(common + " --threads 2 --out " + b), 0);
    const std::string s = slurp(a);
    EXPECT_EQ(s, slurp(b));
    EXPECT_NE(s.find("table kl_mean"), std::string::npos);
    EXPECT_NE(s.find("row sample"), std::string::npos);
}

TEST(Cli, BenchAllReportsSevenMethods)
{
    const std::string w = asset("wave_relu.net");
    const std::string a = out("a.bench"), b = out("b.bench");
    ASSERT_EQ(run("bench --weights " + w + " --all --out " + a), 0);
    ASSERT_EQ(run("bench --weights " + w + " --all --out " + b), 0);
    const std::string s = slurp(a);
    std::istringstream in(s);
    std::string line;
    bool in_methods = false;
    std::vector<std::string> methods;
    while (std::getline(in, line)) {
        if (line.rfind("table methods", 0) == 0) in_methods = true;
        else if (in_methods && line == "end") in_methods = false;
        else if (in_methods) methods.push_back(line.substr(4, line.find(' ', 4) - 4));
    }
    EXPECT_EQ(methods, (std::vector<std::string>{"up", "ra-full", "ra-fixed", "ra-truncate", "ra-append", "ra-ua", "dense"}));
    EXPECT_NE(s.find("table timing"), std::string::npos);
    EXPECT_EQ(without_timing(s), without_timing(slurp(b)));
}
