// Drives the installed command-line tool as a subprocess.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

const fs::path kGolden = fs::path(PLANTSITE_TEST_DATA) / "golden";

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args)
{
    const std::string cmd = std::string(PLANTSITE_CLI) + " " + args + " 2>&1";
    Result r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Scratch {
    fs::path path;
    Scratch()
    {
        static std::atomic<int> n{0};
        path = fs::temp_directory_path() / ("plantsite_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
        fs::create_directories(path);
    }
    ~Scratch()
    {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string golden(const std::string& name) { return (kGolden / name).string(); }

}  // namespace

TEST(Cli, EndToEndReproducesGoldenFiles)
{
    Scratch dir;
    auto r = run("synth --seed 42 --region 0,0,1060,530 --compartments 60 --villages 2 --out " + dir / "land");
    ASSERT_EQ(r.code, 0) << r.out;
    for (const char* f : {"grids.csv", "compartments.json", "villages.csv"})
        EXPECT_EQ(slurp(dir / "land/" + f), slurp(golden("landscape/") + f)) << f;

    r = run("train --landscape " + dir / "land" + " --out-model " + dir / "model.json");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("precision"), std::string::npos);
    EXPECT_NE(r.out.find("recall"), std::string::npos);
    EXPECT_EQ(slurp(dir / "model.json"), slurp(golden("model.json")));

    r = run("score --landscape " + dir / "land" + " --model " + dir / "model.json" + " --out " + dir / "scores.csv");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(slurp(dir / "scores.csv"), slurp(golden("scores.csv")));

    r = run("--threads 4 score --landscape " + dir / "land" + " --model " + dir / "model.json" + " --out " +
            dir / "scores4.csv");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(slurp(dir / "scores4.csv"), slurp(golden("scores.csv")));

    r = run("sweep --scores " + dir / "scores.csv" + " --out " + dir / "sweep.csv");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(slurp(dir / "sweep.csv"), slurp(golden("sweep.csv")));

    r = run("report --scores " + dir / "scores.csv" + " --landscape " + dir / "land" + " --out-dir " + dir / "report");
    ASSERT_EQ(r.code, 0) << r.out;
    for (const char* f : {"descriptives.csv", "distribution.csv", "histogram.csv"})
        EXPECT_EQ(slurp(dir / "report/" + f), slurp(golden("report/") + f)) << f;
}

TEST(Cli, TunePrintsTheMatchingAlpha)
{
    auto r = run("tune --sweep " + golden("sweep.csv") + " --reference 37.5,37.5,12.5,12.5");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.out, "0.5\n");
    r = run("tune --scores " + golden("scores.csv") + " --reference 37.5,37.5,25,0");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.out, "1\n");  // rows 1.0, 0.9, 0.7 and 0.6 all match; the largest wins
}

TEST(Cli, ConfigFileAndFlagPrecedence)
{
    Scratch dir;
    std::ofstream(dir / "run.cfg") << "alpha = 0.5\n";
    auto r = run("--config " + dir / "run.cfg" + " score --landscape " + golden("landscape") + " --model " +
                 golden("model.json") + " --out " + dir / "half.csv");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("medium=12.50 high=12.50"), std::string::npos) << r.out;

    r = run("--config " + dir / "run.cfg" + " --set alpha=0.0 score --alpha 0.9 --landscape " + golden("landscape") +
            " --model " + golden("model.json") + " --out " + dir / "flag.csv");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(slurp(dir / "flag.csv"), slurp(golden("scores.csv")));
}

TEST(Cli, ErrorsExitNonZeroWithOneLineDiagnostic)
{
    auto r = run("frobnicate");
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.out.find("Usage"), std::string::npos) << r.out;

    r = run("score --landscape /no/such/dir --model " + golden("model.json") + " --out /tmp/x.csv");
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(r.out.rfind("plantsite: error:", 0), 0u) << r.out;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);

    r = run("score --landscape " + golden("landscape") + " --model " + golden("model.json") +
            " --out /tmp/x.csv --bogus-flag");
    EXPECT_NE(r.code, 0);

    r = run("--set alpha=3 sweep --scores " + golden("scores.csv"));
    EXPECT_NE(r.code, 0);

    r = run("tune --sweep " + golden("sweep.csv") + " --reference 1,2,3");
    EXPECT_NE(r.code, 0);

    r = run("");
    EXPECT_NE(r.code, 0);
}

TEST(Cli, SweepToStdoutMatchesFile)
{
    Scratch dir;
    auto f = run("sweep --scores " + golden("scores.csv") + " --out " + dir / "s.csv");
    ASSERT_EQ(f.code, 0) << f.out;
    f = run("sweep --scores " + golden("scores.csv"));
    ASSERT_EQ(f.code, 0) << f.out;
    EXPECT_EQ(f.out, slurp(dir / "s.csv"));

    auto r = run("sweep --scores " + golden("scores.csv") + " --alphas 1,0");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.out, "alpha,largely_unsuitable_pct,low_pct,medium_pct,high_pct\n1,37.5,37.5,25,0\n0,37.5,37.5,0,25\n");
}
