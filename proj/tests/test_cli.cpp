#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "postsolve/config.hpp"
#include "postsolve/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct CommandResult {
    int status = -1;
    std::string output;  // stdout + stderr
};

CommandResult run_cli(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / "postsolve_cli_test.log";
    const std::string cmd = std::string(POSTSOLVE_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    CommandResult res;
    res.status = WEXITSTATUS(raw);
    std::ifstream in(log);
    std::ostringstream buf;
    buf << in.rdbuf();
    res.output = buf.str();
    return res;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("postsolve_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
    fs::path p = dir / "config.txt";
    std::ofstream out(p);
    out << body;
    return p;
}

}  // namespace

TEST(Cli, EditIsDeterministicAcrossReruns) {
    fs::path dir = fresh_dir("det");
    auto r1 = run_cli("edit --seed 7 --out " + (dir / "a").string());
    ASSERT_EQ(r1.status, 0) << r1.output;
    auto r2 = run_cli("edit --seed 7 --out " + (dir / "b").string());
    ASSERT_EQ(r2.status, 0) << r2.output;
    EXPECT_EQ(slurp(dir / "a" / "run_7.txt"), slurp(dir / "b" / "run_7.txt"));
    EXPECT_EQ(slurp(dir / "a" / "run_7_trajectory.csv"), slurp(dir / "b" / "run_7_trajectory.csv"));
    auto r3 = run_cli("edit --seed 8 --out " + (dir / "c").string());
    ASSERT_EQ(r3.status, 0);
    EXPECT_NE(slurp(dir / "a" / "run_7.txt"), slurp(dir / "c" / "run_8.txt"));
}

TEST(Cli, RecordEchoReparsesToEffectiveConfig) {
    fs::path dir = fresh_dir("echo");
    auto r = run_cli("edit --seed 3 --out " + dir.string());
    ASSERT_EQ(r.status, 0) << r.output;
    const std::string doc = slurp(dir / "run_3.txt");
    postsolve::ParsedRecord parsed = postsolve::parse_record(doc);
    std::ostringstream echo;
    for (const auto& [k, v] : parsed.config_echo) echo << k << "=" << v << "\n";
    postsolve::Config round = postsolve::Config::from_text(echo.str());
    EXPECT_EQ(round.effective(), parsed.config_echo);
    EXPECT_EQ(parsed.config_echo.at("posterior.seed"), "3");
    // realized mask is persisted for bit-exact replay
    EXPECT_FALSE(parsed.config_echo.at("measurement.kept_indices").empty());
}

TEST(Cli, LargeInjectionWeightWarnsButRuns) {
    fs::path dir = fresh_dir("warn");
    fs::path cfg = write_config(dir, "posterior.w = 0.5\n");
    auto r = run_cli("edit --config " + cfg.string() + " --seed 2 --out " + dir.string());
    EXPECT_EQ(r.status, 0) << r.output;
    EXPECT_NE(r.output.find("warning"), std::string::npos);
    EXPECT_NE(r.output.find("posterior.w"), std::string::npos);
}

TEST(Cli, MissingKeyUsesDocumentedDefault) {
    fs::path dir = fresh_dir("default");
    fs::path cfg = write_config(dir, "posterior.w = 0.1\n");  // posterior.T omitted
    auto r = run_cli("edit --config " + cfg.string() + " --seed 4 --out " + dir.string());
    ASSERT_EQ(r.status, 0) << r.output;
    auto parsed = postsolve::parse_record(slurp(dir / "run_4.txt"));
    EXPECT_EQ(parsed.config_echo.at("posterior.T"), "100");
}

TEST(Cli, FourierIsReconstructionOnly) {
    fs::path dir = fresh_dir("fourier");
    fs::path cfg = write_config(dir,
                                "measurement.operator = fourier\n"
                                "model.dimension = 16\nmodel.rows = 4\nmodel.cols = 4\n"
                                "model.num_components = 1\n"
                                "model.0.mean = 1\nmodel.0.var = 0.1\nmodel.0.weight = 1\nmodel.0.label = 0\n"
                                "run.source_label = 0\nrun.target_label = 0\n");
    auto recon = run_cli("reconstruct --config " + cfg.string() + " --seed 5 --out " + dir.string());
    EXPECT_EQ(recon.status, 0) << recon.output;
    auto edit = run_cli("edit --config " + cfg.string() + " --seed 5 --out " + dir.string());
    EXPECT_NE(edit.status, 0);
    EXPECT_NE(edit.output.find("error"), std::string::npos);
}

TEST(Cli, BatchRunsAppendAggregate) {
    fs::path dir = fresh_dir("batch");
    auto r = run_cli("edit --seed 10 --runs 3 --out " + dir.string());
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir / "run_10.txt"));
    EXPECT_TRUE(fs::exists(dir / "run_11.txt"));
    EXPECT_TRUE(fs::exists(dir / "run_12.txt"));
    const std::string summary = slurp(dir / "summary.txt");
    EXPECT_NE(summary.find("runs=3"), std::string::npos);
    EXPECT_NE(summary.find("mse_to_source="), std::string::npos);
    EXPECT_NE(slurp(dir / "run_10.txt"), slurp(dir / "run_11.txt"));
}

TEST(Cli, EnvOverrideReachesEffectiveConfig) {
    fs::path dir = fresh_dir("env");
    setenv("POSTSOLVE_POSTERIOR_T", "5", 1);
    auto r = run_cli("edit --seed 6 --out " + dir.string());
    unsetenv("POSTSOLVE_POSTERIOR_T");
    ASSERT_EQ(r.status, 0) << r.output;
    auto parsed = postsolve::parse_record(slurp(dir / "run_6.txt"));
    EXPECT_EQ(parsed.config_echo.at("posterior.T"), "5");
}

TEST(Cli, VerifySuites) {
    auto all = run_cli("verify metrics");
    EXPECT_EQ(all.status, 0) << all.output;
    EXPECT_NE(all.output.find("[PASS]"), std::string::npos);
    auto unknown = run_cli("verify bogus");
    EXPECT_NE(unknown.status, 0);
}

TEST(Cli, MissingConfigFileFails) {
    auto r = run_cli("edit --config /nonexistent/config.txt --out /tmp/unused_out");
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.output.find("error"), std::string::npos);
}

TEST(Cli, NonFiniteIterateAbortsWithDiagnostic) {
    fs::path dir = fresh_dir("nonfinite");
    fs::path cfg = write_config(dir, "posterior.h = 1e12\n");  // divergent step size
    auto r = run_cli("edit --config " + cfg.string() + " --seed 1 --out " + dir.string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.output.find("non-finite"), std::string::npos);
}

TEST(Cli, RecordEchoReplaysBitExactly) {
    fs::path dir = fresh_dir("replay");
    auto first = run_cli("edit --seed 17 --out " + (dir / "a").string());
    ASSERT_EQ(first.status, 0) << first.output;
    const std::string doc = slurp(dir / "a" / "run_17.txt");
    auto parsed = postsolve::parse_record(doc);
    std::ofstream cfg(dir / "replay.txt");
    for (const auto& [k, v] : parsed.config_echo) cfg << k << " = " << v << "\n";
    cfg.close();
    // the echoed mask pins the sampled indices, so the rerun replays exactly
    auto second =
        run_cli("edit --config " + (dir / "replay.txt").string() + " --out " + (dir / "b").string());
    ASSERT_EQ(second.status, 0) << second.output;
    EXPECT_EQ(doc, slurp(dir / "b" / "run_17.txt"));
}

TEST(Cli, SweepWritesGrid) {
    fs::path dir = fresh_dir("sweep");
    fs::path cfg = write_config(dir, "posterior.T = 10\n");
    auto r = run_cli("sweep --config " + cfg.string() + " --seed 1 --runs 1 --out " + dir.string());
    ASSERT_EQ(r.status, 0) << r.output;
    const std::string csv = slurp(dir / "sweep.csv");
    EXPECT_NE(csv.find("knob,value,runs"), std::string::npos);
    EXPECT_NE(csv.find("w,0.1,"), std::string::npos);
    EXPECT_NE(csv.find("f,0.7,"), std::string::npos);
    EXPECT_NE(csv.find("T,50,"), std::string::npos);
}
