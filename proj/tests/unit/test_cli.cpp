#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "netstream/cli.hpp"
#include "netstream/io.hpp"

namespace fs = std::filesystem;
using namespace netstream;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  args.insert(args.begin(), "netstream");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::vector<nlohmann::json> json_lines(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("netstream_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string simulate(const std::string& name, int p = 5, int segments = 2, int seg_len = 40) {
    const auto r = run_cli({"simulate", "--p", std::to_string(p), "--segments", std::to_string(segments),
                            "--seg-len", std::to_string(seg_len), "--seed", "7", "--output", path(name)});
    EXPECT_EQ(r.code, 0) << r.err;
    return path(name);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SimulateIsDeterministic) {
  const auto a = simulate("a.csv");
  const auto b = simulate("b.csv");
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a + ".truth.json"), slurp(b + ".truth.json"));
  EXPECT_TRUE(fs::exists(a + ".truth.json"));
}

TEST_F(CliTest, SimulateRejectsInvalidSpec) {
  EXPECT_EQ(run_cli({"simulate", "--graph", "ws", "--k", "3", "--output", path("x.csv")}).code, 2);
  EXPECT_EQ(run_cli({"simulate", "--p", "4", "--m", "4", "--output", path("x.csv")}).code, 2);
}

TEST_F(CliTest, SeedFallsBackToEnvironment) {
  ::setenv("NETSTREAM_SEED", "7", 1);
  const auto env = run_cli({"simulate", "--p", "4", "--segments", "1", "--seg-len", "10"});
  ::unsetenv("NETSTREAM_SEED");
  const auto flag = run_cli({"simulate", "--p", "4", "--segments", "1", "--seg-len", "10", "--seed", "7"});
  const auto other = run_cli({"simulate", "--p", "4", "--segments", "1", "--seg-len", "10", "--seed", "8"});
  EXPECT_EQ(env.out, flag.out);
  EXPECT_NE(env.out, other.out);
}

TEST_F(CliTest, StreamFromStandardInputMatchesFile) {
  const auto data = simulate("d.csv");
  const auto from_file = run_cli({"stream", "--input", data, "--omit-timing"});
  const auto from_stdin = run_cli({"stream", "--input", "-", "--omit-timing"}, slurp(data));
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(from_file.out, from_stdin.out);
  const auto recs = json_lines(from_file.out);
  ASSERT_EQ(recs.size(), 80u);
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(recs[i]["t"], i + 1);
  EXPECT_EQ(run_cli({"stream", "--input", data, "--omit-timing"}).out, from_file.out);
}

TEST_F(CliTest, MalformedRowIsSkippedWithWarning) {
  const std::string input = "1,2,3\n0.5,1,-1\nfoo,1,2\n2,0,1\n-1,1,0\n";
  const auto r = run_cli({"stream", "--burn-in", "0", "--mode", "ewma"}, input);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
  const auto recs = json_lines(r.out);
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_EQ(recs.back()["t"], 4);
}

TEST_F(CliTest, DimensionChangeIsFatal) {
  const auto r = run_cli({"stream", "--burn-in", "0"}, "1,2\n3,4\n1,2,3\n");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json_lines(r.out).size(), 2u);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST_F(CliTest, ModeParametersAreExclusive) {
  EXPECT_EQ(run_cli({"stream", "--mode", "ewma", "--eta", "0.01"}, "").code, 2);
  EXPECT_EQ(run_cli({"stream", "--mode", "sliding", "--r", "0.9"}, "").code, 2);
  EXPECT_EQ(run_cli({"stream", "--mode", "adaptive", "--h", "10"}, "").code, 2);
  EXPECT_EQ(run_cli({"stream", "--burn-in", "1"}, "").code, 2);
  EXPECT_EQ(run_cli({"stream", "--r-min", "0.99", "--r-max", "0.9"}, "").code, 2);
}

TEST_F(CliTest, ConfigFileAndExplicitFlags) {
  const auto data = simulate("d.csv", 4, 1, 30);
  {
    std::ofstream cfg(path("run.cfg"));
    cfg << "# penalties\nmode = ewma\nr=0.9\nburn_in=5\nomit-timing=true\n";
  }
  const auto from_cfg = run_cli({"stream", "--config", path("run.cfg"), "--input", data});
  ASSERT_EQ(from_cfg.code, 0) << from_cfg.err;
  const auto explicit_flags =
      run_cli({"stream", "--mode", "ewma", "--r", "0.9", "--burn-in", "5", "--omit-timing", "--input", data});
  EXPECT_EQ(from_cfg.out, explicit_flags.out);
  EXPECT_DOUBLE_EQ(json_lines(from_cfg.out).back()["r_t"].get<double>(), 0.9);

  const auto overridden = run_cli({"stream", "--config", path("run.cfg"), "--r", "0.8", "--input", data});
  EXPECT_DOUBLE_EQ(json_lines(overridden.out).back()["r_t"].get<double>(), 0.8);

  const auto map = cli::read_config_file(path("run.cfg"));
  EXPECT_EQ(map.at("burn-in"), "5");
  EXPECT_EQ(map.at("mode"), "ewma");
}

TEST_F(CliTest, EmitFullMatrixAndMetrics) {
  const auto data = simulate("d.csv", 4, 2, 20);
  const auto full = run_cli({"stream", "--input", data, "--emit", "full_matrix"});
  ASSERT_EQ(full.code, 0) << full.err;
  const auto rec = json_lines(full.out).back();
  EXPECT_EQ(rec["Z"].size(), 4u);
  EXPECT_EQ(rec["S"].size(), 4u);
  const auto metrics = run_cli({"stream", "--input", data, "--emit", "metrics", "--truth", data + ".truth.json"});
  ASSERT_EQ(metrics.code, 0) << metrics.err;
  const auto m = json_lines(metrics.out).back();
  EXPECT_TRUE(m.contains("f_score"));
  EXPECT_GE(m["f_score"].get<double>(), 0.0);
  EXPECT_NE(run_cli({"stream", "--input", data, "--emit", "metrics"}).code, 0);
}

TEST_F(CliTest, EvaluateOracleAndFrozenRuns) {
  const auto data = simulate("d.csv", 5, 2, 40);
  std::ifstream ts(data + ".truth.json");
  const GroundTruth truth = io::read_ground_truth(ts);
  std::ofstream oracle_out(path("oracle.jsonl")), frozen_out(path("frozen.jsonl"));
  for (long t = 0; t < 80; ++t) {
    const auto& seg = truth.segments[truth.segment_at(t)];
    nlohmann::json o{{"t", t + 1}, {"edges", nlohmann::json::array()}};
    for (auto [a, b] : seg.graph.edges) o["edges"].push_back({a, b, 1.0});
    oracle_out << o.dump() << '\n';
    nlohmann::json f{{"t", t + 1}, {"edges", nlohmann::json::array()}};
    for (auto [a, b] : truth.segments[0].graph.edges) f["edges"].push_back({a, b, 1.0});
    frozen_out << f.dump() << '\n';
  }
  oracle_out.close();
  frozen_out.close();

  const auto r = run_cli({"evaluate", "--truth", data + ".truth.json", "--run", "oracle=" + path("oracle.jsonl"),
                          "--run", "frozen=" + path("frozen.jsonl"), "--format", "jsonl"});
  ASSERT_EQ(r.code, 0) << r.err;
  int frozen_after_change = 0;
  for (const auto& j : json_lines(r.out)) {
    if (j.contains("summary")) {
      if (j["summary"]["run"] == "frozen") EXPECT_TRUE(j["summary"]["recovery_time"][0].is_null());
      continue;
    }
    if (j["run"] == "oracle") EXPECT_EQ(j["f_score"], 1.0);
    if (j["run"] == "frozen" && j["t"].get<int>() > 40 && j["f_score"].get<double>() < 1.0) ++frozen_after_change;
  }
  EXPECT_EQ(frozen_after_change, 40);

  const auto csv = run_cli({"evaluate", "--truth", data + ".truth.json", "--run", path("oracle.jsonl")});
  EXPECT_EQ(csv.code, 0);
  EXPECT_EQ(csv.out.rfind("run,t,segment", 0), 0u);
  EXPECT_NE(csv.out.find("# {\"summary\""), std::string::npos);
}

TEST_F(CliTest, EvaluateRejectsMismatch) {
  const auto data = simulate("d.csv", 5, 2, 40);
  std::ofstream short_out(path("short.jsonl"));
  for (int t = 1; t <= 10; ++t) short_out << nlohmann::json{{"t", t}, {"edges", nlohmann::json::array()}}.dump() << '\n';
  short_out.close();
  EXPECT_EQ(run_cli({"evaluate", "--truth", data + ".truth.json", "--run", path("short.jsonl")}).code, 1);

  std::ofstream wide(path("wide.jsonl"));
  for (int t = 1; t <= 80; ++t)
    wide << nlohmann::json{{"t", t}, {"edges", {{0, 9, 0.5}}}}.dump() << '\n';
  wide.close();
  const auto r = run_cli({"evaluate", "--truth", data + ".truth.json", "--run", path("wide.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("t=1"), std::string::npos);
}

TEST_F(CliTest, EvaluateOffline) {
  const auto data = simulate("d.csv", 4, 2, 20);
  const auto r = run_cli({"evaluate", "--truth", data + ".truth.json", "--data", data, "--offline",
                          "--format", "jsonl", "--kernel-candidates", "2,5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json_lines(r.out).front()["run"], "offline");
}

TEST_F(CliTest, TuneSinglePointAndConfigOutput) {
  const auto data = simulate("d.csv", 4, 1, 30);
  const auto r = run_cli({"tune", "--input", data, "--lambda1-grid", "0.2", "--lambda2-grid", "0.1",
                          "--config-out", path("tuned.cfg")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# selected lambda1=0.2 lambda2=0.1"), std::string::npos);
  EXPECT_EQ(slurp(path("tuned.cfg")), "lambda1=0.2\nlambda2=0.1\n");
  const auto map = cli::read_config_file(path("tuned.cfg"));
  EXPECT_EQ(map.at("lambda1"), "0.2");
}

TEST_F(CliTest, TuneIsStableAcrossReruns) {
  const auto data = simulate("d.csv", 4, 1, 30);
  const auto a = run_cli({"tune", "--input", data});
  const auto b = run_cli({"tune", "--input", data});
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 18);
}

TEST(TuneSelection, TieBreaksTowardLargerPenalties) {
  std::vector<cli::TuneRow> rows{{0.1, 0.1, 5.0, 3, true},
                                 {0.4, 0.05, 5.0, 3, true},
                                 {0.4, 0.2, 5.0, 3, true},
                                 {0.2, 0.4, 5.0, 3, true},
                                 {0.05, 0.05, 7.0, 3, true}};
  EXPECT_EQ(cli::select_tuned(rows), 2u);
  rows[4].aic = 4.0;
  EXPECT_EQ(cli::select_tuned(rows), 4u);
}

TEST_F(CliTest, BenchReportsBothModes) {
  const auto r = run_cli({"bench", "--p", "3,4", "--reps", "1", "--seg-len", "10", "--burn-in", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("3,ewma,"), std::string::npos);
  EXPECT_NE(r.out.find("4,adaptive,"), std::string::npos);
  EXPECT_NE(r.out.find("# p=4 adaptive vs ewma mean difference"), std::string::npos);
  EXPECT_EQ(run_cli({"bench", "--p", "1"}).code, 2);
}

TEST_F(CliTest, CheckpointResumeReproducesRun) {
  const auto data = simulate("d.csv", 4, 2, 30);
  const auto full = run_cli({"stream", "--input", data, "--omit-timing", "--burn-in", "10"});
  for (const char* cut : {"6", "37"}) {
    const std::string out = path(std::string("part") + cut + ".jsonl");
    const std::string ck = path(std::string("ck") + cut + ".json");
    const auto first = run_cli({"stream", "--input", data, "--omit-timing", "--burn-in", "10", "--output", out,
                                "--checkpoint", ck, "--max-rows", cut});
    ASSERT_EQ(first.code, 0) << first.err;
    const auto second = run_cli({"stream", "--input", data, "--omit-timing", "--burn-in", "10", "--output", out,
                                 "--checkpoint", ck, "--resume"});
    ASSERT_EQ(second.code, 0) << second.err;
    EXPECT_EQ(slurp(out), full.out) << "cut " << cut;
  }
}

TEST_F(CliTest, FollowModeReadsGrowingFile) {
  const std::string input = path("grow.csv");
  const std::string output = path("grow.jsonl");
  { std::ofstream(input) << ""; }
  std::atomic<bool> done{false};
  std::thread writer([&] {
    for (int t = 0; t < 12; ++t) {
      std::ofstream os(input, std::ios::app);
      os << std::sin(t) << ',' << std::cos(1.3 * t) << ',' << (t % 3) << '\n';
      os.flush();
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    done = true;
  });
  const auto r = run_cli({"stream", "--input", input, "--output", output, "--follow", "--idle-timeout", "1",
                          "--burn-in", "4", "--mode", "ewma"});
  writer.join();
  EXPECT_TRUE(done);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json_lines(slurp(output)).size(), 12u);
}

TEST(ConfigExpansion, InsertsAfterSubcommand) {
  const fs::path cfg = fs::temp_directory_path() / "netstream_expand.cfg";
  { std::ofstream(cfg) << "lambda1=0.3\n"; }
  const auto args = cli::expand_config({"netstream", "stream", "--config", cfg.string(), "--lambda1", "0.1"});
  EXPECT_EQ(args, (std::vector<std::string>{"netstream", "stream", "--lambda1=0.3", "--lambda1", "0.1"}));
  fs::remove(cfg);
}
