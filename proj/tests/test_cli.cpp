#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cot/cli.hpp"
#include "helpers.hpp"

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cot");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cot::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, NoArgumentsIsUsageError) {
  const auto r = cli({});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("synth"), std::string::npos);
}

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(cli({"phi", "--bogus"}).code, 1);
}

TEST(Cli, HelpSucceeds) { EXPECT_EQ(cli({"--help"}).code, 0); }

TEST(Cli, SynthThenPhi) {
  const auto dir = testing_support::temp_dir("cli_synth");
  const auto csv = (dir / "d.csv").string();
  ASSERT_EQ(cli({"synth", "--counts", "30,20,10,40", "--out", csv}).code, 0);
  const auto r = cli({"phi", "--data", csv, "--schema", csv + ".schema.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  const auto& a = j["attributes"][0];
  EXPECT_EQ(a["contingency"]["n11"], 30);
  EXPECT_EQ(a["contingency"]["n00"], 40);
  EXPECT_NEAR(a["phi"].get<double>(), 0.40825, 1e-5);
  EXPECT_EQ(a["k"], 17);
}

TEST(Cli, TunePhiSidecar) {
  const auto dir = testing_support::temp_dir("cli_tune");
  const auto csv = (dir / "d.csv").string();
  ASSERT_EQ(cli({"synth", "--counts", "30,20,10,40", "--out", csv}).code, 0);
  const auto out = (dir / "tuned.csv").string();
  const auto r = cli({"tune", "--data", csv, "--schema", csv + ".schema.json", "--method", "phi",
                      "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto side = nlohmann::json::parse(slurp(out + ".json"));
  EXPECT_EQ(side["flips"], 17);
  EXPECT_EQ(side["method"], "phi");
  EXPECT_LE(std::fabs(side["phi_after"].get<double>()), 0.01);
  const auto p = cli({"phi", "--data", out, "--schema", csv + ".schema.json"});
  EXPECT_EQ(nlohmann::json::parse(p.out)["attributes"][0]["contingency"]["n11"], 13);
}

TEST(Cli, MetricsAndBaseline) {
  const auto dir = testing_support::temp_dir("cli_metrics");
  const auto csv = dir / "pred.csv";
  std::ofstream(csv) << "y_true,y_pred,y_fair,a\n1,1,1,0\n1,0,1,0\n0,0,0,0\n0,0,0,0\n"
                        "1,1,1,1\n1,1,1,1\n0,1,0,1\n0,0,0,1\n";
  auto r = cli({"metrics", "--data", csv.string(), "--attrs", "a"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(m["spd"].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(m["eod"].get<double>(), 0.5);

  r = cli({"baseline", "--data", csv.string(), "--attr", "a", "--candidate", "y_fair", "--repeats", "3",
           "--out-csv", (dir / "curve.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto b = nlohmann::json::parse(r.out);
  EXPECT_EQ(b["curves"].size(), 15u);
  EXPECT_TRUE(b["curves"][0].contains("candidate"));
  const auto curve_csv = slurp(dir / "curve.csv");
  EXPECT_EQ(std::count(curve_csv.begin(), curve_csv.end(), '\n'), 1 + 15 * 11);
}

TEST(Cli, DataErrorsExitTwo) {
  const auto dir = testing_support::temp_dir("cli_errors");
  EXPECT_EQ(cli({"phi", "--data", (dir / "missing.csv").string(), "--schema", (dir / "none.json").string()}).code, 2);
  const auto csv = dir / "pred.csv";
  std::ofstream(csv) << "y_true,y_pred,a\n1,2,0\n0,0,1\n";
  EXPECT_EQ(cli({"metrics", "--data", csv.string(), "--attrs", "a"}).code, 2);
}

TEST(Cli, ExperimentWritesReport) {
  const auto dir = testing_support::temp_dir("cli_experiment");
  const auto csv = (dir / "d.csv").string();
  ASSERT_EQ(cli({"synth", "--counts", "300,200,100,400", "--out", csv}).code, 0);
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"classifier": {"epochs": 50}, "baseline": {"repeats": 2}})";
  const auto r = cli({"experiment", "--config", cfg.string(), "--data", csv, "--schema",
                      csv + ".schema.json", "--method", "phi", "--attrs", "a", "--runs", "2",
                      "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  EXPECT_EQ(report["per_run"].size(), 2u);
  EXPECT_EQ(report["config_echo"]["classifier"]["epochs"], 50);
  EXPECT_EQ(cli({"experiment", "--data", csv}).code, 1);
}
