#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "trackex/harness.hpp"

using namespace trackex;
using namespace trackex::harness;
namespace fs = std::filesystem;

namespace {

json base_config() {
  return json::parse(R"({
    "environment": {"kind": "piecewise_stationary", "T": 120, "K": 4, "S_true": 2, "seed": 5,
                    "noise": 0.2, "leader_loss_mean": 0.1},
    "S": 2,
    "learners": [
      {"algorithm": "clipped_omd"},
      {"algorithm": "pcs"},
      {"algorithm": "ocs"},
      {"algorithm": "ocs_plus"},
      {"algorithm": "mwu", "params": {"eta": 0.3}},
      {"algorithm": "fixed_share", "params": {"eta": 0.3, "alpha": 0.02}},
      {"algorithm": "projection_update", "params": {"eta": "theorem"}}
    ],
    "verify": true
  })");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("trackex_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(ParseConfig, Defaults) {
  const auto c = parse_config(base_config());
  EXPECT_EQ(c.environment.T, 120);
  EXPECT_EQ(c.S, 2);
  EXPECT_EQ(c.output_dir, "out");
  EXPECT_EQ(c.repetitions, 1);
  EXPECT_EQ(c.format, "csv");
  EXPECT_TRUE(c.verify);
  EXPECT_EQ(c.learners.size(), 7u);
}

TEST(ParseConfig, RejectsUnknownKeysAndParameters) {
  auto j = base_config();
  j["bogus"] = 1;
  EXPECT_THROW(parse_config(j), config_error);
  j = base_config();
  j["environment"]["colour"] = "red";
  EXPECT_THROW(parse_config(j), config_error);
  j = base_config();
  j["learners"][0]["params"] = {{"alpha", 0.1}};
  EXPECT_THROW(parse_config(j), config_error);
  j = base_config();
  j["learners"][3]["params"] = {{"eta", 0.1}};
  EXPECT_THROW(parse_config(j), config_error);
  j = base_config();
  j["learners"][0]["algorithm"] = "hedge";
  EXPECT_THROW(parse_config(j), config_error);
}

TEST(ParseConfig, RejectsInconsistentValues) {
  auto j = base_config();
  j["S"] = 500;
  EXPECT_THROW(parse_config(j), config_error);
  j = base_config();
  j["environment"]["kind"] = "matrix_piecewise";
  EXPECT_THROW(parse_config(j), config_error);
  j = base_config();
  j["learners"] = json::array({{{"algorithm", "pcsp"}}});
  EXPECT_THROW(parse_config(j), config_error);
  j = base_config();
  j["learners"] = json::array();
  EXPECT_THROW(parse_config(j), config_error);
  j = base_config();
  j["format"] = "xml";
  EXPECT_THROW(parse_config(j), config_error);
  j = base_config();
  j["environment"]["T"] = "many";
  EXPECT_THROW(parse_config(j), config_error);
  EXPECT_THROW(load_config("/nonexistent/config.json"), config_error);
}

TEST(ResolveEta, ModesAndDefaults) {
  const Hindsight h{4.0, 9.0, 16.0};
  const int T = 100, K = 4, S = 1;
  EXPECT_EQ(resolve_eta({"clipped_omd", json::object()}, T, K, S, h), theorem_eta_omd(T, K, S));
  EXPECT_EQ(resolve_eta({"pcs", json::object()}, T, K, S, h), hindsight_eta_prod(4.0, T, K, S));
  EXPECT_EQ(resolve_eta({"pcsp", json::object()}, T, K, S, h), hindsight_eta_prod(16.0, T, K, S));
  EXPECT_EQ(resolve_eta({"ocs", json::object()}, T, K, S, h), hindsight_eta_ocs(9.0, T, K, S));
  EXPECT_EQ(resolve_eta({"ocs", {{"eta", "theorem"}}}, T, K, S, h), theorem_eta_omd(T, K, S));
  EXPECT_EQ(resolve_eta({"mwu", {{"eta", 0.25}}}, T, K, S, h), 0.25);
  EXPECT_THROW(resolve_eta({"pcs", {{"eta", "theorem"}}}, T, K, S, h), config_error);
  EXPECT_THROW(resolve_eta({"pcs", {{"eta", 0.9}}}, T, K, S, h), config_error);
  EXPECT_THROW(resolve_eta({"clipped_omd", {{"eta", "hindsight"}}}, T, K, S, h), config_error);
  EXPECT_THROW(resolve_eta({"mwu", {{"eta", -1.0}}}, T, K, S, h), config_error);
}

TEST(RunExperiment, ReportsOnlyForLearnersWithBounds) {
  const auto cfg = parse_config(base_config());
  const auto res = run_experiment(cfg, false);
  ASSERT_EQ(res.repetitions.size(), 1u);
  const auto& rep = res.repetitions[0];
  ASSERT_EQ(rep.learners.size(), 7u);
  for (const auto& l : rep.learners) {
    EXPECT_EQ(l.rows.size(), 120u);
    const bool baseline = l.learner == "mwu" || l.learner == "fixed_share";
    EXPECT_EQ(l.report.has_value(), !baseline) << l.learner;
    if (l.report) EXPECT_TRUE(l.report->pass) << l.learner;
    EXPECT_EQ(l.rows.back().round, 120);
    EXPECT_EQ(l.rows.front().epoch.has_value(), l.learner == "ocs_plus");
  }
  EXPECT_TRUE(res.all_pass());
}

TEST(RunExperiment, CumulativeRegretAddsUp) {
  const auto res = run_experiment(parse_config(base_config()), false);
  for (const auto& l : res.repetitions[0].learners) {
    double cum = 0.0;
    for (const auto& r : l.rows) {
      cum += r.loss - r.comparator_loss;
      EXPECT_NEAR(r.cum_regret, cum, 1e-9);
    }
  }
}

TEST(RunExperiment, WritesCsvTraceReportAndSummary) {
  auto j = base_config();
  const auto dir = temp_dir("csv");
  j["output_dir"] = dir.string();
  j["repetitions"] = 2;
  const auto cfg = parse_config(j);
  run_experiment(cfg);
  for (const char* f : {"trace_seed5.csv", "trace_seed6.csv", "report_seed5.json", "report_seed6.json", "summary.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const std::string csv = read_file(dir / "trace_seed5.csv");
  EXPECT_EQ(csv.rfind("# seed=5 environment=piecewise_stationary T=120 K=4 S_true=2 S=2\n", 0), 0u);
  EXPECT_NE(csv.find(std::string(kTraceColumns) + "\n"), std::string::npos);
  const auto summary = json::parse(read_file(dir / "summary.json"));
  EXPECT_EQ(summary.at("runs").size(), 2u);
  EXPECT_TRUE(summary.at("pass").get<bool>());
  const auto report = json::parse(read_file(dir / "report_seed6.json"));
  EXPECT_EQ(report.at("seed").get<int>(), 6);
  EXPECT_EQ(report.at("reports").size(), 5u);
  for (const auto& entry : fs::directory_iterator(dir)) EXPECT_NE(entry.path().extension(), ".tmp");
  fs::remove_all(dir);
}

TEST(RunExperiment, JsonTraceFormat) {
  auto j = base_config();
  const auto dir = temp_dir("json");
  j["output_dir"] = dir.string();
  j["format"] = "json";
  run_experiment(parse_config(j));
  const auto trace = json::parse(read_file(dir / "trace_seed5.json"));
  EXPECT_EQ(trace.at("rows").size(), 7u * 120u);
  EXPECT_TRUE(trace.at("rows")[0].at("epoch").is_null());
  fs::remove_all(dir);
}

TEST(RunExperiment, TraceIsByteIdenticalAcrossRuns) {
  const auto cfg = parse_config(base_config());
  const auto a = run_experiment(cfg, false);
  const auto b = run_experiment(cfg, false);
  EXPECT_EQ(trace_csv(cfg, a.repetitions[0]), trace_csv(cfg, b.repetitions[0]));
}

TEST(RunExperiment, MatrixEnvironment) {
  const auto j = json::parse(R"({
    "environment": {"kind": "matrix_piecewise", "T": 60, "K": 3, "S_true": 2, "seed": 9, "noise": 0.1},
    "learners": [{"algorithm": "pcsp"}]
  })");
  const auto cfg = parse_config(j);
  const auto res = run_experiment(cfg, false);
  const auto& l = res.repetitions[0].learners.at(0);
  ASSERT_TRUE(l.report.has_value());
  EXPECT_EQ(l.report->theorem, "theorem5");
  EXPECT_TRUE(l.report->pass);
}

TEST(FormatDouble, RoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678}) EXPECT_EQ(std::stod(format_double(x)), x);
}
