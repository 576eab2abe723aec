#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "trackex/harness.hpp"
#include "trackex/projection.hpp"
#include "trackex/property_suite.hpp"

namespace {

namespace fs = std::filesystem;
using trackex::harness::config_error;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitUsage = 64;

struct GlobalFlags {
  std::optional<std::string> out;
  bool verify = false;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
};

trackex::harness::ExperimentConfig load_with_overrides(const std::string& path, const GlobalFlags& g) {
  auto cfg = trackex::harness::load_config(path);
  if (g.out) cfg.output_dir = *g.out;
  if (g.verify) cfg.verify = true;
  if (g.seed) cfg.environment.seed = *g.seed;
  cfg.format = g.format;
  return cfg;
}

void print_table(const json& summary) {
  std::printf("%-20s %-18s %-9s %14s %14s %14s %s\n", "seed", "learner", "theorem", "regret", "bound", "slack", "pass");
  for (const auto& run : summary.at("runs"))
    for (const auto& r : run.at("reports"))
      std::printf("%-20s %-18s %-9s %14.6f %14.6f %14.6f %s\n", std::to_string(run.at("seed").get<std::uint64_t>()).c_str(),
                  r.at("learner").get<std::string>().c_str(), r.at("theorem").get<std::string>().c_str(),
                  r.at("regret").get<double>(), r.at("bound").get<double>(), r.at("slack").get<double>(),
                  r.at("pass").get<bool>() ? "yes" : "NO");
}

int cmd_run(const std::string& config_path, const GlobalFlags& g) {
  const auto cfg = load_with_overrides(config_path, g);
  const auto res = trackex::harness::run_experiment(cfg);
  for (const auto& rep : res.repetitions)
    for (const auto& l : rep.learners) {
      if (!l.report) {
        std::printf("seed %llu  %-18s regret %.6f  (no bound)\n", static_cast<unsigned long long>(rep.seed),
                    l.learner.c_str(), l.rows.empty() ? 0.0 : l.rows.back().cum_regret);
        continue;
      }
      std::printf("seed %llu  %-18s %s regret %.6f bound %.6f slack %.6f violations %d %s\n",
                  static_cast<unsigned long long>(rep.seed), l.learner.c_str(), l.report->theorem.c_str(),
                  l.report->regret, l.report->bound, l.report->slack, l.report->violations,
                  l.report->pass ? "PASS" : "FAIL");
    }
  std::printf("outputs written to %s\n", cfg.output_dir.c_str());
  return res.all_pass() ? kExitOk : kExitInvariant;
}

int cmd_compare(const std::string& config_path, const GlobalFlags& g) {
  const auto cfg = load_with_overrides(config_path, g);
  const fs::path summary_path = fs::path(cfg.output_dir) / "summary.json";
  json summary;
  if (fs::exists(summary_path)) {
    std::ifstream in(summary_path);
    summary = json::parse(in);
  } else {
    summary = trackex::harness::summary_json(cfg, trackex::harness::run_experiment(cfg));
  }
  if (g.format == "json")
    std::cout << summary.dump(2) << "\n";
  else
    print_table(summary);
  return summary.at("pass").get<bool>() ? kExitOk : kExitInvariant;
}

int cmd_verify(std::uint64_t seed) {
  bool ok = true;
  for (const auto& r : trackex::properties::run_all(seed)) {
    std::printf("%-4s %-62s cases %-7lld %s\n", r.pass ? "ok" : "FAIL", r.name.c_str(), r.cases, r.detail.c_str());
    ok = ok && r.pass;
  }
  std::printf("%s\n", ok ? "all checks passed" : "some checks FAILED");
  return ok ? kExitOk : kExitInvariant;
}

int cmd_project(const std::vector<double>& p, double floor, const GlobalFlags& g) {
  const auto res = trackex::kl_project_clipped(p, floor);
  if (g.format == "json") {
    json out{{"point", res.point.vec()}, {"clipped", res.clipped_mask}, {"scale", res.scale}};
    std::cout << out.dump() << "\n";
    return kExitOk;
  }
  std::printf("(");
  for (std::size_t i = 0; i < res.point.size(); ++i) std::printf("%s%g", i ? ", " : "", res.point[i]);
  std::printf(")\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tracking-regret learners on the clipped simplex and spectraplex"};
  app.require_subcommand(1);
  GlobalFlags g;
  std::string out_dir;
  std::uint64_t seed = 0;
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_flag("--verify", g.verify, "Enable per-step lemma assertions");
  auto* seed_opt = app.add_option("--seed", seed, "Seed override");
  app.add_option("--format", g.format, "Trace/output format")->check(CLI::IsMember({"csv", "json"}));

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Config JSON")->required();
  run->fallthrough();

  auto* compare = app.add_subcommand("compare", "Bound-vs-regret table for a config");
  compare->add_option("config", config_path, "Config JSON")->required();
  compare->fallthrough();

  auto* verify = app.add_subcommand("verify", "Run the property suite");
  verify->fallthrough();

  std::vector<double> point;
  double floor = 0.0;
  auto* project = app.add_subcommand("project", "Project a positive vector onto the clipped simplex");
  project->add_option("p", point, "Positive entries")->required();
  project->add_option("--floor", floor, "Per-coordinate floor")->required();
  project->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (*out_opt) g.out = out_dir;
  if (*seed_opt) g.seed = seed;

  try {
    if (*run) return cmd_run(config_path, g);
    if (*compare) return cmd_compare(config_path, g);
    if (*verify) return cmd_verify(g.seed.value_or(20240601));
    if (*project) return cmd_project(point, floor, g);
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const trackex::infeasible_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return *project ? kExitUsage : kExitConfig;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return *project ? kExitUsage : kExitInvariant;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return kExitInvariant;
  }
  return kExitUsage;
}
