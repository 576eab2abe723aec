#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <future>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "trackex/bounds.hpp"
#include "trackex/comparator.hpp"
#include "trackex/environment.hpp"
#include "trackex/learners.hpp"
#include "trackex/pcsp.hpp"
#include "trackex/verification.hpp"

namespace trackex::harness {

using json = nlohmann::json;

/// Malformed or inconsistent experiment configuration.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LearnerSpec {
  std::string algorithm;
  json params = json::object();
};

struct ExperimentConfig {
  EnvironmentSpec environment;
  int S = 1;  // segment budget for the regret and the learners' floors
  std::vector<LearnerSpec> learners;
  std::string output_dir = "out";
  bool verify = false;
  int repetitions = 1;     // repetition r uses seed + r
  std::string format = "csv";  // trace format: csv or json
};

// ── Config parsing ──────────────────────────────────────────────────

namespace detail {

inline const std::set<std::string>& accepted_keys(const std::string& algorithm) {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"mwu", {"eta"}},          {"fixed_share", {"eta", "alpha"}}, {"projection_update", {"eta", "alpha"}},
      {"clipped_omd", {"eta"}},  {"pcs", {"eta"}},                  {"ocs", {"eta"}},
      {"ocs_plus", {}},          {"pcsp", {"eta"}},
  };
  const auto it = keys.find(algorithm);
  if (it == keys.end()) throw config_error("unknown algorithm: " + algorithm);
  return it->second;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw config_error("unknown key '" + k + "' in " + where);
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw config_error("config must be a JSON object");
  detail::reject_unknown(j, {"environment", "S", "learners", "output_dir", "verify", "repetitions", "format"}, "config");
  if (!j.contains("environment") || !j["environment"].is_object()) throw config_error("missing 'environment' object");
  const json& e = j["environment"];
  detail::reject_unknown(e, {"kind", "T", "K", "S_true", "seed", "noise", "drift_step", "leader_loss_mean"},
                         "environment");

  ExperimentConfig c;
  try {
    c.environment.kind = parse_environment_kind(detail::get_or<std::string>(e, "kind", "piecewise_stationary"));
  } catch (const std::invalid_argument& ex) {
    throw config_error(ex.what());
  }
  c.environment.T = detail::get_or<int>(e, "T", c.environment.T);
  c.environment.K = detail::get_or<int>(e, "K", c.environment.K);
  c.environment.S_true = detail::get_or<int>(e, "S_true", c.environment.S_true);
  c.environment.seed = detail::get_or<std::uint64_t>(e, "seed", c.environment.seed);
  c.environment.noise = detail::get_or<double>(e, "noise", c.environment.noise);
  c.environment.drift_step = detail::get_or<double>(e, "drift_step", c.environment.drift_step);
  c.environment.leader_loss_mean = detail::get_or<double>(e, "leader_loss_mean", c.environment.leader_loss_mean);
  try {
    c.environment.validate();
  } catch (const std::invalid_argument& ex) {
    throw config_error(ex.what());
  }

  c.S = detail::get_or<int>(j, "S", c.environment.S_true);
  if (c.S < 1 || c.S > c.environment.T) throw config_error("S must satisfy 1 <= S <= T");
  c.output_dir = detail::get_or<std::string>(j, "output_dir", c.output_dir);
  c.verify = detail::get_or<bool>(j, "verify", c.verify);
  c.repetitions = detail::get_or<int>(j, "repetitions", c.repetitions);
  if (c.repetitions < 1) throw config_error("repetitions must be at least 1");
  c.format = detail::get_or<std::string>(j, "format", c.format);
  if (c.format != "csv" && c.format != "json") throw config_error("format must be csv or json");

  if (!j.contains("learners") || !j["learners"].is_array() || j["learners"].empty())
    throw config_error("'learners' must be a non-empty array");
  for (const auto& l : j["learners"]) {
    if (!l.is_object() || !l.contains("algorithm")) throw config_error("each learner needs an 'algorithm'");
    detail::reject_unknown(l, {"algorithm", "params"}, "learner");
    LearnerSpec spec{detail::get_or<std::string>(l, "algorithm", ""), l.value("params", json::object())};
    if (!spec.params.is_object()) throw config_error("learner params must be an object");
    const auto& keys = detail::accepted_keys(spec.algorithm);
    for (const auto& [k, v] : spec.params.items())
      if (!keys.count(k)) throw config_error("algorithm " + spec.algorithm + " does not accept parameter '" + k + "'");
    const bool matrix_learner = spec.algorithm == "pcsp";
    if (matrix_learner != c.environment.is_matrix())
      throw config_error("algorithm " + spec.algorithm + " does not match environment kind " +
                         std::string(to_string(c.environment.kind)));
    c.learners.push_back(std::move(spec));
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config " + path.string());
  try {
    return parse_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
}

// ── Learning-rate resolution ────────────────────────────────────────

/// Data-dependent quantities the hindsight learning rates need.
struct Hindsight {
  double L2 = 0.0;
  double P_inf = 0.0;
  double M2 = 0.0;
};

/// eta may be a number, "theorem" (sqrt(S log(KT/S)/T)) or "hindsight"
/// (the tuning of the learner's own bound).
inline double resolve_eta(const LearnerSpec& spec, int T, int K, int S, const Hindsight& h) {
  const std::string& a = spec.algorithm;
  const bool prod = a == "pcs" || a == "pcsp";
  const json fallback = (prod || a == "ocs") ? json("hindsight") : json("theorem");
  const json v = spec.params.value("eta", fallback);
  if (v.is_number()) {
    const double eta = v.get<double>();
    if (!(eta > 0.0)) throw config_error(a + ": eta must be positive");
    if (prod && eta > 0.5) throw config_error(a + ": eta must lie in (0, 1/2]");
    return eta;
  }
  if (!v.is_string()) throw config_error(a + ": eta must be a number, \"theorem\" or \"hindsight\"");
  const std::string mode = v.get<std::string>();
  if (mode == "theorem" && !prod) return theorem_eta_omd(T, K, S);
  if (mode == "hindsight") {
    if (a == "pcs") return hindsight_eta_prod(h.L2, T, K, S);
    if (a == "pcsp") return hindsight_eta_prod(h.M2, T, K, S);
    if (a == "ocs") return hindsight_eta_ocs(h.P_inf, T, K, S);
  }
  throw config_error(a + ": eta mode '" + mode + "' is not available");
}

inline std::unique_ptr<Learner> make_learner(const LearnerSpec& spec, int T, int K, int S, const Hindsight& h) {
  const std::string& a = spec.algorithm;
  const double floor = HorizonConfig(T, K, S, 1.0).clip_floor();
  auto alpha = [&] {
    const double x = spec.params.value("alpha", floor);
    if (!(x >= 0.0 && x <= 1.0)) throw config_error(a + ": alpha must lie in [0,1]");
    return x;
  };
  if (a == "ocs_plus") return std::make_unique<OcsPlusLearner>(T, K, S);
  const double eta = resolve_eta(spec, T, K, S, h);
  if (a == "mwu") return std::make_unique<MwuLearner>(K, eta);
  if (a == "fixed_share") return std::make_unique<FixedShareLearner>(K, eta, alpha());
  if (a == "projection_update") return std::make_unique<ProjectionUpdateLearner>(K, eta, alpha());
  if (a == "clipped_omd") return std::make_unique<ClippedOmdLearner>(HorizonConfig(T, K, S, eta));
  if (a == "pcs") return std::make_unique<PcsLearner>(HorizonConfig(T, K, S, eta));
  if (a == "ocs") return std::make_unique<OcsLearner>(HorizonConfig(T, K, S, eta));
  throw config_error("algorithm " + a + " is not a vector learner");
}

// ── Running ─────────────────────────────────────────────────────────

struct TraceRow {
  int round = 0;  // 1-based
  double loss = 0.0;
  double comparator_loss = 0.0;
  double cum_regret = 0.0;
  double min_weight = 0.0;
  std::optional<int> epoch;
  double eta = 0.0;
};

struct LearnerOutcome {
  std::string learner;
  std::vector<TraceRow> rows;
  std::optional<BoundReport> report;  // absent for learners without a theorem
  int epochs = 0;                     // OCS+ only
};

struct RepetitionResult {
  std::uint64_t seed = 0;
  double comparator_loss = 0.0;
  Hindsight stats;
  std::vector<LearnerOutcome> learners;

  bool pass() const {
    for (const auto& l : learners)
      if (l.report && !l.report->pass) return false;
    return true;
  }
};

struct ExperimentResult {
  std::vector<RepetitionResult> repetitions;
  bool all_pass() const {
    for (const auto& r : repetitions)
      if (!r.pass()) return false;
    return true;
  }
};

namespace detail {

inline std::vector<TraceRow> vector_rows(const RunRecord& run, std::span<const LossVector> losses,
                                         const ComparatorResult& cmp, bool with_epoch) {
  std::vector<TraceRow> rows(run.rounds());
  double cum = 0.0;
  for (std::size_t t = 0; t < run.rounds(); ++t) {
    const double c = losses[t][static_cast<std::size_t>(cmp.best_sequence[t])];
    cum += run.round_losses[t] - c;
    rows[t] = {static_cast<int>(t + 1), run.round_losses[t], c, cum, run.predictions[t].min(),
               with_epoch ? std::optional<int>(run.epochs[t]) : std::nullopt, run.etas[t]};
  }
  return rows;
}

inline LearnerOutcome run_vector_learner(const LearnerSpec& spec, std::span<const LossVector> losses, int S,
                                         const ComparatorResult& cmp, const Hindsight& h, bool verify) {
  const int T = static_cast<int>(losses.size());
  const int K = static_cast<int>(losses.front().size());
  auto learner = make_learner(spec, T, K, S, h);
  const RunRecord run = record_run(*learner, losses, S);
  LearnerOutcome out;
  out.learner = run.learner;
  out.rows = vector_rows(run, losses, cmp, spec.algorithm == "ocs_plus");
  out.epochs = run.final_epoch();
  if (has_bound(run, T, K)) out.report = check_trajectory(run, losses, cmp, CheckOptions{verify});
  return out;
}

inline LearnerOutcome run_matrix_learner(const LearnerSpec& spec, std::span<const LossMatrix> losses, int S,
                                         const MatrixComparatorResult& cmp, const Hindsight& h, bool verify) {
  const int T = static_cast<int>(losses.size());
  const int K = static_cast<int>(losses.front().size());
  PcspLearner learner(HorizonConfig(T, K, S, resolve_eta(spec, T, K, S, h)));
  const MatrixRunRecord run = record_matrix_run(learner, losses, S);
  LearnerOutcome out;
  out.learner = run.learner;
  double cum = 0.0;
  for (std::size_t t = 0; t < run.rounds(); ++t) {
    const double c = cmp.round_losses[t];
    cum += run.round_losses[t] - c;
    out.rows.push_back({static_cast<int>(t + 1), run.round_losses[t], c, cum, run.predictions[t].min_eigenvalue(),
                        std::nullopt, run.eta});
  }
  out.report = check_matrix_trajectory(run, losses, cmp, CheckOptions{verify});
  return out;
}

}  // namespace detail

/// One repetition: generate the losses once, compute the comparator once,
/// then run every learner (concurrently, each on its own state) on them.
inline RepetitionResult run_repetition(const ExperimentConfig& cfg, std::uint64_t seed) {
  EnvironmentSpec env = cfg.environment;
  env.seed = seed;
  RepetitionResult rep;
  rep.seed = seed;
  std::vector<std::future<LearnerOutcome>> jobs;

  if (env.is_matrix()) {
    const auto losses = generate_matrix(env);
    const auto cmp = best_switching_matrix(losses, cfg.S);
    rep.comparator_loss = cmp.total_loss;
    rep.stats.M2 = cmp.M2;
    for (const auto& spec : cfg.learners)
      jobs.push_back(std::async(std::launch::async, [&, spec] {
        return detail::run_matrix_learner(spec, losses, cfg.S, cmp, rep.stats, cfg.verify);
      }));
    for (auto& j : jobs) rep.learners.push_back(j.get());
  } else {
    const auto losses = generate(env);
    const auto cmp = best_switching_sequence(losses, cfg.S);
    rep.comparator_loss = cmp.total_loss;
    rep.stats = {cmp.L2, path_length(losses).P_inf, 0.0};
    for (const auto& spec : cfg.learners)
      jobs.push_back(std::async(std::launch::async, [&, spec] {
        return detail::run_vector_learner(spec, losses, cfg.S, cmp, rep.stats, cfg.verify);
      }));
    for (auto& j : jobs) rep.learners.push_back(j.get());
  }
  return rep;
}

// ── Serialization ───────────────────────────────────────────────────

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string header_comment(const ExperimentConfig& cfg, std::uint64_t seed) {
  std::ostringstream os;
  os << "# seed=" << seed << " environment=" << to_string(cfg.environment.kind) << " T=" << cfg.environment.T
     << " K=" << cfg.environment.K << " S_true=" << cfg.environment.S_true << " S=" << cfg.S << "\n";
  return os.str();
}

inline constexpr const char* kTraceColumns = "round,learner,loss,comparator_loss,cum_regret,min_weight,epoch,eta";

inline std::string trace_csv(const ExperimentConfig& cfg, const RepetitionResult& rep) {
  std::string out = header_comment(cfg, rep.seed);
  out += kTraceColumns;
  out += '\n';
  for (const auto& l : rep.learners)
    for (const auto& r : l.rows) {
      out += std::to_string(r.round) + ',' + l.learner + ',' + format_double(r.loss) + ',' +
             format_double(r.comparator_loss) + ',' + format_double(r.cum_regret) + ',' + format_double(r.min_weight) +
             ',' + (r.epoch ? std::to_string(*r.epoch) : std::string()) + ',' + format_double(r.eta) + '\n';
    }
  return out;
}

inline json trace_json(const RepetitionResult& rep) {
  json rows = json::array();
  for (const auto& l : rep.learners)
    for (const auto& r : l.rows)
      rows.push_back({{"round", r.round},
                      {"learner", l.learner},
                      {"loss", r.loss},
                      {"comparator_loss", r.comparator_loss},
                      {"cum_regret", r.cum_regret},
                      {"min_weight", r.min_weight},
                      {"epoch", r.epoch ? json(*r.epoch) : json(nullptr)},
                      {"eta", r.eta}});
  return {{"seed", rep.seed}, {"rows", rows}};
}

inline json report_json(const ExperimentConfig& cfg, const RepetitionResult& rep) {
  json reports = json::array();
  for (const auto& l : rep.learners)
    if (l.report) reports.push_back(to_json(*l.report));
  return {{"seed", rep.seed},
          {"environment", std::string(to_string(cfg.environment.kind))},
          {"T", cfg.environment.T},
          {"K", cfg.environment.K},
          {"S", cfg.S},
          {"comparator_loss", rep.comparator_loss},
          {"reports", reports},
          {"pass", rep.pass()}};
}

inline json summary_json(const ExperimentConfig& cfg, const ExperimentResult& res) {
  json runs = json::array();
  for (const auto& rep : res.repetitions) runs.push_back(report_json(cfg, rep));
  return {{"runs", runs}, {"pass", res.all_pass()}};
}

/// Writes via a sibling temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res) {
  const std::filesystem::path dir(cfg.output_dir);
  for (const auto& rep : res.repetitions) {
    const std::string stem = "seed" + std::to_string(rep.seed);
    if (cfg.format == "csv")
      write_atomic(dir / ("trace_" + stem + ".csv"), trace_csv(cfg, rep));
    else
      write_atomic(dir / ("trace_" + stem + ".json"), trace_json(rep).dump(2) + "\n");
    write_atomic(dir / ("report_" + stem + ".json"), report_json(cfg, rep).dump(2) + "\n");
  }
  write_atomic(dir / "summary.json", summary_json(cfg, res).dump(2) + "\n");
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true) {
  ExperimentResult res;
  for (int r = 0; r < cfg.repetitions; ++r)
    res.repetitions.push_back(run_repetition(cfg, cfg.environment.seed + static_cast<std::uint64_t>(r)));
  if (write_files) write_outputs(cfg, res);
  return res;
}

}  // namespace trackex::harness
