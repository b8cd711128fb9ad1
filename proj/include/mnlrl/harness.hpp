#pragma once

#include "mnlrl/agent.hpp"
#include "mnlrl/common.hpp"
#include "mnlrl/envs.hpp"
#include "mnlrl/theory_checks.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mnlrl {

struct EnvSpec {
  std::string name = "riverswim";
  std::size_t n_states = 6;
  std::size_t horizon = 24;
  double left_reward = 0.005;
  /// When set, the MDP is loaded from this JSON document instead.
  std::optional<std::filesystem::path> file;
};

struct ExperimentConfig {
  EnvSpec env;
  AgentKind agent = AgentKind::kUcrlMnl;
  double lambda = 1.0;
  double kappa = 0.25;
  double delta = 0.01;
  double l_theta = 10.0;
  double beta_scale = 1.0;
  double epsilon0 = 1.0;
  std::size_t episodes = 500;
  std::size_t runs = 10;
  std::uint64_t seed = 42;
  /// Worker threads; 0 means MNLRL_WORKERS or the hardware concurrency.
  std::size_t workers = 0;
  bool record_timing = true;
  bool audit = true;

  /// Checks K, R >= 1 and the confidence-parameter constraints, including
  /// lambda >= L_phi^2 (L_phi = 1 for tabular features).
  void validate() const;
  nlohmann::json to_json() const;
};

TabularMDP build_env(const EnvSpec& spec);

struct EpisodeRow {
  std::size_t run_id = 0;
  std::size_t episode = 0;
  double episode_return = 0.0;
  double policy_value = 0.0;
  double regret = 0.0;
  double cum_regret = 0.0;
  double beta = 0.0;
  std::size_t mle_iters = 0;
  double wall_ms = 0.0;
};

struct RunRecord {
  std::size_t run_id = 0;
  std::vector<EpisodeRow> rows;
  std::optional<RunAudit> audit;
  /// Set when the run aborted (e.g. solver failure); rows hold what finished.
  std::optional<std::string> error;
};

/// V*_1(s_1) - V^pi_1(s_1), with V* supplied from a cached solve.
double compute_regret(const TabularMDP& mdp, const Matrix& optimal_v, const Policy& policy);
double compute_regret(const TabularMDP& mdp, const Policy& policy);

struct Stat {
  double mean = 0.0;
  double std = 0.0;
};
Stat mean_std(const std::vector<double>& values);

struct ExperimentSummary {
  std::string agent;
  double optimal_value = 0.0;
  std::size_t window = 0;
  Stat mean_return;
  Stat late_return;
  Stat final_cum_regret;
  std::vector<std::string> failures;
  std::optional<AuditSummary> audit;

  nlohmann::json to_json() const;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  ExperimentSummary summary;
};

/// One seeded replication (seed = base seed + run id).
RunRecord run_replication(const ExperimentConfig& config, const TabularMDP& mdp,
                          std::shared_ptr<const FeatureMap> map, std::size_t run_id);

ExperimentResult run_experiment(const ExperimentConfig& config);

ExperimentSummary summarise(const ExperimentConfig& config, const TabularMDP& mdp,
                            const std::vector<RunRecord>& runs);

inline constexpr const char* kCsvHeader =
    "run_id,episode,return,policy_value,regret,cum_regret,beta,mle_iters,wall_ms";

std::string format_csv(const std::vector<RunRecord>& runs);
std::vector<EpisodeRow> parse_csv(const std::string& text);
std::vector<EpisodeRow> read_csv(const std::filesystem::path& path);

/// Writes runs.csv, summary.json, returns.svg, regret.svg and, when audits
/// exist, audit_trace.json plus theory_checks.{json,txt}.
void emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

/// returns.svg and regret.svg from CSV rows.
void emit_plots(const std::vector<EpisodeRow>& rows, const std::filesystem::path& dir);

/// Theory checks over a directory written by emit_outputs.
AuditSummary audit_directory(const std::filesystem::path& dir);

/// Worker count from MNLRL_WORKERS, falling back to hardware concurrency.
std::size_t default_workers();

/// Least-squares slope of log(cum_regret) against log(episode) over
/// episodes [first, last]; non-positive cumulative regrets are skipped.
double log_log_slope(const std::vector<EpisodeRow>& rows, std::size_t first, std::size_t last);

}  // namespace mnlrl
