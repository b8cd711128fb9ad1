#pragma once

#include "mnlrl/common.hpp"
#include "mnlrl/envs.hpp"
#include "mnlrl/estimator.hpp"
#include "mnlrl/features.hpp"
#include "mnlrl/mnl_model.hpp"
#include "mnlrl/planner.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mnlrl {

/// What the UCRL-MNL agent planned with at the start of an episode. Kept so
/// the theory audits can replay the lemma checks against ground truth.
struct PlanningSnapshot {
  std::size_t episode = 0;
  Vector theta_hat;
  GramMatrix gram;
  double beta = 0.0;
  OptimisticValues values;
};

struct EpisodeDiagnostics {
  double beta = 0.0;
  std::size_t mle_iterations = 0;
  double mle_gradient_norm = 0.0;
  double episode_return = 0.0;
  /// max_{s'} |phi_{k,h,s'}|^2_{A_k^{-1}} for each step of the episode.
  std::vector<double> step_max_sq_norms;
};

struct EpisodeReport {
  EpisodeTrajectory trajectory;
  /// Deterministic policy deployed in this episode, defined on all (h, s).
  Policy policy;
  EpisodeDiagnostics diagnostics;
  std::optional<PlanningSnapshot> snapshot;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual EpisodeReport run_episode(const TabularMDP& mdp, Rng& rng) = 0;
};

/// Online state of UCRL-MNL: A_1 = lambda I, theta_hat_1 = 0.
struct AgentState {
  TransitionCore theta_hat;
  GramMatrix gram;
  ObservationLog log;
  std::size_t episode = 1;
  ConfidenceParams params;
};

struct UcrlMnlConfig {
  ConfidenceParams params;
  /// Total episodes K; the radius uses delta / K.
  std::size_t episodes = 1;
  /// Multiplier on beta_k. 1 is the theoretical radius.
  double beta_scale = 1.0;
  bool keep_snapshots = false;
  NewtonOptions newton;
};

class UcrlMnlAgent : public Agent {
 public:
  /// Fills dimension, horizon and U of the params from the map and MDP.
  UcrlMnlAgent(std::shared_ptr<const FeatureMap> map, const TabularMDP& mdp, UcrlMnlConfig config);

  std::string name() const override { return "ucrl-mnl"; }
  EpisodeReport run_episode(const TabularMDP& mdp, Rng& rng) override;

  const AgentState& state() const { return state_; }
  const UcrlMnlConfig& config() const { return config_; }
  /// beta_k for the next episode.
  double current_beta() const;

 private:
  std::shared_ptr<const FeatureMap> map_;
  UcrlMnlConfig config_;
  AgentState state_;
};

class RandomAgent : public Agent {
 public:
  std::string name() const override { return "random"; }
  EpisodeReport run_episode(const TabularMDP& mdp, Rng& rng) override;
};

struct EpsilonGreedyConfig {
  /// epsilon_k = epsilon0 / sqrt(k) unless `fixed` is set.
  double epsilon0 = 1.0;
  bool fixed = false;
  /// Initial Q tables (H of S x A); zeros when empty.
  std::vector<Matrix> initial_q;
};

/// Tabular finite-horizon Q-learning with an epsilon-greedy behaviour policy.
/// Exploration draws are made once per episode, so the deployed policy is a
/// deterministic table whose value can be computed exactly.
class EpsilonGreedyAgent : public Agent {
 public:
  EpsilonGreedyAgent(const TabularMDP& mdp, EpsilonGreedyConfig config);
  std::string name() const override { return "epsilon-greedy"; }
  EpisodeReport run_episode(const TabularMDP& mdp, Rng& rng) override;

  const std::vector<Matrix>& q() const { return q_; }

 private:
  EpsilonGreedyConfig config_;
  std::vector<Matrix> q_;
  std::vector<Matrix> visits_;
  std::size_t episode_ = 1;
};

/// Acts greedily on exact value iteration.
class OptimalOracleAgent : public Agent {
 public:
  explicit OptimalOracleAgent(const TabularMDP& mdp);
  std::string name() const override { return "optimal"; }
  EpisodeReport run_episode(const TabularMDP& mdp, Rng& rng) override;

 private:
  Policy policy_;
};

enum class AgentKind { kUcrlMnl, kRandom, kEpsilonGreedy, kOptimalOracle };

/// Accepts ucrl-mnl, random, epsilon-greedy (or epsilon_greedy) and
/// optimal (or optimal_oracle, optimal-oracle).
AgentKind parse_agent_kind(const std::string& name);
std::string to_string(AgentKind kind);

struct BaselineConfig {
  EpsilonGreedyConfig epsilon_greedy;
};

std::unique_ptr<Agent> baseline_agent(AgentKind kind, const TabularMDP& mdp,
                                      const BaselineConfig& config = {});

}  // namespace mnlrl
