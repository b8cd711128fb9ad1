#pragma once

#include "mnlrl/common.hpp"

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace mnlrl {

/// Outgoing distribution of one (state, action) pair. Targets are the
/// reachable next states in ascending order; every prob is strictly positive.
struct TransitionRow {
  std::vector<StateId> targets;
  std::vector<double> probs;
};

/// Finite-horizon episodic MDP with a known reward table.
class TabularMDP {
 public:
  TabularMDP(std::size_t n_states, std::size_t n_actions, std::size_t horizon,
             StateId initial_state);

  /// Sets the row for (s, a). Zero-probability targets are dropped and the
  /// remaining targets are sorted; the row must sum to 1 within 1e-12.
  void set_transition(StateId s, ActionId a, std::vector<StateId> targets,
                      std::vector<double> probs);
  void set_reward(StateId s, ActionId a, double r);

  /// Throws ConfigError unless every row is set and every reward is in [0, 1].
  void validate() const;

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t horizon() const { return horizon_; }
  StateId initial_state() const { return initial_state_; }

  const TransitionRow& transition(StateId s, ActionId a) const;
  double reward(StateId s, ActionId a) const;
  const Matrix& rewards() const { return rewards_; }

  /// Dense probability P(s' | s, a), zero outside the reachable set.
  double probability(StateId s, ActionId a, StateId next) const;

  /// Largest reachable-set size over all (s, a).
  std::size_t max_reachable() const;

  /// Same MDP with a different horizon.
  TabularMDP with_horizon(std::size_t horizon) const;

  nlohmann::json to_json() const;
  static TabularMDP from_json(const nlohmann::json& doc);
  static TabularMDP load(const std::filesystem::path& path);

 private:
  std::size_t index(StateId s, ActionId a) const;

  std::size_t n_states_;
  std::size_t n_actions_;
  std::size_t horizon_;
  StateId initial_state_;
  std::vector<TransitionRow> rows_;
  Matrix rewards_;
};

}  // namespace mnlrl
