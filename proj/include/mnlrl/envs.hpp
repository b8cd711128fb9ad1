#pragma once

#include "mnlrl/common.hpp"
#include "mnlrl/features.hpp"
#include "mnlrl/mnl_model.hpp"
#include "mnlrl/tabular_mdp.hpp"

#include <vector>

namespace mnlrl {

namespace riverswim_actions {
inline constexpr ActionId kLeft = 0;
inline constexpr ActionId kRight = 1;
}  // namespace riverswim_actions

/// RiverSwim chain with n states; `left_reward` is r(s_1, left).
TabularMDP riverswim(std::size_t n_states, std::size_t horizon, double left_reward = 0.005);

/// Deterministic non-stationary policy: action for every (h, s), h 0-based.
class Policy {
 public:
  Policy(std::size_t horizon, std::size_t n_states, ActionId fill = 0)
      : horizon_(horizon), n_states_(n_states), actions_(horizon * n_states, fill) {}

  ActionId operator()(std::size_t h, StateId s) const { return actions_[h * n_states_ + s]; }
  ActionId& at(std::size_t h, StateId s) { return actions_[h * n_states_ + s]; }
  std::size_t horizon() const { return horizon_; }
  std::size_t n_states() const { return n_states_; }

  bool operator==(const Policy&) const = default;

 private:
  std::size_t horizon_;
  std::size_t n_states_;
  std::vector<ActionId> actions_;
};

struct StepResult {
  StateId next = 0;
  double reward = 0.0;
  /// Index of `next` in the reachable-set order of (s, a).
  std::size_t choice = 0;
};

/// Samples s' by inverse CDF over the ascending reachable-set order.
StepResult step(const TabularMDP& mdp, StateId s, ActionId a, Rng& rng);

struct TrajectoryStep {
  StateId state = 0;
  ActionId action = 0;
  double reward = 0.0;
  StateId next = 0;
  std::size_t choice = 0;
};

struct EpisodeTrajectory {
  std::vector<TrajectoryStep> steps;
  double total_return = 0.0;
};

/// Rolls out a policy for one episode from the initial state.
EpisodeTrajectory rollout(const TabularMDP& mdp, const Policy& policy, Rng& rng);

/// Finite-horizon value tables. v has H+1 rows (row H is zero); q[h] is S x A.
struct ValueTables {
  Matrix v;
  std::vector<Matrix> q;
};

/// Q*_h(s, a) = r(s, a) + sum_{s'} P(s'|s, a) V*_{h+1}(s').
ValueTables exact_value_iteration(const TabularMDP& mdp);

/// Greedy policy for a stack of Q tables, ties to the lowest action index.
Policy greedy_policy(const std::vector<Matrix>& q);

/// V^pi by backward induction under the true kernel; (H+1) x S, last row zero.
Matrix policy_evaluation(const TabularMDP& mdp, const Policy& policy);

/// Ground-truth core for a map built by tabular_feature_map: log-odds of
/// every non-anchor target against the anchor.
TransitionCore mdp_to_core(const TabularMDP& mdp, const FeatureMap& map);

/// Random tabular MDP with reachable sets of size 1..max_reachable, used by
/// property tests.
TabularMDP random_tabular_mdp(std::size_t n_states, std::size_t n_actions, std::size_t horizon,
                              std::size_t max_reachable, Rng& rng);

}  // namespace mnlrl
