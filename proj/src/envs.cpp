#include "mnlrl/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mnlrl {

using riverswim_actions::kLeft;
using riverswim_actions::kRight;

TabularMDP riverswim(std::size_t n_states, std::size_t horizon, double left_reward) {
  if (n_states < 3) throw ConfigError("RiverSwim needs at least 3 states");
  const StateId last = n_states - 1;
  TabularMDP mdp(n_states, 2, horizon, 0);
  for (StateId s = 0; s < n_states; ++s) {
    mdp.set_transition(s, kLeft, {s == 0 ? 0 : s - 1}, {1.0});
    if (s == 0) {
      mdp.set_transition(s, kRight, {0, 1}, {0.4, 0.6});
    } else if (s == last) {
      mdp.set_transition(s, kRight, {s - 1, s}, {0.4, 0.6});
    } else {
      mdp.set_transition(s, kRight, {s - 1, s, s + 1}, {0.05, 0.6, 0.35});
    }
  }
  mdp.set_reward(0, kLeft, left_reward);
  mdp.set_reward(last, kRight, 1.0);
  return mdp;
}

StepResult step(const TabularMDP& mdp, StateId s, ActionId a, Rng& rng) {
  const auto& row = mdp.transition(s, a);
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t choice = row.targets.size() - 1;
  for (std::size_t i = 0; i + 1 < row.targets.size(); ++i) {
    cumulative += row.probs[i];
    if (u < cumulative) {
      choice = i;
      break;
    }
  }
  return StepResult{row.targets[choice], mdp.reward(s, a), choice};
}

EpisodeTrajectory rollout(const TabularMDP& mdp, const Policy& policy, Rng& rng) {
  EpisodeTrajectory traj;
  StateId s = mdp.initial_state();
  for (std::size_t h = 0; h < mdp.horizon(); ++h) {
    const ActionId a = policy(h, s);
    const StepResult out = step(mdp, s, a, rng);
    traj.steps.push_back({s, a, out.reward, out.next, out.choice});
    traj.total_return += out.reward;
    s = out.next;
  }
  return traj;
}

namespace {

double expected_next(const TabularMDP& mdp, StateId s, ActionId a, const Matrix& v,
                     Eigen::Index next_row) {
  const auto& row = mdp.transition(s, a);
  double total = 0.0;
  for (std::size_t i = 0; i < row.targets.size(); ++i) {
    total += row.probs[i] * v(next_row, static_cast<Eigen::Index>(row.targets[i]));
  }
  return total;
}

}  // namespace

ValueTables exact_value_iteration(const TabularMDP& mdp) {
  const auto horizon = static_cast<Eigen::Index>(mdp.horizon());
  const auto n_states = static_cast<Eigen::Index>(mdp.n_states());
  const auto n_actions = static_cast<Eigen::Index>(mdp.n_actions());
  ValueTables out{Matrix::Zero(horizon + 1, n_states),
                  std::vector<Matrix>(mdp.horizon(), Matrix::Zero(n_states, n_actions))};
  for (Eigen::Index h = horizon - 1; h >= 0; --h) {
    Matrix& q = out.q[static_cast<std::size_t>(h)];
    for (Eigen::Index s = 0; s < n_states; ++s) {
      for (Eigen::Index a = 0; a < n_actions; ++a) {
        q(s, a) = mdp.reward(static_cast<StateId>(s), static_cast<ActionId>(a)) +
                  expected_next(mdp, static_cast<StateId>(s), static_cast<ActionId>(a), out.v, h + 1);
      }
      out.v(h, s) = q.row(s).maxCoeff();
    }
  }
  return out;
}

Policy greedy_policy(const std::vector<Matrix>& q) {
  const std::size_t n_states = q.empty() ? 0 : static_cast<std::size_t>(q.front().rows());
  Policy policy(q.size(), n_states);
  for (std::size_t h = 0; h < q.size(); ++h) {
    for (StateId s = 0; s < n_states; ++s) {
      const auto row = q[h].row(static_cast<Eigen::Index>(s));
      Eigen::Index best = 0;
      for (Eigen::Index a = 1; a < row.size(); ++a) {
        if (row(a) > row(best)) best = a;
      }
      policy.at(h, s) = static_cast<ActionId>(best);
    }
  }
  return policy;
}

Matrix policy_evaluation(const TabularMDP& mdp, const Policy& policy) {
  if (policy.horizon() != mdp.horizon() || policy.n_states() != mdp.n_states()) {
    throw DimensionError("policy shape does not match the MDP");
  }
  const auto horizon = static_cast<Eigen::Index>(mdp.horizon());
  const auto n_states = static_cast<Eigen::Index>(mdp.n_states());
  Matrix v = Matrix::Zero(horizon + 1, n_states);
  for (Eigen::Index h = horizon - 1; h >= 0; --h) {
    for (Eigen::Index s = 0; s < n_states; ++s) {
      const ActionId a = policy(static_cast<std::size_t>(h), static_cast<StateId>(s));
      v(h, s) = mdp.reward(static_cast<StateId>(s), a) +
                expected_next(mdp, static_cast<StateId>(s), a, v, h + 1);
    }
  }
  return v;
}

TransitionCore mdp_to_core(const TabularMDP& mdp, const FeatureMap& map) {
  TransitionCore core{Vector::Zero(static_cast<Eigen::Index>(map.dimension())), 0.0};
  for (StateId s = 0; s < mdp.n_states(); ++s) {
    for (ActionId a = 0; a < mdp.n_actions(); ++a) {
      const auto& reach = map.reachable(s, a);
      const Matrix& block = map.block(s, a);
      const double anchor_p = mdp.probability(s, a, reach.anchor());
      if (!(anchor_p > 0.0)) {
        throw ConfigError("anchor of (s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                          ") has zero probability");
      }
      for (std::size_t i = 1; i < reach.members.size(); ++i) {
        const auto row = block.row(static_cast<Eigen::Index>(i));
        Eigen::Index coord = 0;
        const double peak = row.maxCoeff(&coord);
        if (peak != 1.0 || row.sum() != 1.0) {
          throw ConfigError("mdp_to_core needs one-hot tabular features");
        }
        core.theta(coord) = std::log(mdp.probability(s, a, reach.members[i]) / anchor_p);
      }
    }
  }
  core.bound = core.theta.norm();
  return core;
}

TabularMDP random_tabular_mdp(std::size_t n_states, std::size_t n_actions, std::size_t horizon,
                              std::size_t max_reachable, Rng& rng) {
  TabularMDP mdp(n_states, n_actions, horizon, 0);
  const std::size_t cap = std::min(max_reachable, n_states);
  for (StateId s = 0; s < n_states; ++s) {
    for (ActionId a = 0; a < n_actions; ++a) {
      const std::size_t m = 1 + rng.below(cap);
      std::vector<StateId> pool(n_states);
      std::iota(pool.begin(), pool.end(), StateId{0});
      // Partial Fisher-Yates for m distinct targets.
      for (std::size_t i = 0; i < m; ++i) std::swap(pool[i], pool[i + rng.below(n_states - i)]);
      std::vector<StateId> targets(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
      std::vector<double> weights(m);
      double total = 0.0;
      for (auto& w : weights) total += (w = 0.05 + rng.uniform());
      for (auto& w : weights) w /= total;
      // Put the rounding residue on one entry so the row sums to 1.
      weights.back() = 1.0 - std::accumulate(weights.begin(), weights.end() - 1, 0.0);
      mdp.set_transition(s, a, std::move(targets), std::move(weights));
      mdp.set_reward(s, a, rng.uniform());
    }
  }
  return mdp;
}

}  // namespace mnlrl
