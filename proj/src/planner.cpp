#include "mnlrl/planner.hpp"

#include "mnlrl/mnl_model.hpp"

#include <algorithm>

namespace mnlrl {

namespace {

double expected_value(const ReachableSet& reach, const Vector& probs, const Vector& v_next) {
  double total = 0.0;
  for (std::size_t i = 0; i < reach.members.size(); ++i) {
    total += probs(static_cast<Eigen::Index>(i)) * v_next(static_cast<Eigen::Index>(reach.members[i]));
  }
  return total;
}

}  // namespace

double optimistic_backup(StateId s, ActionId a, const Vector& v_next, const Vector& theta_hat,
                         const GramSolver& gram, double beta, const FeatureMap& map,
                         double reward, std::size_t horizon) {
  const auto& reach = map.reachable(s, a);
  const Matrix& block = map.block(s, a);
  for (StateId next : reach.members) {
    if (static_cast<Eigen::Index>(next) >= v_next.size()) {
      throw DimensionError("next-step values do not cover reachable state " + std::to_string(next));
    }
  }
  const Vector probs = softmax_probs(block, theta_hat);
  return reward + expected_value(reach, probs, v_next) + bonus(gram, block, beta, horizon);
}

OptimisticValues plan(const Vector& theta_hat, const GramSolver& gram, double beta,
                      const FeatureMap& map, const Matrix& rewards, std::size_t horizon) {
  const Eigen::Index n_states = rewards.rows();
  const Eigen::Index n_actions = rewards.cols();
  const auto cap = static_cast<double>(horizon);

  // Model probabilities and bonuses do not depend on h; compute them once.
  std::vector<Vector> probs(static_cast<std::size_t>(n_states * n_actions));
  Matrix bonuses(n_states, n_actions);
  for (Eigen::Index s = 0; s < n_states; ++s) {
    for (Eigen::Index a = 0; a < n_actions; ++a) {
      const Matrix& block = map.block(static_cast<StateId>(s), static_cast<ActionId>(a));
      probs[static_cast<std::size_t>(s * n_actions + a)] = softmax_probs(block, theta_hat);
      bonuses(s, a) = bonus(gram, block, beta, horizon);
    }
  }

  OptimisticValues out{std::vector<Matrix>(horizon, Matrix::Zero(n_states, n_actions)),
                       Matrix::Zero(static_cast<Eigen::Index>(horizon) + 1, n_states)};
  for (Eigen::Index h = static_cast<Eigen::Index>(horizon) - 1; h >= 0; --h) {
    const Vector v_next = out.v.row(h + 1).transpose();
    Matrix& q = out.q[static_cast<std::size_t>(h)];
    for (Eigen::Index s = 0; s < n_states; ++s) {
      for (Eigen::Index a = 0; a < n_actions; ++a) {
        const auto& reach = map.reachable(static_cast<StateId>(s), static_cast<ActionId>(a));
        q(s, a) = rewards(s, a) +
                  expected_value(reach, probs[static_cast<std::size_t>(s * n_actions + a)], v_next) +
                  bonuses(s, a);
      }
      out.v(h, s) = std::min(q.row(s).maxCoeff(), cap);
    }
  }
  return out;
}

ActionId greedy_action(const Eigen::Ref<const Vector>& q_row) {
  if (q_row.size() == 0) throw DimensionError("greedy_action needs a non-empty row");
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < q_row.size(); ++a) {
    if (q_row(a) > q_row(best)) best = a;
  }
  return static_cast<ActionId>(best);
}

}  // namespace mnlrl
