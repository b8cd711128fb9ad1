#pragma once

#include "mnlrl/common.hpp"
#include "mnlrl/estimator.hpp"
#include "mnlrl/features.hpp"

#include <vector>

namespace mnlrl {

/// Optimistic tables of one episode. q[h] is S x A for h = 0..H-1; v has
/// H+1 rows with v(H, .) = 0 and v(h, s) = min(max_a q[h](s, a), H).
struct OptimisticValues {
  std::vector<Matrix> q;
  Matrix v;

  std::size_t horizon() const { return q.size(); }
};

/// r(s, a) + sum_{s'} p(s' | theta_hat) v_next(s') + 2 H beta max |phi|_{A^{-1}}.
double optimistic_backup(StateId s, ActionId a, const Vector& v_next, const Vector& theta_hat,
                         const GramSolver& gram, double beta, const FeatureMap& map,
                         double reward, std::size_t horizon);

/// Backward induction with the closed-form bonus. `rewards` is S x A.
OptimisticValues plan(const Vector& theta_hat, const GramSolver& gram, double beta,
                      const FeatureMap& map, const Matrix& rewards, std::size_t horizon);

/// Argmax with ties to the lowest index.
ActionId greedy_action(const Eigen::Ref<const Vector>& q_row);

}  // namespace mnlrl
