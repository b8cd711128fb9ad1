#pragma once

#include "mnlrl/agent.hpp"
#include "mnlrl/common.hpp"
#include "mnlrl/envs.hpp"
#include "mnlrl/exact_rank.hpp"

#include <json.hpp>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mnlrl {

// ---------------------------------------------------------------------------
// Linear transition models cannot be proper distributions in general.
// ---------------------------------------------------------------------------

struct LinearSystemCase {
  std::string name;
  IntMatrix coefficients;
  std::vector<BigInt> rhs;
  std::size_t coefficient_rank = 0;
  std::size_t augmented_rank = 0;

  /// Rouche-Capelli: solvable iff both ranks agree.
  bool consistent() const { return coefficient_rank == augmented_rank; }
};

/// Row-sum constraints of a 2-state, 2-action MDP under a bilinear model
/// phi(s,a)^T M psi(s') with phi rows (1,1), (1,2), (3,1), (2,3) and
/// psi = (1, -2). Unknown M = (x, y).
LinearSystemCase bilinear_counterexample();

/// Row-sum constraints under a low-rank model phi(s,a)^T mu with phi rows
/// (1,1,1), (1,2,0), (3,1,4), (2,3,7) and unknown mu in R^{3x2}.
LinearSystemCase low_rank_counterexample();

/// Exact ranks of `coefficients` and of `[coefficients | rhs]`.
LinearSystemCase analyse(std::string name, IntMatrix coefficients, std::vector<BigInt> rhs);

struct InfeasibilityReport {
  std::vector<LinearSystemCase> cases;

  std::string text() const;
  nlohmann::json to_json() const;
};

InfeasibilityReport linear_infeasibility_demo();

// ---------------------------------------------------------------------------
// Elliptical potential: sum_{k,h} max_{s'} |phi|^2_{A_k^{-1}} <= 2 H d log(1 + k H U / (d lambda)).
// ---------------------------------------------------------------------------

struct PotentialParams {
  std::size_t horizon = 1;
  std::size_t dimension = 0;
  std::size_t max_reachable = 1;
  double lambda = 1.0;
};

struct PotentialCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
};

/// `step_max_sq_norms[k][h]` holds max_{s'} |phi_{k,h,s'}|^2_{A_k^{-1}}.
/// The number of episodes k in the bound is step_max_sq_norms.size().
PotentialCheck elliptical_potential_check(const std::vector<std::vector<double>>& step_max_sq_norms,
                                          const PotentialParams& params);

// ---------------------------------------------------------------------------
// Coverage, optimism and per-step concentration audits.
// ---------------------------------------------------------------------------

inline constexpr double kAuditTolerance = 1e-9;

struct EpisodeAudit {
  std::size_t episode = 0;
  double beta = 0.0;
  /// |theta_hat_k - theta*|_{A_k}
  double coverage_norm = 0.0;
  bool covered = false;
  /// min over (h, s, a) of Qhat - Q*; only evaluated when covered.
  std::optional<double> optimism_gap;
  /// Path steps where Qhat - [r + P Vhat_{h+1}] exceeds 2 H beta max |phi|_{A^{-1}}.
  std::size_t concentration_checked = 0;
  std::size_t concentration_violations = 0;
  double concentration_max_excess = -std::numeric_limits<double>::infinity();
  /// Path steps where the model-error part (P_hat - P) Vhat_{h+1} exceeds
  /// H beta max |phi|_{A^{-1}}, the mean-value bound that holds under coverage.
  std::size_t model_error_violations = 0;

  bool optimism_ok() const { return !optimism_gap || *optimism_gap >= -kAuditTolerance; }
};

EpisodeAudit audit_episode(const PlanningSnapshot& snapshot, const EpisodeTrajectory& trajectory,
                           const FeatureMap& map, const TabularMDP& mdp,
                           const TransitionCore& truth, const ValueTables& optimal);

struct RunAudit {
  std::size_t run_id = 0;
  PotentialParams potential;
  std::vector<EpisodeAudit> episodes;
  std::vector<std::vector<double>> step_max_sq_norms;

  nlohmann::json to_json() const;
  static RunAudit from_json(const nlohmann::json& doc);
};

struct AuditSummary {
  std::size_t episodes = 0;
  std::size_t covered = 0;
  std::size_t optimism_checked = 0;
  std::size_t optimism_violations = 0;
  std::size_t concentration_checked = 0;
  std::size_t concentration_violations = 0;
  std::size_t model_error_violations = 0;
  std::size_t potential_runs = 0;
  std::size_t potential_failures = 0;
  std::vector<PotentialCheck> potential;

  double coverage_rate() const {
    return episodes == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(episodes);
  }

  std::string text() const;
  nlohmann::json to_json() const;
};

/// Aggregates per-episode audits and the potential bound over runs.
AuditSummary lemma_audits(const std::vector<RunAudit>& runs);

}  // namespace mnlrl
