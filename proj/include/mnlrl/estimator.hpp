#pragma once

#include "mnlrl/common.hpp"
#include "mnlrl/mnl_model.hpp"

#include <span>

namespace mnlrl {

/// A_k = lambda I + sum of phi phi^T over every reachable-state feature seen.
class GramMatrix {
 public:
  GramMatrix(std::size_t dimension, double lambda);

  /// Adds phi phi^T for every row of `block`, anchors included.
  void add_block(const Matrix& block);

  const Matrix& matrix() const { return a_; }
  double lambda() const { return lambda_; }
  std::size_t dimension() const { return static_cast<std::size_t>(a_.rows()); }
  std::size_t rank_one_count() const { return rank_one_count_; }

 private:
  Matrix a_;
  double lambda_;
  std::size_t rank_one_count_ = 0;
};

/// Adds the blocks of one finished episode.
void update_gram(GramMatrix& g, std::span<const Matrix> episode_blocks);

/// Cholesky factor of a GramMatrix snapshot, used for A^{-1}-norm queries
/// during one episode.
class GramSolver {
 public:
  explicit GramSolver(const GramMatrix& g);

  /// sqrt(v^T A^{-1} v)
  double inv_norm(const Vector& v) const;
  /// max over rows of the block of the A^{-1}-norm.
  double max_inv_norm(const Matrix& block) const;
  /// sqrt(v^T A v)
  double norm(const Vector& v) const;
  double log_det() const;

 private:
  Eigen::LLT<Matrix> llt_;
  Matrix a_;
};

double mahalanobis_inv_norm(const GramMatrix& g, const Vector& v);

/// Hyperparameters of the confidence radius.
struct ConfidenceParams {
  double kappa = 0.25;
  double lambda = 1.0;
  double l_theta = 10.0;
  double l_phi = 1.0;
  double delta = 0.01;
  std::size_t horizon = 1;
  std::size_t max_reachable = 1;
  std::size_t dimension = 0;

  /// Throws ConfigError on kappa or delta outside (0, 1), non-positive
  /// lambda, or lambda < l_phi^2.
  void validate() const;
};

/// beta_k(delta) = (1/kappa) sqrt(d log(1 + kHU/(d lambda)) + 2 log(1/delta))
///               + (1/kappa) sqrt(lambda) L_theta.
/// The d log(...) term is taken as its limit 0 when d = 0.
double confidence_radius(std::size_t k, const ConfidenceParams& p);

/// 2 H beta max_{s'} |phi(s, a, s')|_{A^{-1}}.
double bonus(const GramSolver& solver, const Matrix& block, double beta, std::size_t horizon);
double bonus(const GramMatrix& g, const Matrix& block, double beta, std::size_t horizon);

struct SolverStats {
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
};

struct MleFit {
  TransitionCore core;
  SolverStats stats;
};

/// Raised when the Newton solver does not reach the gradient tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Vector best, double gradient_norm)
      : Error(what), best_(std::move(best)), gradient_norm_(gradient_norm) {}
  const Vector& best_iterate() const { return best_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  Vector best_;
  double gradient_norm_;
};

struct NewtonOptions {
  double gradient_tolerance = 1e-8;
  std::size_t max_iterations = 100;
  std::size_t max_halvings = 60;
  double armijo = 1e-4;
};

/// Ridge-penalised MLE by damped Newton ascent, warm-started at `warm_start`.
MleFit fit_mle(const ObservationLog& log, double lambda, const TransitionCore& warm_start,
               const NewtonOptions& options = {});

}  // namespace mnlrl
