#include "mnlrl/estimator.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mnlrl {

GramMatrix::GramMatrix(std::size_t dimension, double lambda)
    : a_(lambda * Matrix::Identity(static_cast<Eigen::Index>(dimension),
                                   static_cast<Eigen::Index>(dimension))),
      lambda_(lambda) {
  if (!(lambda > 0.0)) throw ConfigError("ridge weight lambda must be positive");
}

void GramMatrix::add_block(const Matrix& block) {
  if (block.cols() != a_.cols()) {
    throw DimensionError("feature dimension " + std::to_string(block.cols()) +
                         " does not match gram dimension " + std::to_string(a_.cols()));
  }
  for (Eigen::Index i = 0; i < block.rows(); ++i) {
    const auto row = block.row(i);
    a_.noalias() += row.transpose() * row;
  }
  rank_one_count_ += static_cast<std::size_t>(block.rows());
}

void update_gram(GramMatrix& g, std::span<const Matrix> episode_blocks) {
  for (const auto& block : episode_blocks) g.add_block(block);
}

GramSolver::GramSolver(const GramMatrix& g) : llt_(g.matrix()), a_(g.matrix()) {
  if (llt_.info() != Eigen::Success) {
    throw Error("gram matrix is not positive definite");
  }
}

double GramSolver::inv_norm(const Vector& v) const {
  if (v.size() != a_.rows()) {
    throw DimensionError("vector dimension " + std::to_string(v.size()) +
                         " does not match gram dimension " + std::to_string(a_.rows()));
  }
  if (v.size() == 0) return 0.0;
  // v^T A^{-1} v = |L^{-1} v|^2
  const Vector w = llt_.matrixL().solve(v);
  return w.norm();
}

double GramSolver::max_inv_norm(const Matrix& block) const {
  double best = 0.0;
  for (Eigen::Index i = 0; i < block.rows(); ++i) {
    best = std::max(best, inv_norm(block.row(i).transpose()));
  }
  return best;
}

double GramSolver::norm(const Vector& v) const {
  if (v.size() != a_.rows()) throw DimensionError("vector dimension does not match gram");
  return std::sqrt(std::max(0.0, v.dot(a_ * v)));
}

double GramSolver::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

double mahalanobis_inv_norm(const GramMatrix& g, const Vector& v) {
  return GramSolver(g).inv_norm(v);
}

void ConfidenceParams::validate() const {
  if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigError("kappa must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(l_theta >= 0.0) || !(l_phi >= 0.0)) throw ConfigError("norm bounds must be non-negative");
  if (horizon == 0 || max_reachable == 0) throw ConfigError("horizon and U must be positive");
  if (lambda < l_phi * l_phi) {
    throw ConfigError("lambda = " + std::to_string(lambda) + " is below L_phi^2 = " +
                      std::to_string(l_phi * l_phi));
  }
}

double confidence_radius(std::size_t k, const ConfidenceParams& p) {
  const double d = static_cast<double>(p.dimension);
  const double growth = static_cast<double>(k) * static_cast<double>(p.horizon) *
                        static_cast<double>(p.max_reachable);
  const double info = p.dimension == 0 ? 0.0 : d * std::log1p(growth / (d * p.lambda));
  return (std::sqrt(info + 2.0 * std::log(1.0 / p.delta)) + std::sqrt(p.lambda) * p.l_theta) /
         p.kappa;
}

double bonus(const GramSolver& solver, const Matrix& block, double beta, std::size_t horizon) {
  if (block.rows() == 0) throw DimensionError("bonus needs a non-empty block");
  return 2.0 * static_cast<double>(horizon) * beta * solver.max_inv_norm(block);
}

double bonus(const GramMatrix& g, const Matrix& block, double beta, std::size_t horizon) {
  return bonus(GramSolver(g), block, beta, horizon);
}

MleFit fit_mle(const ObservationLog& log, double lambda, const TransitionCore& warm_start,
               const NewtonOptions& options) {
  if (!(lambda > 0.0)) throw ConfigError("fit_mle needs lambda > 0");
  if (warm_start.dimension() != log.dimension()) {
    throw DimensionError("warm start dimension does not match the log");
  }

  MleFit fit{warm_start, {}};
  Vector& theta = fit.core.theta;
  if (log.empty()) {
    // The ridge term alone has its unique maximiser at the origin.
    theta.setZero();
    return fit;
  }

  double value = penalized_log_likelihood(log, theta, lambda);
  Vector grad = gradient(log, theta, lambda);
  double grad_norm = grad.norm();

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    if (grad_norm <= options.gradient_tolerance) {
      fit.stats = {iter, grad_norm};
      return fit;
    }
    // Newton direction from (-H) step = g; -H is positive definite.
    const Matrix neg_h = -hessian(log, theta, lambda);
    const Eigen::LLT<Matrix> llt(neg_h);
    if (llt.info() != Eigen::Success) {
      throw ConvergenceError("negative Hessian lost definiteness", theta, grad_norm);
    }
    const Vector step = llt.solve(grad);
    const double decrement = grad.dot(step);

    double t = 1.0;
    bool accepted = false;
    Vector candidate;
    double candidate_value = 0.0;
    for (std::size_t halving = 0; halving <= options.max_halvings; ++halving, t *= 0.5) {
      candidate = theta + t * step;
      candidate_value = penalized_log_likelihood(log, candidate, lambda);
      if (candidate_value >= value + options.armijo * t * decrement) {
        accepted = true;
        break;
      }
      // Near the optimum the increase is below double resolution; a full
      // Newton step is then the best available move.
      if (halving == 0 &&
          decrement <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(value))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw ConvergenceError("line search failed after " + std::to_string(options.max_halvings) +
                                 " halvings",
                             theta, grad_norm);
    }
    theta = std::move(candidate);
    value = candidate_value;
    grad = gradient(log, theta, lambda);
    grad_norm = grad.norm();
  }

  if (grad_norm <= options.gradient_tolerance) {
    fit.stats = {options.max_iterations, grad_norm};
    return fit;
  }
  throw ConvergenceError("Newton solver did not converge in " +
                             std::to_string(options.max_iterations) + " iterations",
                         theta, grad_norm);
}

}  // namespace mnlrl
