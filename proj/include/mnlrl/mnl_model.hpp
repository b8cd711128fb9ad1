#pragma once

#include "mnlrl/common.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace mnlrl {

/// Parameter of the MNL transition model. `bound` is L_theta; it is only
/// enforced for ground-truth cores.
struct TransitionCore {
  Vector theta;
  double bound = 0.0;

  std::size_t dimension() const { return static_cast<std::size_t>(theta.size()); }
};

/// One observed transition: the feature block over the reachable set at
/// (s_{k,h}, a_{k,h}) and the index of the realised next state in that block.
/// The response y is the one-hot vector with a 1 at `choice`.
struct Observation {
  std::size_t episode = 0;
  std::size_t step = 0;
  Matrix block;
  std::size_t choice = 0;

  Vector response() const;
};

/// Append-only record of transition responses.
///
/// Alongside the raw records the log keeps a grouped view: records with a
/// bit-identical block and the same choice share one group with a
/// multiplicity. Likelihood, gradient and Hessian are evaluated over groups,
/// which is exact and keeps the per-episode refit cheap for tabular maps.
class ObservationLog {
 public:
  explicit ObservationLog(std::size_t dimension) : dimension_(dimension) {}

  void append(Observation obs);

  struct Group {
    const Matrix* block;  // points into records_ storage of the first member
    std::size_t choice;
    double count;
  };

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<Observation>& records() const { return records_; }
  std::vector<Group> groups() const;

 private:
  std::size_t dimension_;
  std::vector<Observation> records_;
  // group key -> (first record index, count); insertion order kept in order_.
  std::unordered_map<std::string, std::size_t> group_index_;
  std::vector<std::pair<std::size_t, std::size_t>> order_;
};

/// exp(phi_i . theta) / sum_j exp(phi_j . theta) with the max logit subtracted.
Vector softmax_probs(const Matrix& block, const Vector& theta);

/// sum over records of log p(choice) minus (lambda / 2) |theta|^2.
double penalized_log_likelihood(const ObservationLog& log, const Vector& theta, double lambda);

/// sum over records of sum_i (y_i - p_i) phi_i, minus lambda theta.
Vector gradient(const ObservationLog& log, const Vector& theta, double lambda);

/// -sum over records of Phi^T (diag(p) - p p^T) Phi, minus lambda I.
Matrix hessian(const ObservationLog& log, const Vector& theta, double lambda);

}  // namespace mnlrl
