#include "mnlrl/mnl_model.hpp"

#include <cmath>
#include <cstring>

namespace mnlrl {

namespace {

void check_block(const Matrix& block, const Vector& theta) {
  if (block.rows() == 0) throw DimensionError("feature block is empty");
  if (block.cols() != theta.size()) {
    throw DimensionError("feature dimension " + std::to_string(block.cols()) +
                         " does not match parameter dimension " + std::to_string(theta.size()));
  }
}

void check_log(const ObservationLog& log, const Vector& theta) {
  if (static_cast<Eigen::Index>(log.dimension()) != theta.size()) {
    throw DimensionError("log dimension " + std::to_string(log.dimension()) +
                         " does not match parameter dimension " + std::to_string(theta.size()));
  }
}

std::string group_key(const Observation& obs) {
  const auto n = static_cast<std::size_t>(obs.block.size());
  std::string key(sizeof(std::size_t) * 2 + n * sizeof(double), '\0');
  const std::size_t rows = static_cast<std::size_t>(obs.block.rows());
  std::memcpy(key.data(), &rows, sizeof rows);
  std::memcpy(key.data() + sizeof rows, &obs.choice, sizeof obs.choice);
  if (n > 0) std::memcpy(key.data() + 2 * sizeof rows, obs.block.data(), n * sizeof(double));
  return key;
}

}  // namespace

Vector Observation::response() const {
  Vector y = Vector::Zero(block.rows());
  y(static_cast<Eigen::Index>(choice)) = 1.0;
  return y;
}

void ObservationLog::append(Observation obs) {
  if (obs.block.rows() == 0) throw DimensionError("observation has an empty feature block");
  if (obs.block.cols() != static_cast<Eigen::Index>(dimension_)) {
    throw DimensionError("observation feature dimension " + std::to_string(obs.block.cols()) +
                         " does not match log dimension " + std::to_string(dimension_));
  }
  if (obs.choice >= static_cast<std::size_t>(obs.block.rows())) {
    throw DimensionError("observation choice outside its reachable set");
  }
  auto key = group_key(obs);
  auto [it, inserted] = group_index_.try_emplace(std::move(key), order_.size());
  if (inserted) {
    order_.emplace_back(records_.size(), 1);
  } else {
    ++order_[it->second].second;
  }
  records_.push_back(std::move(obs));
}

std::vector<ObservationLog::Group> ObservationLog::groups() const {
  std::vector<Group> out;
  out.reserve(order_.size());
  for (const auto& [first, count] : order_) {
    out.push_back(Group{&records_[first].block, records_[first].choice, static_cast<double>(count)});
  }
  return out;
}

Vector softmax_probs(const Matrix& block, const Vector& theta) {
  check_block(block, theta);
  Vector logits = block * theta;
  const double top = logits.maxCoeff();
  Vector p = (logits.array() - top).exp().matrix();
  p /= p.sum();
  return p;
}

double penalized_log_likelihood(const ObservationLog& log, const Vector& theta, double lambda) {
  check_log(log, theta);
  double value = 0.0;
  for (const auto& g : log.groups()) {
    Vector logits = (*g.block) * theta;
    const double top = logits.maxCoeff();
    const double lse = top + std::log((logits.array() - top).exp().sum());
    value += g.count * (logits(static_cast<Eigen::Index>(g.choice)) - lse);
  }
  return value - 0.5 * lambda * theta.squaredNorm();
}

Vector gradient(const ObservationLog& log, const Vector& theta, double lambda) {
  check_log(log, theta);
  Vector grad = -lambda * theta;
  for (const auto& g : log.groups()) {
    const Matrix& block = *g.block;
    Vector residual = -softmax_probs(block, theta);
    residual(static_cast<Eigen::Index>(g.choice)) += 1.0;
    grad.noalias() += g.count * (block.transpose() * residual);
  }
  return grad;
}

Matrix hessian(const ObservationLog& log, const Vector& theta, double lambda) {
  check_log(log, theta);
  const auto d = theta.size();
  Matrix h = Matrix::Zero(d, d);
  for (const auto& g : log.groups()) {
    const Matrix& block = *g.block;
    const Vector p = softmax_probs(block, theta);
    const Vector mean = block.transpose() * p;
    // Phi^T diag(p) Phi - (Phi^T p)(Phi^T p)^T
    h.noalias() += g.count * (block.transpose() * p.asDiagonal() * block);
    h.noalias() -= g.count * (mean * mean.transpose());
  }
  Matrix out = -0.5 * (h + h.transpose());
  out.diagonal().array() -= lambda;
  return out;
}

}  // namespace mnlrl
