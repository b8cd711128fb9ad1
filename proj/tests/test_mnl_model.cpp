#include "mnlrl/mnl_model.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>

using namespace mnlrl;
using namespace mnlrl::testing;

namespace {

Matrix column(std::initializer_list<double> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

ObservationLog single(const Matrix& block, std::size_t choice) {
  ObservationLog log(static_cast<std::size_t>(block.cols()));
  log.append(Observation{1, 0, block, choice});
  return log;
}

}  // namespace

TEST_CASE("softmax at theta = 0 is uniform") {
  Rng rng(1);
  for (std::size_t m = 1; m <= 6; ++m) {
    const Vector p = softmax_probs(random_block(rng, m, 3), Vector::Zero(3));
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p(i) == doctest::Approx(1.0 / double(m)).epsilon(1e-15));
  }
}

TEST_CASE("softmax two-state example") {
  const Vector p = softmax_probs(column({0.0, 1.0}), vec({std::log(2.0)}));
  CHECK(p(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(p(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("softmax survives huge logits") {
  const Vector p = softmax_probs(column({1000.0, 0.0}), vec({1.0}));
  CHECK(std::isfinite(p(0)));
  CHECK(std::isfinite(p(1)));
  CHECK(p(0) == 1.0);
  // exp(-1000) is below the smallest subnormal double.
  CHECK(p(1) >= 0.0);
  CHECK(p(1) < 1e-300);
  CHECK(p.sum() == doctest::Approx(1.0));
}

TEST_CASE("dimension mismatches are rejected") {
  CHECK_THROWS_AS(softmax_probs(Matrix::Zero(2, 3), Vector::Zero(2)), DimensionError);
  ObservationLog log(2);
  CHECK_THROWS_AS(log.append(Observation{1, 0, Matrix::Zero(2, 3), 0}), DimensionError);
  CHECK_THROWS_AS(log.append(Observation{1, 0, Matrix::Zero(2, 2), 2}), DimensionError);
  CHECK_THROWS_AS(penalized_log_likelihood(log, Vector::Zero(3), 1.0), DimensionError);
}

TEST_CASE("penalised log-likelihood examples") {
  SUBCASE("empty log is the pure penalty") {
    const Vector theta = vec({1.0, -2.0});
    CHECK(penalized_log_likelihood(ObservationLog(2), theta, 0.5) == doctest::Approx(-0.5 * 0.5 * 5.0));
  }
  SUBCASE("uniform choice among m") {
    for (std::size_t m = 1; m <= 5; ++m) {
      const auto log = single(Matrix::Zero(static_cast<Eigen::Index>(m), 1), m - 1);
      CHECK(penalized_log_likelihood(log, Vector::Zero(1), 0.0) ==
            doctest::Approx(std::log(1.0 / double(m))).epsilon(1e-15));
    }
  }
  SUBCASE("two-state example") {
    const auto log = single(column({0.0, 1.0}), 1);
    // log(2/3)
    CHECK(penalized_log_likelihood(log, vec({std::log(2.0)}), 0.0) ==
          doctest::Approx(-0.405465108108164382).epsilon(1e-14));
  }
}

TEST_CASE("gradient and Hessian examples") {
  const Vector theta = vec({0.3, -1.1});
  const ObservationLog empty(2);
  CHECK(gradient(empty, theta, 2.0).isApprox(-2.0 * theta));
  CHECK(hessian(empty, theta, 2.0).isApprox(-2.0 * Matrix::Identity(2, 2)));

  const auto log = single(column({0.0, 1.0}), 1);
  CHECK(hessian(log, Vector::Zero(1), 0.0)(0, 0) == doctest::Approx(-0.25).epsilon(1e-15));
  // y - p = (0, 1) - (1/2, 1/2)
  CHECK(gradient(log, Vector::Zero(1), 0.0)(0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("gradient and Hessian agree with finite differences") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.below(5);
    const Vector truth = random_vector(rng, d);
    const auto log = synthetic_log(rng, truth, 1 + rng.below(30), 5);
    const double lambda = rng.uniform() * 2.0;
    const Vector theta = random_vector(rng, d, 2.0);

    const auto f = [&](const Vector& t) { return naive_log_likelihood(log, t, lambda); };
    const auto g = [&](const Vector& t) { return gradient(log, t, lambda); };
    CHECK(relative_error(gradient(log, theta, lambda), fd_gradient(f, theta)) <= 1e-6);
    CHECK(relative_error(hessian(log, theta, lambda), fd_jacobian(g, theta)) <= 1e-5);
  }
}

TEST_CASE("grouped evaluation matches the per-record sum") {
  Rng rng(5);
  const Vector truth = random_vector(rng, 3);
  // Repeated blocks exercise the grouping path.
  ObservationLog log(3);
  const Matrix a = random_block(rng, 3, 3);
  const Matrix b = random_block(rng, 2, 3);
  for (std::size_t i = 0; i < 40; ++i) log.append(Observation{i, 0, (i % 3 == 0) ? b : a, i % 2});
  const auto extra = synthetic_log(rng, truth, 10, 4);
  for (const auto& obs : extra.records()) log.append(obs);
  CHECK(log.size() == 50);
  CHECK(log.groups().size() < log.size());
  double total = 0.0;
  for (const auto& g : log.groups()) total += g.count;
  CHECK(total == 50.0);

  const Vector theta = random_vector(rng, 3);
  CHECK(penalized_log_likelihood(log, theta, 0.7) ==
        doctest::Approx(naive_log_likelihood(log, theta, 0.7)).epsilon(1e-12));
}

TEST_CASE("model invariants") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng.below(4);
    const std::size_t m = 1 + rng.below(6);
    const Matrix block = random_block(rng, m, d, 3.0, false);
    const Vector theta = random_vector(rng, d, 3.0);
    const Vector p = softmax_probs(block, theta);

    // Simplex.
    CHECK(p.minCoeff() > 0.0);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);

    // Permutation equivariance.
    std::vector<Eigen::Index> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = m; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    Matrix permuted(block.rows(), block.cols());
    for (std::size_t i = 0; i < m; ++i) permuted.row(static_cast<Eigen::Index>(i)) = block.row(perm[i]);
    const Vector q = softmax_probs(permuted, theta);
    for (std::size_t i = 0; i < m; ++i) CHECK(std::abs(q(static_cast<Eigen::Index>(i)) - p(perm[i])) <= 1e-14);

    // Shift invariance.
    const Vector c = random_vector(rng, d, 5.0);
    const Matrix shifted = block.rowwise() + c.transpose();
    CHECK((softmax_probs(shifted, theta) - p).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("likelihood is strongly concave") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng.below(5);
    const auto log = synthetic_log(rng, random_vector(rng, d), 1 + rng.below(20), 4);
    const double lambda = 0.1 + rng.uniform();
    const Vector t1 = random_vector(rng, d, 3.0);
    const Vector t2 = random_vector(rng, d, 3.0);
    const double mid = penalized_log_likelihood(log, 0.5 * (t1 + t2), lambda);
    const double avg = 0.5 * (penalized_log_likelihood(log, t1, lambda) +
                              penalized_log_likelihood(log, t2, lambda));
    CHECK(mid >= avg - 1e-12);

    const Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian(log, t1, lambda));
    CHECK(eig.eigenvalues().maxCoeff() <= -lambda + 1e-10);
  }
}
