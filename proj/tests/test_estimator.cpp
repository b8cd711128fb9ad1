#include "mnlrl/estimator.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

using namespace mnlrl;
using namespace mnlrl::testing;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()),
           static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : values) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

/// Root of 1 - sigmoid(t) - t = 0 by bisection: the ridge MLE for one
/// observation of the non-anchor state in a two-state block with lambda = 1.
double one_record_root() {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f = 1.0 - 1.0 / (1.0 + std::exp(-mid)) - mid;
    (f > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ConfidenceParams params(double kappa, double lambda, double l_theta, double delta, std::size_t d,
                        std::size_t h, std::size_t u) {
  ConfidenceParams p;
  p.kappa = kappa;
  p.lambda = lambda;
  p.l_theta = l_theta;
  p.delta = delta;
  p.dimension = d;
  p.horizon = h;
  p.max_reachable = u;
  return p;
}

}  // namespace

TEST_CASE("gram updates") {
  SUBCASE("single unit feature") {
    GramMatrix g(2, 1.0);
    update_gram(g, std::vector<Matrix>{rows({{1.0, 0.0}})});
    CHECK(g.matrix() == rows({{2.0, 0.0}, {0.0, 1.0}}));
    CHECK(g.rank_one_count() == 1);
  }
  SUBCASE("anchors only leave A unchanged") {
    GramMatrix g(2, 1.0);
    update_gram(g, std::vector<Matrix>{Matrix::Zero(1, 2), Matrix::Zero(3, 2)});
    CHECK(g.matrix() == Matrix::Identity(2, 2));
    CHECK(g.rank_one_count() == 4);
  }
  SUBCASE("same direction twice") {
    GramMatrix g(2, 1.0);
    const Matrix b = rows({{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}});
    update_gram(g, std::vector<Matrix>{b, b});
    const Matrix want = rows({{2.0, 1.0}, {1.0, 2.0}});
    CHECK((g.matrix() - want).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("empty episode") {
    GramMatrix g(3, 2.0);
    update_gram(g, {});
    CHECK(g.matrix() == 2.0 * Matrix::Identity(3, 3));
    CHECK(g.rank_one_count() == 0);
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(GramMatrix(2, 0.0), ConfigError);
    GramMatrix g(2, 1.0);
    CHECK_THROWS_AS(g.add_block(Matrix::Zero(2, 3)), DimensionError);
  }
}

TEST_CASE("A-inverse norms") {
  GramMatrix g(2, 2.0);
  Vector e1 = Vector::Zero(2);
  e1(0) = 1.0;
  CHECK(mahalanobis_inv_norm(g, e1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(mahalanobis_inv_norm(g, Vector::Zero(2)) == 0.0);
  CHECK_THROWS_AS(mahalanobis_inv_norm(g, Vector::Zero(3)), DimensionError);

  // Against an explicit inverse.
  Rng rng(3);
  GramMatrix h(4, 1.0);
  for (int i = 0; i < 10; ++i) h.add_block(random_block(rng, 3, 4));
  const Matrix inv = h.matrix().inverse();
  for (int i = 0; i < 10; ++i) {
    const Vector v = random_vector(rng, 4);
    CHECK(mahalanobis_inv_norm(h, v) == doctest::Approx(std::sqrt(v.dot(inv * v))).epsilon(1e-12));
  }
}

TEST_CASE("gram invariants") {
  Rng rng(17);
  const double l_phi = 1.0;
  GramMatrix g(3, l_phi * l_phi);
  GramSolver prev(g);
  std::vector<Vector> probes;
  for (int i = 0; i < 8; ++i) probes.push_back(random_vector(rng, 3));
  for (int k = 0; k < 30; ++k) {
    Matrix block = random_block(rng, 1 + rng.below(4), 3);
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      if (block.row(i).norm() > l_phi) block.row(i) /= block.row(i).norm();
    }
    g.add_block(block);
    GramSolver next(g);
    // Symmetric positive definite with lambda_min >= lambda.
    CHECK(bit_equal(g.matrix(), g.matrix().transpose()));
    CHECK(g.matrix().selfadjointView<Eigen::Lower>().eigenvalues().minCoeff() >= g.lambda() - 1e-12);
    // log det never decreases, information never shrinks.
    CHECK(next.log_det() >= prev.log_det() - 1e-12);
    for (const auto& v : probes) CHECK(next.inv_norm(v) <= prev.inv_norm(v) + 1e-12);
    // |phi|_{A^{-1}} <= 1 when lambda >= L_phi^2.
    CHECK(next.max_inv_norm(block) <= 1.0 + 1e-12);
    prev = next;
  }
}

TEST_CASE("confidence radius") {
  SUBCASE("collapses to 1") {
    // d log(1 + kHU/(d lambda)) = 1 with k = H = U = d = 1, lambda = 1/(e - 1);
    // L_theta = 0, delta = 1, kappa = 1.
    const auto p = params(1.0, 1.0 / (std::exp(1.0) - 1.0), 0.0, 1.0, 1, 1, 1);
    CHECK(confidence_radius(1, p) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("worked value") {
    const auto p = params(0.5, 1.0, 1.0, 0.1, 2, 1, 2);
    // 2 sqrt(2 log 2 + 2 log 10) + 2, evaluated at 30 digits.
    CHECK(confidence_radius(1, p) == doctest::Approx(6.89549366136163).epsilon(1e-13));
  }
  SUBCASE("d = 0") {
    const auto p = params(0.5, 1.0, 1.0, 0.1, 0, 3, 1);
    CHECK(confidence_radius(7, p) == doctest::Approx(2.0 * std::sqrt(2.0 * std::log(10.0)) + 2.0));
  }
  SUBCASE("monotone in k") {
    const auto p = params(0.25, 1.0, 10.0, 0.01, 10, 24, 3);
    double last = confidence_radius(1, p);
    for (std::size_t k = 2; k <= 600; ++k) {
      const double b = confidence_radius(k, p);
      CHECK(b > last);
      last = b;
    }
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(params(1.5, 1.0, 1.0, 0.1, 1, 1, 1).validate(), ConfigError);
    CHECK_THROWS_AS(params(0.5, 1.0, 1.0, 0.0, 1, 1, 1).validate(), ConfigError);
    CHECK_THROWS_AS(params(0.5, 0.5, 1.0, 0.1, 1, 1, 1).validate(), ConfigError);
    CHECK_NOTHROW(params(0.5, 1.0, 1.0, 0.1, 1, 1, 1).validate());
  }
}

TEST_CASE("bonus") {
  GramMatrix g(2, 1.0);
  const Matrix anchors = Matrix::Zero(3, 2);
  CHECK(bonus(g, anchors, 5.0, 10) == 0.0);
  const Matrix block = rows({{0.0, 0.0}, {1.0, 0.0}});
  CHECK(bonus(g, block, 0.0, 10) == 0.0);
  // 2 H beta |e1|_{I^{-1}} = 2 * 3 * 1.5 * 1
  CHECK(bonus(g, block, 1.5, 3) == doctest::Approx(9.0).epsilon(1e-15));
}

TEST_CASE("MLE on an empty log is exactly zero") {
  const auto fit = fit_mle(ObservationLog(3), 1.0, TransitionCore{Vector::Zero(3), 0.0});
  CHECK(fit.core.theta == Vector::Zero(3));
  const auto from_elsewhere = fit_mle(ObservationLog(3), 1.0, TransitionCore{Vector::Ones(3), 0.0});
  CHECK(from_elsewhere.core.theta.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("MLE matches the one-record root") {
  ObservationLog log(1);
  Matrix block(2, 1);
  block << 0.0, 1.0;
  log.append(Observation{1, 0, block, 1});
  const double root = one_record_root();
  CHECK(root == doctest::Approx(0.4010).epsilon(1e-3));
  const auto fit = fit_mle(log, 1.0, TransitionCore{Vector::Zero(1), 0.0});
  CHECK(fit.core.theta(0) == doctest::Approx(root).epsilon(1e-10));
  CHECK(fit.stats.gradient_norm <= 1e-8);
}

TEST_CASE("MLE recovers the truth from many records") {
  Rng rng(2718);
  const Vector truth = (Vector(3) << 0.8, -0.5, 0.3).finished();
  const auto log = synthetic_log(rng, truth, 5000, 4);
  const auto fit = fit_mle(log, 1.0, TransitionCore{Vector::Zero(3), 0.0});
  CHECK((fit.core.theta - truth).norm() <= 0.1);
  CHECK(gradient(log, fit.core.theta, 1.0).norm() <= 1e-8);
}

TEST_CASE("MLE stationarity and determinism") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + rng.below(5);
    const auto log = synthetic_log(rng, random_vector(rng, d, 2.0), 1 + rng.below(200), 5, 2.0);
    const double lambda = 0.5 + rng.uniform();
    const TransitionCore start{random_vector(rng, d), 0.0};
    const auto a = fit_mle(log, lambda, start);
    const auto b = fit_mle(log, lambda, start);
    CHECK(gradient(log, a.core.theta, lambda).norm() <= 1e-8);
    CHECK(a.stats.gradient_norm <= 1e-8);
    CHECK(std::memcmp(a.core.theta.data(), b.core.theta.data(), sizeof(double) * d) == 0);
  }
}

TEST_CASE("MLE reports non-convergence with its best iterate") {
  ObservationLog log(1);
  Matrix block(2, 1);
  block << 0.0, 1.0;
  log.append(Observation{1, 0, block, 1});
  NewtonOptions options;
  options.max_iterations = 0;
  try {
    fit_mle(log, 1.0, TransitionCore{Vector::Zero(1), 0.0}, options);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_iterate().size() == 1);
    CHECK(e.gradient_norm() > 1e-8);
  }
  CHECK_THROWS_AS(fit_mle(log, 1.0, TransitionCore{Vector::Zero(2), 0.0}), DimensionError);
}
