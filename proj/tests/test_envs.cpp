#include "mnlrl/envs.hpp"
#include "mnlrl/features.hpp"
#include "mnlrl/planner.hpp"

#include <doctest.h>

#include <cmath>

using namespace mnlrl;
using riverswim_actions::kLeft;
using riverswim_actions::kRight;

TEST_CASE("riverswim kernel and rewards") {
  const auto mdp = riverswim(6, 24);
  CHECK(mdp.n_states() == 6);
  CHECK(mdp.n_actions() == 2);
  CHECK(mdp.horizon() == 24);
  CHECK(mdp.initial_state() == 0);

  // Interior, right: back 0.05, stay 0.6, forward 0.35.
  CHECK(mdp.probability(1, kRight, 0) == 0.05);
  CHECK(mdp.probability(1, kRight, 1) == 0.6);
  CHECK(mdp.probability(1, kRight, 2) == 0.35);
  // Ends, right.
  CHECK(mdp.probability(0, kRight, 0) == 0.4);
  CHECK(mdp.probability(0, kRight, 1) == 0.6);
  CHECK(mdp.probability(5, kRight, 4) == 0.4);
  CHECK(mdp.probability(5, kRight, 5) == 0.6);
  // Left is deterministic.
  CHECK(mdp.probability(0, kLeft, 0) == 1.0);
  for (StateId s = 1; s < 6; ++s) CHECK(mdp.probability(s, kLeft, s - 1) == 1.0);

  CHECK(mdp.reward(0, kLeft) == 0.005);
  CHECK(mdp.reward(5, kRight) == 1.0);
  double others = 0.0;
  for (StateId s = 0; s < 6; ++s) {
    for (ActionId a = 0; a < 2; ++a) {
      if (!((s == 0 && a == kLeft) || (s == 5 && a == kRight))) others += mdp.reward(s, a);
    }
  }
  CHECK(others == 0.0);

  CHECK(riverswim(6, 24, 0.05).reward(0, kLeft) == 0.05);
  CHECK_THROWS_AS(riverswim(2, 24), ConfigError);
}

TEST_CASE("step is deterministic on singleton rows and reproducible") {
  const auto mdp = riverswim(6, 24);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto r = step(mdp, 3, kLeft, rng);
    CHECK(r.next == 2);
    CHECK(r.choice == 0);
    CHECK(r.reward == 0.0);
  }
  Rng a(77), b(77);
  for (int i = 0; i < 1000; ++i) CHECK(step(mdp, 2, kRight, a).next == step(mdp, 2, kRight, b).next);
}

TEST_CASE("step frequencies match the kernel") {
  const auto mdp = riverswim(6, 24);
  Rng rng(12345);
  const int n = 100000;
  int stay = 0;
  for (int i = 0; i < n; ++i) {
    const auto r = step(mdp, 1, kRight, rng);
    stay += r.next == 1 ? 1 : 0;
    CHECK(mdp.transition(1, kRight).targets[r.choice] == r.next);
  }
  CHECK(std::abs(double(stay) / n - 0.6) <= 0.01);
}

TEST_CASE("value iteration examples") {
  const auto mdp = riverswim(6, 24);
  SUBCASE("H = 1 is the best immediate reward") {
    const auto vt = exact_value_iteration(mdp.with_horizon(1));
    for (StateId s = 0; s < 6; ++s) {
      CHECK(vt.v(0, static_cast<Eigen::Index>(s)) == std::max(mdp.reward(s, 0), mdp.reward(s, 1)));
    }
  }
  SUBCASE("zero rewards") {
    TabularMDP z = riverswim(4, 5);
    for (StateId s = 0; s < 4; ++s) {
      for (ActionId a = 0; a < 2; ++a) z.set_reward(s, a, 0.0);
    }
    CHECK(exact_value_iteration(z).v.isZero(0.0));
  }
  SUBCASE("shape and bounds") {
    const auto vt = exact_value_iteration(mdp);
    CHECK(vt.v.rows() == 25);
    CHECK(vt.q.size() == 24);
    CHECK(vt.v.row(24).isZero(0.0));
    for (std::size_t h = 0; h < 24; ++h) {
      CHECK(vt.v.row(static_cast<Eigen::Index>(h)).minCoeff() >= 0.0);
      CHECK(vt.v.row(static_cast<Eigen::Index>(h)).maxCoeff() <= double(24 - h));
    }
  }
}

TEST_CASE("policy evaluation") {
  const auto mdp = riverswim(6, 24);
  const auto vt = exact_value_iteration(mdp);
  const Policy pi_star = greedy_policy(vt.q);
  CHECK((policy_evaluation(mdp, pi_star) - vt.v).cwiseAbs().maxCoeff() <= 1e-12);

  const Policy left(24, 6, kLeft);
  CHECK(policy_evaluation(mdp, left)(0, 0) == doctest::Approx(0.005 * 24).epsilon(1e-12));

  // Every deterministic policy is dominated by the optimum.
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    Policy pi(24, 6);
    for (std::size_t h = 0; h < 24; ++h) {
      for (StateId s = 0; s < 6; ++s) pi.at(h, s) = rng.below(2);
    }
    CHECK(policy_evaluation(mdp, pi)(0, 0) <= vt.v(0, 0) + 1e-12);
  }

  const auto flat = mdp.with_horizon(0);
  CHECK(policy_evaluation(flat, Policy(0, 6)).isZero(0.0));
  CHECK(exact_value_iteration(flat).v.isZero(0.0));
}

TEST_CASE("Monte Carlo value of the optimal policy") {
  const auto mdp = riverswim(6, 24);
  const auto vt = exact_value_iteration(mdp);
  const Policy pi = greedy_policy(vt.q);
  Rng rng(2020);
  const int n = 10000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rollout(mdp, pi, rng).total_return;
    sum += g;
    sq += g * g;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - vt.v(0, 0)) <= 2.0 * se);
}

TEST_CASE("greedy policy breaks ties to the lowest action") {
  std::vector<Matrix> q(2, Matrix::Zero(3, 3));
  q[1](2, 1) = 1.0;
  q[1](2, 2) = 1.0;
  const Policy pi = greedy_policy(q);
  CHECK(pi(0, 0) == 0);
  CHECK(pi(1, 2) == 1);
}

TEST_CASE("ground-truth core round-trips the kernel") {
  const auto check_round_trip = [](const TabularMDP& mdp) {
    const auto map = tabular_feature_map(mdp);
    const auto core = mdp_to_core(mdp, map);
    CHECK(core.dimension() == map.dimension());
    for (const auto& [key, e] : map.entries()) {
      const Vector p = softmax_probs(e.block, core.theta);
      const auto& row = mdp.transition(key.first, key.second);
      for (std::size_t i = 0; i < row.targets.size(); ++i) {
        CHECK(std::abs(p(static_cast<Eigen::Index>(i)) - row.probs[i]) <= 1e-12);
      }
    }
    return core;
  };

  const auto mdp = riverswim(6, 24);
  const auto core = check_round_trip(mdp);
  const auto map = tabular_feature_map(mdp);
  // s1, right: log-odds of s2 against s1.
  const auto& entry = map.entries().at({0, kRight});
  const Vector p = entry.block.row(1).transpose();
  CHECK(p.dot(core.theta) == doctest::Approx(0.405465108108164382).epsilon(1e-14));

  TabularMDP uniform(2, 1, 1, 0);
  uniform.set_transition(0, 0, {0, 1}, {0.5, 0.5});
  uniform.set_transition(1, 0, {0, 1}, {0.5, 0.5});
  CHECK(mdp_to_core(uniform, tabular_feature_map(uniform)).theta.isZero(0.0));

  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    check_round_trip(random_tabular_mdp(2 + rng.below(5), 1 + rng.below(3), 4, 4, rng));
  }
}

TEST_CASE("MDP JSON round trip and validation") {
  const auto mdp = riverswim(5, 7, 0.05);
  const auto back = TabularMDP::from_json(mdp.to_json());
  CHECK(back.n_states() == 5);
  CHECK(back.horizon() == 7);
  CHECK(back.rewards() == mdp.rewards());
  for (StateId s = 0; s < 5; ++s) {
    for (ActionId a = 0; a < 2; ++a) {
      CHECK(back.transition(s, a).targets == mdp.transition(s, a).targets);
      CHECK(back.transition(s, a).probs == mdp.transition(s, a).probs);
    }
  }

  auto doc = mdp.to_json();
  doc["transitions"][0]["probs"][0] = 0.7;
  CHECK_THROWS_AS(TabularMDP::from_json(doc), ConfigError);
  auto bad_reward = mdp.to_json();
  bad_reward["rewards"][0]["r"] = 1.5;
  CHECK_THROWS_AS(TabularMDP::from_json(bad_reward), ConfigError);
  CHECK_THROWS_AS(TabularMDP::from_json(nlohmann::json::parse("{\"n_states\": 2}")), ConfigError);
}
