#include "mnlrl/agent.hpp"

#include <cmath>

namespace mnlrl {

UcrlMnlAgent::UcrlMnlAgent(std::shared_ptr<const FeatureMap> map, const TabularMDP& mdp,
                           UcrlMnlConfig config)
    : map_(std::move(map)),
      config_(std::move(config)),
      state_{TransitionCore{Vector::Zero(static_cast<Eigen::Index>(map_->dimension())),
                            config_.params.l_theta},
             GramMatrix(map_->dimension(), config_.params.lambda), ObservationLog(map_->dimension()),
             1, config_.params} {
  if (config_.episodes == 0) throw ConfigError("episode count K must be positive");
  if (!(config_.beta_scale >= 0.0)) throw ConfigError("beta scale must be non-negative");
  auto& p = state_.params;
  p.dimension = map_->dimension();
  p.horizon = mdp.horizon();
  p.max_reachable = map_->max_reachable();
  p.l_phi = map_->bound();
  // Union bound over episodes.
  p.delta = config_.params.delta / static_cast<double>(config_.episodes);
  p.validate();
  config_.params = p;
}

double UcrlMnlAgent::current_beta() const {
  return config_.beta_scale * confidence_radius(state_.episode, state_.params);
}

EpisodeReport UcrlMnlAgent::run_episode(const TabularMDP& mdp, Rng& rng) {
  const std::size_t k = state_.episode;
  const std::size_t horizon = mdp.horizon();
  const double beta = current_beta();
  const GramSolver solver(state_.gram);

  OptimisticValues values =
      plan(state_.theta_hat.theta, solver, beta, *map_, mdp.rewards(), horizon);

  EpisodeReport report{{}, greedy_policy(values.q), {}, std::nullopt};
  report.diagnostics.beta = beta;

  std::vector<Matrix> blocks;
  blocks.reserve(horizon);
  StateId s = mdp.initial_state();
  for (std::size_t h = 0; h < horizon; ++h) {
    const ActionId a = report.policy(h, s);
    const StepResult out = step(mdp, s, a, rng);
    const Matrix& block = map_->block(s, a);
    const double max_norm = solver.max_inv_norm(block);
    report.diagnostics.step_max_sq_norms.push_back(max_norm * max_norm);
    report.trajectory.steps.push_back({s, a, out.reward, out.next, out.choice});
    report.trajectory.total_return += out.reward;
    state_.log.append(Observation{k, h, block, out.choice});
    blocks.push_back(block);
    s = out.next;
  }
  report.diagnostics.episode_return = report.trajectory.total_return;

  if (config_.keep_snapshots) {
    report.snapshot = PlanningSnapshot{k, state_.theta_hat.theta, state_.gram, beta, std::move(values)};
  }

  update_gram(state_.gram, blocks);
  MleFit fit = fit_mle(state_.log, state_.params.lambda, state_.theta_hat, config_.newton);
  state_.theta_hat = std::move(fit.core);
  report.diagnostics.mle_iterations = fit.stats.iterations;
  report.diagnostics.mle_gradient_norm = fit.stats.gradient_norm;
  ++state_.episode;
  return report;
}

EpisodeReport RandomAgent::run_episode(const TabularMDP& mdp, Rng& rng) {
  Policy policy(mdp.horizon(), mdp.n_states());
  for (std::size_t h = 0; h < mdp.horizon(); ++h) {
    for (StateId s = 0; s < mdp.n_states(); ++s) policy.at(h, s) = rng.below(mdp.n_actions());
  }
  EpisodeReport report{rollout(mdp, policy, rng), policy, {}, std::nullopt};
  report.diagnostics.episode_return = report.trajectory.total_return;
  return report;
}

EpsilonGreedyAgent::EpsilonGreedyAgent(const TabularMDP& mdp, EpsilonGreedyConfig config)
    : config_(std::move(config)) {
  if (!(config_.epsilon0 >= 0.0 && config_.epsilon0 <= 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1]");
  }
  const auto n_states = static_cast<Eigen::Index>(mdp.n_states());
  const auto n_actions = static_cast<Eigen::Index>(mdp.n_actions());
  if (config_.initial_q.empty()) {
    q_.assign(mdp.horizon(), Matrix::Zero(n_states, n_actions));
  } else {
    if (config_.initial_q.size() != mdp.horizon()) throw DimensionError("initial Q has wrong horizon");
    for (const auto& q : config_.initial_q) {
      if (q.rows() != n_states || q.cols() != n_actions) throw DimensionError("initial Q has wrong shape");
    }
    q_ = config_.initial_q;
  }
  visits_.assign(mdp.horizon(), Matrix::Zero(n_states, n_actions));
}

EpisodeReport EpsilonGreedyAgent::run_episode(const TabularMDP& mdp, Rng& rng) {
  const double epsilon =
      config_.fixed ? config_.epsilon0 : config_.epsilon0 / std::sqrt(static_cast<double>(episode_));
  Policy policy = greedy_policy(q_);
  for (std::size_t h = 0; h < mdp.horizon(); ++h) {
    for (StateId s = 0; s < mdp.n_states(); ++s) {
      if (rng.uniform() < epsilon) policy.at(h, s) = rng.below(mdp.n_actions());
    }
  }

  EpisodeReport report{rollout(mdp, policy, rng), policy, {}, std::nullopt};
  report.diagnostics.episode_return = report.trajectory.total_return;

  // Learning rate (H + 1) / (H + n) for the n-th visit of (h, s, a).
  const auto horizon = static_cast<double>(mdp.horizon());
  for (std::size_t h = 0; h < report.trajectory.steps.size(); ++h) {
    const auto& st = report.trajectory.steps[h];
    const auto s = static_cast<Eigen::Index>(st.state);
    const auto a = static_cast<Eigen::Index>(st.action);
    const double n = (visits_[h](s, a) += 1.0);
    const double alpha = (horizon + 1.0) / (horizon + n);
    const double next_value =
        h + 1 < q_.size() ? q_[h + 1].row(static_cast<Eigen::Index>(st.next)).maxCoeff() : 0.0;
    q_[h](s, a) = (1.0 - alpha) * q_[h](s, a) + alpha * (st.reward + next_value);
  }
  ++episode_;
  return report;
}

OptimalOracleAgent::OptimalOracleAgent(const TabularMDP& mdp)
    : policy_(greedy_policy(exact_value_iteration(mdp).q)) {}

EpisodeReport OptimalOracleAgent::run_episode(const TabularMDP& mdp, Rng& rng) {
  EpisodeReport report{rollout(mdp, policy_, rng), policy_, {}, std::nullopt};
  report.diagnostics.episode_return = report.trajectory.total_return;
  return report;
}

AgentKind parse_agent_kind(const std::string& name) {
  if (name == "ucrl-mnl" || name == "ucrl_mnl") return AgentKind::kUcrlMnl;
  if (name == "random") return AgentKind::kRandom;
  if (name == "epsilon-greedy" || name == "epsilon_greedy") return AgentKind::kEpsilonGreedy;
  if (name == "optimal" || name == "optimal_oracle" || name == "optimal-oracle") {
    return AgentKind::kOptimalOracle;
  }
  throw ConfigError("unknown agent kind '" + name + "'");
}

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kUcrlMnl: return "ucrl-mnl";
    case AgentKind::kRandom: return "random";
    case AgentKind::kEpsilonGreedy: return "epsilon-greedy";
    case AgentKind::kOptimalOracle: return "optimal";
  }
  return "unknown";
}

std::unique_ptr<Agent> baseline_agent(AgentKind kind, const TabularMDP& mdp,
                                      const BaselineConfig& config) {
  switch (kind) {
    case AgentKind::kRandom: return std::make_unique<RandomAgent>();
    case AgentKind::kEpsilonGreedy:
      return std::make_unique<EpsilonGreedyAgent>(mdp, config.epsilon_greedy);
    case AgentKind::kOptimalOracle: return std::make_unique<OptimalOracleAgent>(mdp);
    case AgentKind::kUcrlMnl: break;
  }
  throw ConfigError("'" + to_string(kind) + "' is not a baseline agent");
}

}  // namespace mnlrl
