#include "mnlrl/theory_checks.hpp"

#include "mnlrl/mnl_model.hpp"

#include <cmath>
#include <sstream>

namespace mnlrl {

namespace {

std::vector<std::vector<std::int64_t>> bilinear_phi() { return {{1, 1}, {1, 2}, {3, 1}, {2, 3}}; }
std::vector<std::int64_t> bilinear_psi() { return {1, -2}; }
std::vector<std::vector<std::int64_t>> low_rank_phi() {
  return {{1, 1, 1}, {1, 2, 0}, {3, 1, 4}, {2, 3, 7}};
}
constexpr std::size_t kCounterexampleStates = 2;

std::string format_row(const std::vector<BigInt>& row) {
  std::ostringstream out;
  for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
  return out.str();
}

}  // namespace

LinearSystemCase analyse(std::string name, IntMatrix coefficients, std::vector<BigInt> rhs) {
  LinearSystemCase c{std::move(name), std::move(coefficients), std::move(rhs), 0, 0};
  c.coefficient_rank = exact_rank(c.coefficients);
  c.augmented_rank = exact_rank(augment(c.coefficients, c.rhs));
  return c;
}

LinearSystemCase bilinear_counterexample() {
  // Row sums of phi^T M Psi equal (sum_j psi_j) phi^T M, so each (s, a)
  // contributes the equation (sum psi) phi(s,a) . (x, y) = 1.
  std::int64_t psi_sum = 0;
  for (auto v : bilinear_psi()) psi_sum += v;
  IntMatrix coefficients;
  for (const auto& phi : bilinear_phi()) {
    std::vector<BigInt> row;
    for (auto v : phi) row.emplace_back(psi_sum * v);
    coefficients.push_back(std::move(row));
  }
  return analyse("bilinear", std::move(coefficients), std::vector<BigInt>(4, BigInt(1)));
}

LinearSystemCase low_rank_counterexample() {
  // Unknowns x_{j,s'} ordered (x11, x12, x21, x22, x31, x32); the row sum of
  // phi^T mu gives coefficient phi_j for every x_{j,s'}.
  IntMatrix coefficients;
  for (const auto& phi : low_rank_phi()) {
    std::vector<BigInt> row;
    for (auto v : phi) {
      for (std::size_t s = 0; s < kCounterexampleStates; ++s) row.emplace_back(v);
    }
    coefficients.push_back(std::move(row));
  }
  return analyse("low-rank", std::move(coefficients), std::vector<BigInt>(4, BigInt(1)));
}

InfeasibilityReport linear_infeasibility_demo() {
  return InfeasibilityReport{{bilinear_counterexample(), low_rank_counterexample()}};
}

std::string InfeasibilityReport::text() const {
  std::ostringstream out;
  out << "Linear transition models: row-sum feasibility\n";
  for (const auto& c : cases) {
    out << "\ncase " << c.name << " (" << c.coefficients.size() << " equations, "
        << (c.coefficients.empty() ? 0 : c.coefficients.front().size()) << " unknowns)\n";
    for (std::size_t i = 0; i < c.coefficients.size(); ++i) {
      out << "  [" << format_row(c.coefficients[i]) << " | " << c.rhs[i] << "]\n";
    }
    out << "  rank coefficient = " << c.coefficient_rank << ", rank augmented = " << c.augmented_rank
        << " -> " << (c.consistent() ? "consistent" : "inconsistent") << "\n";
  }
  return out.str();
}

nlohmann::json InfeasibilityReport::to_json() const {
  auto doc = nlohmann::json::array();
  for (const auto& c : cases) {
    auto rows = nlohmann::json::array();
    for (const auto& row : c.coefficients) {
      auto r = nlohmann::json::array();
      for (const auto& v : row) r.push_back(v.str());
      rows.push_back(std::move(r));
    }
    auto rhs = nlohmann::json::array();
    for (const auto& v : c.rhs) rhs.push_back(v.str());
    doc.push_back({{"case", c.name},
                   {"coefficients", std::move(rows)},
                   {"rhs", std::move(rhs)},
                   {"coefficient_rank", c.coefficient_rank},
                   {"augmented_rank", c.augmented_rank},
                   {"consistent", c.consistent()}});
  }
  return {{"linear_infeasibility", doc}};
}

PotentialCheck elliptical_potential_check(const std::vector<std::vector<double>>& step_max_sq_norms,
                                          const PotentialParams& params) {
  PotentialCheck check;
  for (const auto& episode : step_max_sq_norms) {
    for (double v : episode) check.lhs += v;
  }
  const double k = static_cast<double>(step_max_sq_norms.size());
  const double h = static_cast<double>(params.horizon);
  const double d = static_cast<double>(params.dimension);
  const double u = static_cast<double>(params.max_reachable);
  check.rhs = params.dimension == 0 ? 0.0 : 2.0 * h * d * std::log1p(k * h * u / (d * params.lambda));
  check.ok = check.lhs <= check.rhs;
  return check;
}

EpisodeAudit audit_episode(const PlanningSnapshot& snapshot, const EpisodeTrajectory& trajectory,
                           const FeatureMap& map, const TabularMDP& mdp,
                           const TransitionCore& truth, const ValueTables& optimal) {
  EpisodeAudit audit;
  audit.episode = snapshot.episode;
  audit.beta = snapshot.beta;
  const GramSolver solver(snapshot.gram);
  audit.coverage_norm = solver.norm(snapshot.theta_hat - truth.theta);
  audit.covered = audit.coverage_norm <= snapshot.beta;
  if (!audit.covered) return audit;

  const auto& values = snapshot.values;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < values.q.size(); ++h) {
    gap = std::min(gap, (values.q[h] - optimal.q[h]).minCoeff());
  }
  audit.optimism_gap = gap;

  const double horizon = static_cast<double>(mdp.horizon());
  for (std::size_t h = 0; h < trajectory.steps.size(); ++h) {
    const auto& st = trajectory.steps[h];
    const auto& reach = map.reachable(st.state, st.action);
    const Matrix& block = map.block(st.state, st.action);
    const Vector p_hat = softmax_probs(block, snapshot.theta_hat);
    double true_next = 0.0;
    double model_next = 0.0;
    for (std::size_t i = 0; i < reach.members.size(); ++i) {
      const double v = values.v(static_cast<Eigen::Index>(h) + 1,
                                static_cast<Eigen::Index>(reach.members[i]));
      true_next += mdp.probability(st.state, st.action, reach.members[i]) * v;
      model_next += p_hat(static_cast<Eigen::Index>(i)) * v;
    }
    const double width = horizon * snapshot.beta * solver.max_inv_norm(block);
    const double lhs = values.q[h](static_cast<Eigen::Index>(st.state),
                                   static_cast<Eigen::Index>(st.action)) -
                       (mdp.reward(st.state, st.action) + true_next);
    const double excess = lhs - 2.0 * width;
    ++audit.concentration_checked;
    audit.concentration_max_excess = std::max(audit.concentration_max_excess, excess);
    if (excess > kAuditTolerance) ++audit.concentration_violations;
    if (model_next - true_next > width + kAuditTolerance) ++audit.model_error_violations;
  }
  return audit;
}

nlohmann::json RunAudit::to_json() const {
  auto episodes_json = nlohmann::json::array();
  for (const auto& e : episodes) {
    nlohmann::json row = {{"episode", e.episode},
                          {"beta", e.beta},
                          {"coverage_norm", e.coverage_norm},
                          {"covered", e.covered},
                          {"concentration_checked", e.concentration_checked},
                          {"concentration_violations", e.concentration_violations},
                          {"model_error_violations", e.model_error_violations}};
    row["optimism_gap"] = e.optimism_gap ? nlohmann::json(*e.optimism_gap) : nlohmann::json();
    row["concentration_max_excess"] =
        e.concentration_checked > 0 ? nlohmann::json(e.concentration_max_excess) : nlohmann::json();
    episodes_json.push_back(std::move(row));
  }
  return {{"run_id", run_id},
          {"horizon", potential.horizon},
          {"dimension", potential.dimension},
          {"max_reachable", potential.max_reachable},
          {"lambda", potential.lambda},
          {"episodes", std::move(episodes_json)},
          {"step_max_sq_norms", step_max_sq_norms}};
}

RunAudit RunAudit::from_json(const nlohmann::json& doc) {
  try {
    RunAudit run;
    run.run_id = doc.at("run_id").get<std::size_t>();
    run.potential = {doc.at("horizon").get<std::size_t>(), doc.at("dimension").get<std::size_t>(),
                     doc.at("max_reachable").get<std::size_t>(), doc.at("lambda").get<double>()};
    for (const auto& row : doc.at("episodes")) {
      EpisodeAudit e;
      e.episode = row.at("episode").get<std::size_t>();
      e.beta = row.at("beta").get<double>();
      e.coverage_norm = row.at("coverage_norm").get<double>();
      e.covered = row.at("covered").get<bool>();
      if (!row.at("optimism_gap").is_null()) e.optimism_gap = row.at("optimism_gap").get<double>();
      e.concentration_checked = row.at("concentration_checked").get<std::size_t>();
      e.concentration_violations = row.at("concentration_violations").get<std::size_t>();
      e.model_error_violations = row.value("model_error_violations", std::size_t{0});
      if (!row.at("concentration_max_excess").is_null()) {
        e.concentration_max_excess = row.at("concentration_max_excess").get<double>();
      }
      run.episodes.push_back(e);
    }
    run.step_max_sq_norms = doc.at("step_max_sq_norms").get<std::vector<std::vector<double>>>();
    return run;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed audit trace: ") + e.what());
  }
}

AuditSummary lemma_audits(const std::vector<RunAudit>& runs) {
  AuditSummary s;
  for (const auto& run : runs) {
    for (const auto& e : run.episodes) {
      ++s.episodes;
      if (!e.covered) continue;
      ++s.covered;
      ++s.optimism_checked;
      if (!e.optimism_ok()) ++s.optimism_violations;
      s.concentration_checked += e.concentration_checked;
      s.concentration_violations += e.concentration_violations;
      s.model_error_violations += e.model_error_violations;
    }
    const PotentialCheck pc = elliptical_potential_check(run.step_max_sq_norms, run.potential);
    ++s.potential_runs;
    if (!pc.ok) ++s.potential_failures;
    s.potential.push_back(pc);
  }
  return s;
}

std::string AuditSummary::text() const {
  std::ostringstream out;
  out << "coverage: " << covered << "/" << episodes << " episodes (rate " << coverage_rate() << ")\n";
  out << "optimism (covered episodes): " << optimism_checked - optimism_violations << "/"
      << optimism_checked << " hold\n";
  out << "per-step concentration (covered episodes): "
      << concentration_checked - concentration_violations << "/" << concentration_checked
      << " steps hold\n";
  out << "model-error bound (covered episodes): " << concentration_checked - model_error_violations
      << "/" << concentration_checked << " steps hold\n";
  out << "elliptical potential: " << potential_runs - potential_failures << "/" << potential_runs
      << " runs hold\n";
  for (std::size_t i = 0; i < potential.size(); ++i) {
    out << "  run " << i << ": lhs " << potential[i].lhs << " <= rhs " << potential[i].rhs
        << (potential[i].ok ? "" : "  VIOLATED") << "\n";
  }
  return out.str();
}

nlohmann::json AuditSummary::to_json() const {
  auto pot = nlohmann::json::array();
  for (const auto& p : potential) pot.push_back({{"lhs", p.lhs}, {"rhs", p.rhs}, {"ok", p.ok}});
  return {{"episodes", episodes},
          {"covered", covered},
          {"coverage_rate", coverage_rate()},
          {"optimism_checked", optimism_checked},
          {"optimism_violations", optimism_violations},
          {"concentration_checked", concentration_checked},
          {"concentration_violations", concentration_violations},
          {"model_error_violations", model_error_violations},
          {"potential_runs", potential_runs},
          {"potential_failures", potential_failures},
          {"potential", std::move(pot)}};
}

}  // namespace mnlrl
