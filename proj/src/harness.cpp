#include "mnlrl/harness.hpp"

#include "mnlrl/svg_plot.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace mnlrl {

namespace {

constexpr std::size_t kLateWindow = 100;

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Ground truth shared read-only by every replication.
struct SharedEnv {
  TabularMDP mdp;
  std::shared_ptr<const FeatureMap> map;
  TransitionCore truth;
  ValueTables optimal;
};

std::unique_ptr<Agent> make_agent(const ExperimentConfig& config, const SharedEnv& env) {
  if (config.agent == AgentKind::kUcrlMnl) {
    UcrlMnlConfig uc;
    uc.params.kappa = config.kappa;
    uc.params.lambda = config.lambda;
    uc.params.l_theta = config.l_theta;
    uc.params.delta = config.delta;
    uc.episodes = config.episodes;
    uc.beta_scale = config.beta_scale;
    uc.keep_snapshots = config.audit;
    return std::make_unique<UcrlMnlAgent>(env.map, env.mdp, uc);
  }
  BaselineConfig bc;
  bc.epsilon_greedy.epsilon0 = config.epsilon0;
  return baseline_agent(config.agent, env.mdp, bc);
}

RunRecord run_shared(const ExperimentConfig& config, const SharedEnv& env, std::size_t run_id) {
  RunRecord record;
  record.run_id = run_id;
  Rng rng(config.seed + run_id);
  const double v_star = env.optimal.v(0, static_cast<Eigen::Index>(env.mdp.initial_state()));

  RunAudit audit;
  audit.run_id = run_id;
  audit.potential = {env.mdp.horizon(), env.map->dimension(), env.map->max_reachable(), config.lambda};

  double cumulative = 0.0;
  try {
    auto agent = make_agent(config, env);
    for (std::size_t k = 1; k <= config.episodes; ++k) {
      const auto start = std::chrono::steady_clock::now();
      EpisodeReport report = agent->run_episode(env.mdp, rng);
      const auto stop = std::chrono::steady_clock::now();

      const Matrix v_pi = policy_evaluation(env.mdp, report.policy);
      const double value = v_pi(0, static_cast<Eigen::Index>(env.mdp.initial_state()));
      EpisodeRow row;
      row.run_id = run_id;
      row.episode = k;
      row.episode_return = report.trajectory.total_return;
      row.policy_value = value;
      row.regret = v_star - value;
      cumulative += row.regret;
      row.cum_regret = cumulative;
      row.beta = report.diagnostics.beta;
      row.mle_iters = report.diagnostics.mle_iterations;
      row.wall_ms = config.record_timing
                        ? std::chrono::duration<double, std::milli>(stop - start).count()
                        : 0.0;
      record.rows.push_back(row);

      if (report.snapshot) {
        audit.episodes.push_back(audit_episode(*report.snapshot, report.trajectory, *env.map,
                                               env.mdp, env.truth, env.optimal));
        audit.step_max_sq_norms.push_back(report.diagnostics.step_max_sq_norms);
      }
    }
  } catch (const Error& e) {
    record.error = "run " + std::to_string(run_id) + ": " + e.what();
  }
  if (config.agent == AgentKind::kUcrlMnl && config.audit) record.audit = std::move(audit);
  return record;
}

SharedEnv make_shared_env(const ExperimentConfig& config) {
  TabularMDP mdp = build_env(config.env);
  auto map = std::make_shared<const FeatureMap>(tabular_feature_map(mdp));
  TransitionCore truth = mdp_to_core(mdp, *map);
  ValueTables optimal = exact_value_iteration(mdp);
  return SharedEnv{std::move(mdp), std::move(map), std::move(truth), std::move(optimal)};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (episodes == 0) throw ConfigError("episodes K must be at least 1");
  if (runs == 0) throw ConfigError("runs R must be at least 1");
  ConfidenceParams p;
  p.kappa = kappa;
  p.lambda = lambda;
  p.l_theta = l_theta;
  p.l_phi = 1.0;
  p.delta = delta;
  p.validate();
  if (!(beta_scale >= 0.0)) throw ConfigError("beta scale must be non-negative");
  if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json env_json = {{"name", env.name},
                             {"n_states", env.n_states},
                             {"horizon", env.horizon},
                             {"left_reward", env.left_reward}};
  if (env.file) env_json["file"] = env.file->string();
  return {{"env", env_json},       {"agent", to_string(agent)}, {"lambda", lambda},
          {"kappa", kappa},        {"delta", delta},            {"l_theta", l_theta},
          {"beta_scale", beta_scale}, {"epsilon0", epsilon0},   {"episodes", episodes},
          {"runs", runs},          {"seed", seed}};
}

TabularMDP build_env(const EnvSpec& spec) {
  if (spec.file) {
    TabularMDP mdp = TabularMDP::load(*spec.file);
    return mdp;
  }
  if (spec.name == "riverswim") return riverswim(spec.n_states, spec.horizon, spec.left_reward);
  throw ConfigError("unknown builtin environment '" + spec.name + "'");
}

double compute_regret(const TabularMDP& mdp, const Matrix& optimal_v, const Policy& policy) {
  const auto s1 = static_cast<Eigen::Index>(mdp.initial_state());
  return optimal_v(0, s1) - policy_evaluation(mdp, policy)(0, s1);
}

double compute_regret(const TabularMDP& mdp, const Policy& policy) {
  return compute_regret(mdp, exact_value_iteration(mdp).v, policy);
}

Stat mean_std(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

RunRecord run_replication(const ExperimentConfig& config, const TabularMDP& mdp,
                          std::shared_ptr<const FeatureMap> map, std::size_t run_id) {
  TransitionCore truth = mdp_to_core(mdp, *map);
  SharedEnv env{mdp, std::move(map), std::move(truth), exact_value_iteration(mdp)};
  return run_shared(config, env, run_id);
}

std::size_t default_workers() {
  if (const char* env = std::getenv("MNLRL_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const SharedEnv env = make_shared_env(config);

  std::vector<RunRecord> runs(config.runs);
  const std::size_t workers =
      std::min(config.runs, config.workers > 0 ? config.workers : default_workers());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t id = next++; id < config.runs; id = next++) runs[id] = run_shared(config, env, id);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ExperimentResult result{config, std::move(runs), {}};
  result.summary = summarise(config, env.mdp, result.runs);
  return result;
}

ExperimentSummary summarise(const ExperimentConfig& config, const TabularMDP& mdp,
                            const std::vector<RunRecord>& runs) {
  ExperimentSummary s;
  s.agent = to_string(config.agent);
  s.optimal_value = exact_value_iteration(mdp).v(0, static_cast<Eigen::Index>(mdp.initial_state()));
  s.window = std::min(kLateWindow, config.episodes);
  std::vector<double> mean_returns, late_returns, final_regrets;
  std::vector<RunAudit> audits;
  for (const auto& run : runs) {
    if (run.error) s.failures.push_back(*run.error);
    if (run.audit) audits.push_back(*run.audit);
    if (run.rows.empty()) continue;
    double total = 0.0;
    for (const auto& r : run.rows) total += r.episode_return;
    mean_returns.push_back(total / static_cast<double>(run.rows.size()));
    const std::size_t w = std::min(s.window, run.rows.size());
    double late = 0.0;
    for (std::size_t i = run.rows.size() - w; i < run.rows.size(); ++i) late += run.rows[i].episode_return;
    late_returns.push_back(late / static_cast<double>(w));
    final_regrets.push_back(run.rows.back().cum_regret);
  }
  s.mean_return = mean_std(mean_returns);
  s.late_return = mean_std(late_returns);
  s.final_cum_regret = mean_std(final_regrets);
  if (!audits.empty()) s.audit = lemma_audits(audits);
  return s;
}

nlohmann::json ExperimentSummary::to_json() const {
  auto stat = [](const Stat& st) { return nlohmann::json{{"mean", st.mean}, {"std", st.std}}; };
  nlohmann::json doc = {{"agent", agent},
                        {"optimal_value", optimal_value},
                        {"late_window", window},
                        {"mean_return", stat(mean_return)},
                        {"late_return", stat(late_return)},
                        {"final_cum_regret", stat(final_cum_regret)},
                        {"failures", failures}};
  if (audit) doc["theory_checks"] = audit->to_json();
  return doc;
}

std::string format_csv(const std::vector<RunRecord>& runs) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& run : runs) {
    for (const auto& r : run.rows) {
      out += std::to_string(r.run_id) + "," + std::to_string(r.episode) + "," +
             fmt9(r.episode_return) + "," + fmt9(r.policy_value) + "," + fmt9(r.regret) + "," +
             fmt9(r.cum_regret) + "," + fmt9(r.beta) + "," + std::to_string(r.mle_iters) + "," +
             fmt9(r.wall_ms) + "\n";
    }
  }
  return out;
}

std::vector<EpisodeRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ConfigError("CSV header does not match '" + std::string(kCsvHeader) + "'");
  }
  std::vector<EpisodeRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw ConfigError("CSV line " + std::to_string(line_no) + " has wrong arity");
    try {
      EpisodeRow r;
      r.run_id = std::stoul(cells[0]);
      r.episode = std::stoul(cells[1]);
      r.episode_return = std::stod(cells[2]);
      r.policy_value = std::stod(cells[3]);
      r.regret = std::stod(cells[4]);
      r.cum_regret = std::stod(cells[5]);
      r.beta = std::stod(cells[6]);
      r.mle_iters = std::stoul(cells[7]);
      r.wall_ms = std::stod(cells[8]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ConfigError("CSV line " + std::to_string(line_no) + " is not numeric");
    }
  }
  return rows;
}

std::vector<EpisodeRow> read_csv(const std::filesystem::path& path) {
  return parse_csv(read_file(path));
}

void emit_plots(const std::vector<EpisodeRow>& rows, const std::filesystem::path& dir) {
  if (rows.empty()) throw Error("no episode records to plot");
  std::size_t n_runs = 0;
  std::size_t n_episodes = 0;
  for (const auto& r : rows) {
    n_runs = std::max(n_runs, r.run_id + 1);
    n_episodes = std::max(n_episodes, r.episode);
  }
  PlotSeries returns{"episodic return", std::vector<std::vector<double>>(n_runs)};
  PlotSeries regret{"cumulative regret", std::vector<std::vector<double>>(n_runs)};
  for (const auto& r : rows) {
    returns.runs[r.run_id].push_back(r.episode_return);
    regret.runs[r.run_id].push_back(r.cum_regret);
  }
  std::vector<double> x(n_episodes);
  std::iota(x.begin(), x.end(), 1.0);

  std::filesystem::create_directories(dir);
  write_file(dir / "returns.svg",
             render_svg({"Episodic return (mean, min-max band)", "episode", "return", x, {returns}}));
  write_file(dir / "regret.svg",
             render_svg({"Cumulative regret (mean, min-max band)", "episode", "regret", x, {regret}}));
}

void emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::vector<EpisodeRow> rows;
  for (const auto& run : result.runs) rows.insert(rows.end(), run.rows.begin(), run.rows.end());
  if (rows.empty()) throw Error("refusing to write outputs: no episode records");

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

  write_file(dir / "runs.csv", format_csv(result.runs));
  nlohmann::json summary = result.summary.to_json();
  summary["config"] = result.config.to_json();
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  emit_plots(rows, dir);

  auto traces = nlohmann::json::array();
  for (const auto& run : result.runs) {
    if (run.audit) traces.push_back(run.audit->to_json());
  }
  if (!traces.empty()) {
    write_file(dir / "audit_trace.json", nlohmann::json{{"runs", traces}}.dump() + "\n");
    audit_directory(dir);
  }
}

AuditSummary audit_directory(const std::filesystem::path& dir) {
  const auto path = dir / "audit_trace.json";
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  std::vector<RunAudit> runs;
  for (const auto& run : doc.at("runs")) runs.push_back(RunAudit::from_json(run));
  AuditSummary summary = lemma_audits(runs);
  write_file(dir / "theory_checks.json", summary.to_json().dump(2) + "\n");
  write_file(dir / "theory_checks.txt", summary.text());
  return summary;
}

double log_log_slope(const std::vector<EpisodeRow>& rows, std::size_t first, std::size_t last) {
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (r.episode < first || r.episode > last || !(r.cum_regret > 0.0)) continue;
    xs.push_back(std::log(static_cast<double>(r.episode)));
    ys.push_back(std::log(r.cum_regret));
  }
  if (xs.size() < 2) return 0.0;
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace mnlrl
