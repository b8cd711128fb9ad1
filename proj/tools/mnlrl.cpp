// Command-line front end: run experiments, audit recorded runs, redraw plots
// and print the linear-infeasibility demo.

#include "mnlrl/harness.hpp"
#include "mnlrl/theory_checks.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

namespace {

int run_command(const mnlrl::ExperimentConfig& config, const std::filesystem::path& out) {
  const auto result = mnlrl::run_experiment(config);
  mnlrl::emit_outputs(result, out);
  const auto& s = result.summary;
  std::printf("agent %s, %zu runs x %zu episodes -> %s\n", s.agent.c_str(), config.runs,
              config.episodes, out.string().c_str());
  std::printf("optimal V*_1(s_1)        %.6f\n", s.optimal_value);
  std::printf("mean return              %.6f +- %.6f\n", s.mean_return.mean, s.mean_return.std);
  std::printf("mean return (last %zu)   %.6f +- %.6f\n", s.window, s.late_return.mean,
              s.late_return.std);
  std::printf("final cumulative regret  %.6f +- %.6f\n", s.final_cum_regret.mean,
              s.final_cum_regret.std);
  if (s.audit) std::cout << s.audit->text();
  for (const auto& f : s.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
  return s.failures.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UCRL-MNL: model-based RL with multinomial logistic transitions"};
  app.require_subcommand(1);

  mnlrl::ExperimentConfig config;
  std::string agent = "ucrl-mnl";
  std::string env_file;
  std::filesystem::path out = "out";
  bool no_timing = false;

  auto* run = app.add_subcommand("run", "Run seeded replications and write CSV, summary and plots");
  run->add_option("--env", config.env.name, "Builtin environment")->check(CLI::IsMember({"riverswim"}));
  run->add_option("--env-file", env_file, "Tabular MDP as JSON")->check(CLI::ExistingFile);
  run->add_option("--n-states", config.env.n_states, "RiverSwim chain length");
  run->add_option("--horizon", config.env.horizon, "Episode length H");
  run->add_option("--left-reward", config.env.left_reward, "RiverSwim r(s_1, left)");
  run->add_option("--episodes", config.episodes, "Episodes K per run");
  run->add_option("--runs", config.runs, "Independent replications R");
  run->add_option("--seed", config.seed, "Base seed; run i uses seed + i");
  run->add_option("--agent", agent, "ucrl-mnl | random | epsilon-greedy | optimal");
  run->add_option("--lambda", config.lambda, "Ridge weight");
  run->add_option("--kappa", config.kappa, "MNL curvature constant");
  run->add_option("--delta", config.delta, "Confidence level");
  run->add_option("--l-theta", config.l_theta, "Bound on |theta*|");
  run->add_option("--beta-scale", config.beta_scale, "Multiplier on the confidence radius");
  run->add_option("--epsilon", config.epsilon0, "epsilon-greedy initial exploration rate");
  run->add_option("--workers", config.workers, "Worker threads (default MNLRL_WORKERS)");
  run->add_flag("--no-timing", no_timing, "Write 0 in the wall_ms column");
  run->add_flag("!--no-audit", config.audit, "Skip the theory audits");
  run->add_option("--out", out, "Output directory")->required();

  auto* demo = app.add_subcommand("demo", "Worked counter-examples");
  auto* infeasible = demo->add_subcommand("linear-infeasibility",
                                          "Rank test showing linear transition models can be infeasible");
  demo->require_subcommand(1);
  bool demo_json = false;
  infeasible->add_flag("--json", demo_json, "Print the report as JSON");

  std::filesystem::path audit_in;
  auto* audit = app.add_subcommand("audit", "Theory checks over a recorded run directory");
  audit->add_option("--in", audit_in, "Directory written by `run`")->required()->check(CLI::ExistingDirectory);

  std::filesystem::path plot_in;
  std::filesystem::path plot_out;
  auto* plot = app.add_subcommand("plot", "Redraw returns.svg and regret.svg from runs.csv");
  plot->add_option("--in", plot_in, "runs.csv")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      config.agent = mnlrl::parse_agent_kind(agent);
      if (!env_file.empty()) config.env.file = env_file;
      config.record_timing = !no_timing;
      return run_command(config, out);
    }
    if (*infeasible) {
      const auto report = mnlrl::linear_infeasibility_demo();
      if (demo_json) {
        std::cout << report.to_json().dump(2) << "\n";
      } else {
        std::cout << report.text();
      }
      return 0;
    }
    if (*audit) {
      const auto summary = mnlrl::audit_directory(audit_in);
      std::cout << summary.text();
      const bool ok = summary.potential_failures == 0 && summary.optimism_violations == 0 &&
                      summary.concentration_violations == 0;
      return ok ? 0 : 1;
    }
    if (*plot) {
      mnlrl::emit_plots(mnlrl::read_csv(plot_in), plot_out);
      std::cout << "wrote " << (plot_out / "returns.svg").string() << " and "
                << (plot_out / "regret.svg").string() << "\n";
      return 0;
    }
  } catch (const mnlrl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
