#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "bess/config.hpp"
#include "bess/runner.hpp"

namespace {

struct CliArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> tau;
  std::optional<std::string> out;
};

void add_common_flags(CLI::App* cmd, CliArgs& args) {
  cmd->add_option("--config", args.config,
                  "config file of key = value lines; omitted keys use "
                  "built-in defaults")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed,
                  "master seed (overrides the config file)");
  cmd->add_option("--tau", args.tau,
                  "MPC lookahead in slots (overrides eval.tau_slots)");
  cmd->add_option("--out", args.out,
                  "output directory (overrides paths.out_dir)");
}

bess::RunConfig resolve_config(const CliArgs& args) {
  bess::RunConfig cfg;
  if (!args.config.empty()) cfg = bess::load_config(args.config);
  if (args.seed) cfg.seed = *args.seed;
  if (args.tau) cfg.eval_tau_slots = *args.tau;
  if (args.out) cfg.out_dir = *args.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Battery storage dispatch: DQN agent with DP and MPC baselines"};
  app.require_subcommand(1);

  CliArgs args;
  CLI::App* generate =
      app.add_subcommand("generate", "synthesize the scenario CSV corpus");
  CLI::App* train =
      app.add_subcommand("train", "train the agent on the scenario corpus");
  CLI::App* eval = app.add_subcommand(
      "eval", "score optimal/MPC/DQN/do-nothing on held-out windows");
  CLI::App* baseline = app.add_subcommand(
      "baseline", "score the baselines only (no checkpoint needed)");
  for (CLI::App* cmd : {generate, train, eval, baseline})
    add_common_flags(cmd, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }

  try {
    const bess::RunConfig cfg = resolve_config(args);
    if (app.got_subcommand(generate)) {
      const auto out = bess::run_generate(cfg);
      std::cout << "wrote " << out.files.size() << " scenario files to "
                << cfg.scenario_dir << "\n";
    } else if (app.got_subcommand(train)) {
      const auto out = bess::run_train(cfg);
      std::cout << "checkpoint: " << out.checkpoint_path << "\n"
                << "training log: " << out.log_path << "\n"
                << "steps: " << out.steps << "  episodes: " << out.episodes
                << "\n"
                << "final epsilon: " << out.final_epsilon << "\n"
                << "mean episode reward: " << out.mean_episode_reward << "\n";
    } else {
      const bool include_dqn = app.got_subcommand(eval);
      const auto out = bess::run_eval(cfg, include_dqn);
      std::cout << out.summary_text << "results: " << out.results_path << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
