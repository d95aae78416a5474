#include "bess/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "bess/dp.hpp"
#include "bess/dqn.hpp"
#include "bess/util.hpp"

namespace fs = std::filesystem;

namespace bess {

namespace {

// Seed stream ids; price sequences use kStreamPrice + k.
constexpr std::uint64_t kStreamLoad = 1;
constexpr std::uint64_t kStreamPv = 2;
constexpr std::uint64_t kStreamSplit = 3;
constexpr std::uint64_t kStreamTrain = 4;
constexpr std::uint64_t kStreamPrice = 100;

std::string scenario_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scenario_%03d.csv", index);
  return buf;
}

std::vector<std::string> list_scenario_files(const std::string& dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error("scenario directory not found: '" + dir + "'");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw std::runtime_error("no scenario CSVs in '" + dir + "'");
  return files;
}

std::vector<Scenario> load_scenarios(const std::vector<std::string>& files,
                                     double slot_hours) {
  std::vector<Scenario> scenarios;
  scenarios.reserve(files.size());
  for (const auto& f : files) scenarios.push_back(load_scenario_csv(f, slot_hours));
  return scenarios;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace

GenerateOutputs run_generate(const RunConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = cfg.require_seed();

  const double slot_seconds = cfg.battery.slot_hours * 3600.0;
  const long long samples_per_slot = std::llround(slot_seconds);
  if (std::abs(slot_seconds - static_cast<double>(samples_per_slot)) > 1e-9 ||
      samples_per_slot < 1)
    throw std::invalid_argument(
        "generate: slot length must be a whole number of seconds");
  if (samples_per_slot < cfg.generate_sequences)
    throw std::invalid_argument(
        "generate: more sequences than raw samples per slot");

  const long long n_raw =
      static_cast<long long>(cfg.generate_horizon_slots) * samples_per_slot;
  constexpr double kRawHours = 1.0 / 3600.0;  // 1-second raw sampling

  TimeSeries raw_load{synth_load(static_cast<int>(n_raw), kRawHours,
                                 derive_seed(seed, kStreamLoad)),
                      1.0};
  TimeSeries raw_pv{synth_pv(static_cast<int>(n_raw), kRawHours,
                             derive_seed(seed, kStreamPv)),
                    1.0};

  const auto load_seqs =
      resample_interleaved(raw_load, slot_seconds, cfg.generate_sequences);
  const auto pv_seqs =
      resample_interleaved(raw_pv, slot_seconds, cfg.generate_sequences);

  const PriceChain chain = cfg.chain();
  fs::create_directories(cfg.scenario_dir);

  GenerateOutputs out;
  for (int k = 0; k < cfg.generate_sequences; ++k) {
    Scenario sc;
    sc.slot_hours = cfg.battery.slot_hours;
    sc.load_kw = load_seqs[k].values;
    sc.pv_kw = pv_seqs[k].values;
    sc.price_per_kwh = sample_sequence(chain, cfg.generate_horizon_slots,
                                       derive_seed(seed, kStreamPrice + k));
    sc.validate();
    const std::string path =
        (fs::path(cfg.scenario_dir) / scenario_filename(k)).string();
    save_scenario_csv(path, sc);
    out.files.push_back(path);
  }
  return out;
}

TrainOutputs run_train(const RunConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = cfg.require_seed();

  const auto files = list_scenario_files(cfg.scenario_dir);
  const auto scenarios = load_scenarios(files, cfg.battery.slot_hours);
  const int n = static_cast<int>(scenarios.size());
  if (cfg.eval_n_test >= n)
    throw std::invalid_argument(
        "train: eval.n_test leaves no training scenarios");

  const auto [train_idx, test_idx] =
      split_indices(n, cfg.eval_n_test, derive_seed(seed, kStreamSplit));
  std::vector<Scenario> train_set;
  train_set.reserve(train_idx.size());
  for (int i : train_idx) train_set.push_back(scenarios[i]);

  const TrainResult result =
      train(cfg.battery, train_set, cfg.hyper, derive_seed(seed, kStreamTrain));

  fs::create_directories(cfg.out_dir);
  TrainOutputs out;
  out.checkpoint_path = (fs::path(cfg.out_dir) / "checkpoint.bin").string();
  out.log_path = (fs::path(cfg.out_dir) / "train_log.csv").string();
  out.config_path = (fs::path(cfg.out_dir) / "config.txt").string();
  save_checkpoint(out.checkpoint_path, result.net, result.norm);

  std::ostringstream log;
  log << "step,episode,epsilon,reward,loss\n";
  double reward_sum = 0.0;
  for (const auto& row : result.log) {
    reward_sum += row.reward;
    log << row.step << ',' << row.episode << ',' << format_double(row.epsilon)
        << ',' << format_double(row.reward) << ',' << format_double(row.loss)
        << '\n';
  }
  write_text_file(out.log_path, log.str());
  save_config(out.config_path, cfg);

  out.final_epsilon = result.final_epsilon;
  out.episodes = result.episodes;
  out.steps = static_cast<long long>(result.log.size());
  out.mean_episode_reward =
      result.episodes > 0 ? reward_sum / result.episodes : 0.0;
  return out;
}

namespace {

struct WindowJob {
  int scenario_id = 0;
  int window_id = 0;
  const Scenario* window = nullptr;
};

std::vector<std::string> level_labels(const DPConfig& dp,
                                      const std::vector<int>& levels) {
  std::vector<std::string> out;
  out.reserve(levels.size());
  for (int l : levels) {
    if (dp.action_levels == 3)
      out.push_back(action_name(action_from_index(l)));
    else
      out.push_back(format_double(level_fraction(dp, l)));
  }
  return out;
}

std::vector<std::string> action_labels(const std::vector<Action>& actions) {
  std::vector<std::string> out;
  out.reserve(actions.size());
  for (Action a : actions) out.push_back(action_name(a));
  return out;
}

}  // namespace

EvalOutputs run_eval(const RunConfig& cfg, bool include_dqn) {
  cfg.validate();
  const std::uint64_t seed = cfg.require_seed();
  if (cfg.eval_tau_slots > cfg.eval_window_slots)
    throw std::invalid_argument(
        "eval: eval.tau_slots must be <= eval.window_slots");

  const auto files = list_scenario_files(cfg.scenario_dir);
  const auto scenarios = load_scenarios(files, cfg.battery.slot_hours);
  const int n = static_cast<int>(scenarios.size());
  if (cfg.eval_n_test < 1)
    throw std::invalid_argument("eval: eval.n_test must be >= 1");
  if (cfg.eval_n_test >= n)
    throw std::invalid_argument("eval: eval.n_test must leave training data");

  const auto [train_idx, test_idx] =
      split_indices(n, cfg.eval_n_test, derive_seed(seed, kStreamSplit));

  // Windows per test scenario, keyed by the original file index.
  std::vector<std::pair<int, std::vector<Scenario>>> cut;
  std::vector<WindowJob> jobs;
  for (int id : test_idx) {
    cut.emplace_back(id, cut_windows(scenarios[id], cfg.eval_window_slots));
    if (cut.back().second.empty())
      throw std::runtime_error(
          "eval: test scenario shorter than one evaluation window");
  }
  for (auto& [id, windows] : cut)
    for (int w = 0; w < static_cast<int>(windows.size()); ++w)
      jobs.push_back(WindowJob{id, w, &windows[w]});

  Policy dqn;
  if (include_dqn) {
    if (cfg.checkpoint_path.empty())
      throw std::invalid_argument("eval: paths.checkpoint is required");
    const Checkpoint ckpt = load_checkpoint(cfg.checkpoint_path);
    dqn = greedy_policy(ckpt.net, ckpt.norm);
  }
  const Policy idle = [](const EnvState&) { return Action::Idle; };
  const double e0 = cfg.initial_soc_kwh();

  struct JobResult {
    DPResult optimal;
    DPResult mpc;
    RolloutResult dqn;
    RolloutResult idle;
  };
  std::vector<JobResult> solved(jobs.size());

  const int n_jobs = static_cast<int>(jobs.size());
#pragma omp parallel for schedule(static) if (cfg.eval_parallel_windows)
  for (int j = 0; j < n_jobs; ++j) {
    const Scenario& window = *jobs[j].window;
    JobResult& r = solved[j];
    r.optimal = dp_optimal(cfg.battery, window, cfg.dp, e0);
    r.mpc = mpc_policy(cfg.battery, window, cfg.dp, cfg.eval_tau_slots, e0);
    if (include_dqn) r.dqn = rollout(cfg.battery, window, dqn, e0);
    r.idle = rollout(cfg.battery, window, idle, e0);
  }

  // Single collector from here on: records, summary, files.
  EvalOutputs out;
  std::vector<std::string> policies = {"optimal", "mpc"};
  if (include_dqn) policies.push_back("dqn");
  policies.push_back("do_nothing");

  for (int j = 0; j < n_jobs; ++j) {
    const WindowJob& job = jobs[j];
    const JobResult& r = solved[j];
    const auto emit = [&](const std::string& policy, double cost,
                          std::vector<std::string> actions,
                          const std::vector<double>& soc) {
      out.records.push_back(
          WindowRecord{policy, job.scenario_id, job.window_id, cost,
                       std::move(actions), soc});
    };
    emit("optimal", r.optimal.cost, level_labels(cfg.dp, r.optimal.levels),
         r.optimal.soc_kwh);
    emit("mpc", r.mpc.cost, level_labels(cfg.dp, r.mpc.levels), r.mpc.soc_kwh);
    if (include_dqn)
      emit("dqn", r.dqn.cost, action_labels(r.dqn.actions), r.dqn.soc_kwh);
    emit("do_nothing", r.idle.cost, action_labels(r.idle.actions),
         r.idle.soc_kwh);
  }

  for (const auto& policy : policies) {
    double sum = 0.0;
    int count = 0;
    for (const auto& rec : out.records)
      if (rec.policy == policy) {
        sum += rec.cost;
        ++count;
      }
    out.summary[policy] = count > 0 ? sum / count : 0.0;
  }

  std::ostringstream table;
  table << "policy            avg_window_cost\n";
  for (const auto& policy : policies) {
    std::string label = policy;
    if (policy == "mpc")
      label += "(tau=" + std::to_string(cfg.eval_tau_slots) + ")";
    table << label << std::string(label.size() < 18 ? 18 - label.size() : 1, ' ')
          << format_double(out.summary.at(policy)) << "\n";
  }
  out.summary_text = table.str();

  fs::create_directories(cfg.out_dir);
  nlohmann::json doc;
  doc["initial_soc_kwh"] = e0;
  doc["tau_slots"] = cfg.eval_tau_slots;
  doc["window_slots"] = cfg.eval_window_slots;
  doc["summary"] = out.summary;
  doc["records"] = nlohmann::json::array();
  for (const auto& rec : out.records) {
    nlohmann::json j;
    j["policy"] = rec.policy;
    j["scenario_id"] = rec.scenario_id;
    j["window_id"] = rec.window_id;
    j["cost"] = rec.cost;
    j["actions"] = rec.actions;
    j["soc_trajectory"] = rec.soc_kwh;
    doc["records"].push_back(std::move(j));
  }
  out.results_path = (fs::path(cfg.out_dir) / "results.json").string();
  write_text_file(out.results_path, doc.dump(2) + "\n");

  for (int j = 0; j < n_jobs; ++j) {
    const WindowJob& job = jobs[j];
    const JobResult& r = solved[j];
    const Scenario& window = *jobs[j].window;
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "s%03d_w%02d.csv", job.scenario_id,
                  job.window_id);

    std::ostringstream traj;
    traj << "slot,price_per_kwh,net_kw,soc_optimal_kwh,soc_mpc_kwh";
    if (include_dqn) traj << ",soc_dqn_kwh";
    traj << ",soc_do_nothing_kwh\n";
    for (int t = 0; t < window.horizon(); ++t) {
      traj << t << ',' << format_double(window.price_per_kwh[t]) << ','
           << format_double(window.load_kw[t] - window.pv_kw[t]) << ','
           << format_double(r.optimal.soc_kwh[t]) << ','
           << format_double(r.mpc.soc_kwh[t]);
      if (include_dqn) traj << ',' << format_double(r.dqn.soc_kwh[t]);
      traj << ',' << format_double(r.idle.soc_kwh[t]) << '\n';
    }
    write_text_file(
        (fs::path(cfg.out_dir) / (std::string("trajectory_") + suffix)).string(),
        traj.str());

    std::ostringstream prices;
    prices << "slot,price_per_kwh\n";
    for (int t = 0; t < window.horizon(); ++t)
      prices << t << ',' << format_double(window.price_per_kwh[t]) << '\n';
    write_text_file(
        (fs::path(cfg.out_dir) / (std::string("prices_") + suffix)).string(),
        prices.str());
  }

  out.config_path = (fs::path(cfg.out_dir) / "config.txt").string();
  save_config(out.config_path, cfg);
  return out;
}

}  // namespace bess
