#pragma once

#include <map>
#include <string>
#include <vector>

#include "bess/config.hpp"

namespace bess {

struct GenerateOutputs {
  std::vector<std::string> files;  // written scenario CSVs, sorted
};

// Synthesizes the benchmark corpus: one high-rate load and PV trace,
// interleave-resampled into n_sequences slot-rate sequences, each paired with
// its own Markov price realization, written as scenario CSVs.
GenerateOutputs run_generate(const RunConfig& cfg);

struct TrainOutputs {
  std::string checkpoint_path;
  std::string log_path;
  std::string config_path;
  double final_epsilon = 0.0;
  double mean_episode_reward = 0.0;
  int episodes = 0;
  long long steps = 0;
};

// Loads the scenario corpus, splits off the held-out test sequences with the
// run seed, trains on the rest, and writes checkpoint + per-step log +
// config snapshot into out_dir.
TrainOutputs run_train(const RunConfig& cfg);

struct WindowRecord {
  std::string policy;
  int scenario_id = 0;  // index into the sorted scenario file list
  int window_id = 0;
  double cost = 0.0;
  std::vector<std::string> actions;
  std::vector<double> soc_kwh;  // window length + 1 entries
};

struct EvalOutputs {
  std::string results_path;
  std::string config_path;
  std::vector<WindowRecord> records;
  std::map<std::string, double> summary;  // policy -> average window cost
  std::string summary_text;               // printable per-policy table
};

// Cuts the held-out test sequences into fixed-length windows and prices every
// policy on each window from the configured initial state of charge. Windows
// are independent and evaluated concurrently; all files are written by the
// collector afterwards. With include_dqn the checkpoint is loaded and the
// greedy policy is scored alongside the baselines.
EvalOutputs run_eval(const RunConfig& cfg, bool include_dqn);

}  // namespace bess
