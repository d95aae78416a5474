#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bess/battery.hpp"
#include "bess/dp.hpp"
#include "bess/dqn.hpp"
#include "bess/pricing.hpp"

namespace bess {

// One flat key=value file drives every command; unknown keys are errors.
// CLI flags override file values, which override the defaults below.
struct RunConfig {
  BatteryConfig battery;
  Hyperparams hyper;
  DPConfig dp;

  // battery.slot_minutes as written in the file; battery.slot_hours is kept
  // equal to slot_minutes / 60. Storing the source value keeps config
  // snapshots byte-stable under round-trips.
  double slot_minutes = 5.0;

  std::optional<double> chain_noise_std;  // absent: default chain's value
  int chain_hold_slots = 3;
  // Custom chain: both must be given together. State count is means.size();
  // the transition matrix is row-major with ';' row separators in the file.
  std::optional<std::vector<double>> chain_means;
  std::optional<std::vector<double>> chain_transition;

  int generate_sequences = 25;
  int generate_horizon_slots = 5184;  // 18 days of 5-minute slots

  std::string scenario_dir = "scenarios";
  std::string checkpoint_path;  // required by eval
  std::string out_dir = "run";

  int eval_n_test = 2;
  int eval_window_slots = 576;  // 48 hours of 5-minute slots
  int eval_tau_slots = 12;      // 1 hour of lookahead
  std::optional<double> eval_initial_soc_kwh;  // absent: capacity / 2
  bool eval_parallel_windows = true;

  std::optional<std::uint64_t> seed;  // mandatory at run time, no default

  void validate() const;
  double initial_soc_kwh() const {
    return eval_initial_soc_kwh.value_or(battery.capacity_kwh / 2.0);
  }
  std::uint64_t require_seed() const;
  PriceChain chain() const;  // default chain with the overrides applied
};

RunConfig load_config(const std::string& path);

// Parses one key=value assignment into cfg; throws on unknown keys or
// malformed values. Exposed for tests and for CLI overrides.
void apply_key(RunConfig& cfg, const std::string& key,
               const std::string& value);

// Canonical snapshot: every key written with its resolved value, so feeding
// the snapshot back reproduces the run byte for byte.
void save_config(const std::string& path, const RunConfig& cfg);
std::string config_text(const RunConfig& cfg);

}  // namespace bess
