#pragma once

#include <vector>

#include "bess/battery.hpp"
#include "bess/scenario.hpp"

namespace bess {

struct DPConfig {
  int soc_grid_points = 2001;  // grid over [0, capacity]
  int action_levels = 3;       // odd; >3 approximates the continuous optimum
  double gamma = 1.0;          // DP objective discount; 1 for cost accounting

  void validate() const;
};

// Level j maps to the signed rate fraction f_j = 1 - 2j/(L-1), descending
// from +1 (full-rate charge) through 0 (idle) to -1 (full-rate discharge).
// With 3 levels the indices coincide with Action's Charge/Idle/Discharge.
double level_fraction(const DPConfig& dp, int level);

// Outcome of holding fraction f of the clipped rate for one slot. Mirrors the
// environment arithmetic exactly, so a full-rate level reproduces step().
struct LevelOutcome {
  double payment = 0.0;  // -reward
  double next_soc_kwh = 0.0;
  double b_kw = 0.0;
};
LevelOutcome apply_level(const BatteryConfig& cfg, double soc_kwh,
                         double net_demand_kw, double price_per_kwh,
                         double fraction);

// Optimal cost-to-go over a slot window [t_begin, t_end) of a scenario,
// tabulated on the soc grid. Slice s (0-based, relative) holds the cost of
// operating slots t_begin+s .. t_end-1; the terminal slice is identically
// zero. best_level records the greedy choice per (slot, grid point).
struct ValueTable {
  int grid_points = 0;
  int t_begin = 0;
  int t_end = 0;
  std::vector<double> cost_to_go;  // (span+1) * grid_points
  std::vector<int> best_level;     // span * grid_points

  int span() const { return t_end - t_begin; }
  double value(int rel_slot, int grid_index) const {
    return cost_to_go[static_cast<std::size_t>(rel_slot) * grid_points +
                      grid_index];
  }
};

// Backward induction; each call is single-threaded (callers parallelize
// across independent scenarios or windows).
ValueTable dp_backward(const BatteryConfig& cfg, const Scenario& scenario,
                       const DPConfig& dp, int t_begin, int t_end);

struct DPResult {
  double cost = 0.0;
  std::vector<int> levels;      // chosen level index per slot
  std::vector<double> b_kw;     // realized signed power per slot
  std::vector<double> soc_kwh;  // horizon + 1 entries, initial soc first

  // Valid only for 3 action levels, where levels are Action indices.
  std::vector<Action> actions() const;
};

// Exact DP dispatch: backward induction over the soc grid with linear value
// interpolation, then a forward pass from the (continuous) initial soc that
// re-evaluates every level at the true state. The reported cost is the true
// cost of the extracted sequence, not an interpolated value.
DPResult dp_optimal(const BatteryConfig& cfg, const Scenario& scenario,
                    const DPConfig& dp, double initial_soc_kwh);

// Receding horizon: at each slot solve the window [t, min(t+tau, horizon))
// with zero terminal value, implement the first decision, advance the true
// state. tau = horizon reproduces dp_optimal exactly (bitwise): backward
// induction is suffix-local, and both forward passes share one decision rule.
DPResult mpc_policy(const BatteryConfig& cfg, const Scenario& scenario,
                    const DPConfig& dp, int tau_slots, double initial_soc_kwh);

// Cost of always idling: sum_t p_t * net_t * delta.
double do_nothing(const Scenario& scenario);

// Exhaustive 3-action oracle for small horizons (<= 12 slots).
struct BruteForceResult {
  double cost = 0.0;
  std::vector<Action> actions;
};
BruteForceResult brute_force_enumerate(const BatteryConfig& cfg,
                                       const Scenario& scenario,
                                       double initial_soc_kwh);

}  // namespace bess
