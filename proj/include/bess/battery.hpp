#pragma once

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

#include "bess/scenario.hpp"

namespace bess {

// Absolute slack absorbed by the post-update clamp; violations beyond it are
// treated as caller bugs.
inline constexpr double kSocToleranceKwh = 1e-9;
inline constexpr double kRateToleranceKw = 1e-9;

struct BatteryConfig {
  double capacity_kwh = 200.0;    // E
  double max_charge_kw = 50.0;    // grid-side charging rate cap
  double max_discharge_kw = 50.0; // grid-side discharging rate cap
  double eta_c = 0.9;
  double eta_d = 0.9;
  double slot_hours = 5.0 / 60.0;

  void validate() const;
};

// s_t = [d_t - r_t, p_t, e_t]
struct EnvState {
  double net_demand_kw = 0.0;
  double price_per_kwh = 0.0;
  double soc_kwh = 0.0;
};

// Canonical index order is fixed; ties in argmax resolve to the lowest index.
enum class Action : int { Charge = 0, Idle = 1, Discharge = 2 };
inline constexpr int kNumActions = 3;

inline int action_index(Action a) { return static_cast<int>(a); }
Action action_from_index(int i);
const char* action_name(Action a);

struct StepOutcome {
  EnvState next_state;
  double reward;         // u_t, in currency
  double realized_b_kw;  // signed grid-side battery power b_t
};

// Largest feasible grid-side charging rate from the given state of charge:
// max{0, min{rc_max, (E - e) / (delta * eta_c)}}. Charging at this rate for
// one slot never drives the state of charge above capacity.
inline double clip_charge(const BatteryConfig& cfg, double soc_kwh) {
  if (!(soc_kwh >= 0.0 && soc_kwh <= cfg.capacity_kwh))
    throw std::invalid_argument("clip_charge: soc outside [0, capacity]");
  const double headroom_rate =
      (cfg.capacity_kwh - soc_kwh) / (cfg.slot_hours * cfg.eta_c);
  return std::max(0.0, std::min(cfg.max_charge_kw, headroom_rate));
}

// Largest feasible grid-side discharging rate: min{rd_max, max{0, e * eta_d /
// delta}}. Discharging at this rate for one slot never drives the state of
// charge below zero.
inline double clip_discharge(const BatteryConfig& cfg, double soc_kwh) {
  if (!(soc_kwh >= 0.0 && soc_kwh <= cfg.capacity_kwh))
    throw std::invalid_argument("clip_discharge: soc outside [0, capacity]");
  const double available_rate = soc_kwh * cfg.eta_d / cfg.slot_hours;
  return std::min(cfg.max_discharge_kw, std::max(0.0, available_rate));
}

// e' = e + delta * eta_c * b+ - delta * b- / eta_d, clamped to [0, E].
// b_kw must already respect the clip bounds; violations beyond tolerance
// throw.
double soc_update(const BatteryConfig& cfg, double soc_kwh, double b_kw);

// u_t = -p_t * (b_t + d_t - r_t) * delta. Payment is on an energy basis, so
// power times slot length.
inline double reward(double price_per_kwh, double net_demand_kw, double b_kw,
                     double slot_hours) {
  return -price_per_kwh * (b_kw + net_demand_kw) * slot_hours;
}

// One environment transition. The reward uses the current slot's price and
// net demand; next_exogenous carries the following slot's (net demand, price).
StepOutcome step(const BatteryConfig& cfg, const EnvState& state, Action action,
                 double next_net_demand_kw, double next_price_per_kwh);

using Policy = std::function<Action(const EnvState&)>;

struct RolloutResult {
  double cost = 0.0;            // sum over slots of -u_t (undiscounted)
  std::vector<Action> actions;
  std::vector<double> realized_b_kw;
  std::vector<double> soc_kwh;  // horizon + 1 entries, initial soc first
};

RolloutResult rollout(const BatteryConfig& cfg, const Scenario& scenario,
                      const Policy& policy, double initial_soc_kwh);

inline double rollout_cost(const BatteryConfig& cfg, const Scenario& scenario,
                           const Policy& policy, double initial_soc_kwh) {
  return rollout(cfg, scenario, policy, initial_soc_kwh).cost;
}

}  // namespace bess
