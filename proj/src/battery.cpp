#include "bess/battery.hpp"

#include <cmath>
#include <string>

namespace bess {

void BatteryConfig::validate() const {
  if (!(capacity_kwh > 0.0))
    throw std::invalid_argument("battery: capacity_kwh must be > 0");
  if (!(max_charge_kw >= 0.0) || !(max_discharge_kw >= 0.0))
    throw std::invalid_argument("battery: rate caps must be >= 0");
  if (!(eta_c > 0.0 && eta_c <= 1.0))
    throw std::invalid_argument("battery: eta_c must be in (0, 1]");
  if (!(eta_d > 0.0 && eta_d <= 1.0))
    throw std::invalid_argument("battery: eta_d must be in (0, 1]");
  if (!(slot_hours > 0.0))
    throw std::invalid_argument("battery: slot_hours must be > 0");
}

Action action_from_index(int i) {
  if (i < 0 || i >= kNumActions)
    throw std::invalid_argument("action index out of range: " +
                                std::to_string(i));
  return static_cast<Action>(i);
}

const char* action_name(Action a) {
  switch (a) {
    case Action::Charge: return "charge";
    case Action::Idle: return "idle";
    case Action::Discharge: return "discharge";
  }
  throw std::invalid_argument("invalid action");
}

double soc_update(const BatteryConfig& cfg, double soc_kwh, double b_kw) {
  const double b_plus = std::max(0.0, b_kw);
  const double b_minus = std::max(0.0, -b_kw);
  if (b_plus > clip_charge(cfg, soc_kwh) + kRateToleranceKw)
    throw std::invalid_argument("soc_update: charging power exceeds clip bound");
  if (b_minus > clip_discharge(cfg, soc_kwh) + kRateToleranceKw)
    throw std::invalid_argument(
        "soc_update: discharging power exceeds clip bound");

  const double next = soc_kwh + cfg.slot_hours * cfg.eta_c * b_plus -
                      cfg.slot_hours * b_minus / cfg.eta_d;
  if (next < -kSocToleranceKwh || next > cfg.capacity_kwh + kSocToleranceKwh)
    throw std::invalid_argument("soc_update: result outside [0, capacity]");
  return std::min(cfg.capacity_kwh, std::max(0.0, next));
}

StepOutcome step(const BatteryConfig& cfg, const EnvState& state, Action action,
                 double next_net_demand_kw, double next_price_per_kwh) {
  if (!std::isfinite(state.net_demand_kw) || !std::isfinite(state.price_per_kwh))
    throw std::invalid_argument("step: non-finite state");
  if (state.price_per_kwh < 0.0)
    throw std::invalid_argument("step: negative price");
  if (next_price_per_kwh < 0.0)
    throw std::invalid_argument("step: negative next price");

  double b = 0.0;
  switch (action) {
    case Action::Charge: b = clip_charge(cfg, state.soc_kwh); break;
    case Action::Idle: b = 0.0; break;
    case Action::Discharge: b = -clip_discharge(cfg, state.soc_kwh); break;
  }

  StepOutcome out;
  out.realized_b_kw = b;
  out.reward = reward(state.price_per_kwh, state.net_demand_kw, b, cfg.slot_hours);
  out.next_state.net_demand_kw = next_net_demand_kw;
  out.next_state.price_per_kwh = next_price_per_kwh;
  out.next_state.soc_kwh = soc_update(cfg, state.soc_kwh, b);
  return out;
}

RolloutResult rollout(const BatteryConfig& cfg, const Scenario& scenario,
                      const Policy& policy, double initial_soc_kwh) {
  cfg.validate();
  scenario.validate();
  const int horizon = scenario.horizon();
  if (horizon < 1) throw std::invalid_argument("rollout: empty scenario");
  if (initial_soc_kwh < 0.0 || initial_soc_kwh > cfg.capacity_kwh)
    throw std::invalid_argument("rollout: initial soc outside [0, capacity]");
  if (scenario.slot_hours != cfg.slot_hours)
    throw std::invalid_argument(
        "rollout: scenario slot length does not match battery config");

  RolloutResult res;
  res.actions.reserve(horizon);
  res.realized_b_kw.reserve(horizon);
  res.soc_kwh.reserve(horizon + 1);
  res.soc_kwh.push_back(initial_soc_kwh);

  EnvState state{scenario.load_kw[0] - scenario.pv_kw[0],
                 scenario.price_per_kwh[0], initial_soc_kwh};
  for (int t = 0; t < horizon; ++t) {
    const Action a = policy(state);
    // Past the horizon there is no fresh observation; hold the last slot's
    // exogenous values.
    const int tn = std::min(t + 1, horizon - 1);
    const StepOutcome out =
        step(cfg, state, a, scenario.load_kw[tn] - scenario.pv_kw[tn],
             scenario.price_per_kwh[tn]);
    res.cost -= out.reward;
    res.actions.push_back(a);
    res.realized_b_kw.push_back(out.realized_b_kw);
    res.soc_kwh.push_back(out.next_state.soc_kwh);
    state = out.next_state;
  }
  return res;
}

}  // namespace bess
