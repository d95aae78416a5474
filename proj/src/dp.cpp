#include "bess/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bess {

void DPConfig::validate() const {
  if (soc_grid_points < 2)
    throw std::invalid_argument("dp: soc_grid_points must be >= 2");
  if (action_levels < 2 || action_levels % 2 == 0)
    throw std::invalid_argument("dp: action_levels must be odd and >= 3");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("dp: gamma must be in (0, 1]");
}

double level_fraction(const DPConfig& dp, int level) {
  if (level < 0 || level >= dp.action_levels)
    throw std::invalid_argument("dp: level index out of range");
  // Exactly zero at the midpoint: 2 * mid == action_levels - 1 for odd L.
  return 1.0 - 2.0 * static_cast<double>(level) /
                   static_cast<double>(dp.action_levels - 1);
}

LevelOutcome apply_level(const BatteryConfig& cfg, double soc_kwh,
                         double net_demand_kw, double price_per_kwh,
                         double fraction) {
  if (!(fraction >= -1.0 && fraction <= 1.0))
    throw std::invalid_argument("dp: fraction outside [-1, 1]");
  double b = 0.0;
  if (fraction > 0.0)
    b = fraction * clip_charge(cfg, soc_kwh);
  else if (fraction < 0.0)
    b = fraction * clip_discharge(cfg, soc_kwh);

  LevelOutcome out;
  out.b_kw = b;
  out.payment = -reward(price_per_kwh, net_demand_kw, b, cfg.slot_hours);
  // Same update expression as soc_update; b respects the clips by
  // construction, so the bound checks are skipped in this hot path.
  const double b_plus = std::max(0.0, b);
  const double b_minus = std::max(0.0, -b);
  const double next = soc_kwh + cfg.slot_hours * cfg.eta_c * b_plus -
                      cfg.slot_hours * b_minus / cfg.eta_d;
  out.next_soc_kwh = std::min(cfg.capacity_kwh, std::max(0.0, next));
  return out;
}

namespace {

std::vector<double> make_grid(const BatteryConfig& cfg, int points) {
  std::vector<double> grid(points);
  for (int g = 0; g < points; ++g)
    grid[g] = cfg.capacity_kwh * static_cast<double>(g) /
              static_cast<double>(points - 1);
  grid.front() = 0.0;
  grid.back() = cfg.capacity_kwh;  // pin the endpoint against rounding
  return grid;
}

double interp_value(const double* slice, int points, double capacity,
                    double soc_kwh) {
  const double x =
      soc_kwh / capacity * static_cast<double>(points - 1);
  int i = static_cast<int>(x);
  if (i > points - 2) i = points - 2;
  const double frac = x - static_cast<double>(i);
  return slice[i] + frac * (slice[i + 1] - slice[i]);
}

struct LevelChoice {
  int level = -1;
  double cost = std::numeric_limits<double>::infinity();
  LevelOutcome outcome;
};

// One Bellman minimization at a (possibly off-grid) state. Candidate order
// implements the tie-break: Idle first, then charge levels by ascending
// magnitude, then discharge levels by ascending magnitude; only a strictly
// lower cost displaces the incumbent. Shared by the backward fill, the
// forward extraction, and MPC, so all three agree bitwise.
LevelChoice best_level(const BatteryConfig& cfg, const DPConfig& dp,
                       double soc_kwh, double net_demand_kw,
                       double price_per_kwh, const double* next_slice) {
  LevelChoice best;
  const auto consider = [&](int level) {
    const LevelOutcome o = apply_level(cfg, soc_kwh, net_demand_kw,
                                       price_per_kwh,
                                       level_fraction(dp, level));
    const double c =
        o.payment + dp.gamma * interp_value(next_slice, dp.soc_grid_points,
                                            cfg.capacity_kwh, o.next_soc_kwh);
    if (c < best.cost) best = LevelChoice{level, c, o};
  };
  const int mid = (dp.action_levels - 1) / 2;
  consider(mid);
  for (int j = mid - 1; j >= 0; --j) consider(j);
  for (int j = mid + 1; j < dp.action_levels; ++j) consider(j);
  return best;
}

void check_inputs(const BatteryConfig& cfg, const Scenario& scenario,
                  const DPConfig& dp) {
  cfg.validate();
  dp.validate();
  scenario.validate();
  if (scenario.horizon() < 1)
    throw std::invalid_argument("dp: scenario horizon must be >= 1");
  if (scenario.slot_hours != cfg.slot_hours)
    throw std::invalid_argument(
        "dp: scenario slot length does not match battery config");
}

}  // namespace

ValueTable dp_backward(const BatteryConfig& cfg, const Scenario& scenario,
                       const DPConfig& dp, int t_begin, int t_end) {
  check_inputs(cfg, scenario, dp);
  if (t_begin < 0 || t_begin >= t_end || t_end > scenario.horizon())
    throw std::invalid_argument("dp: bad slot window");

  const int G = dp.soc_grid_points;
  const int span = t_end - t_begin;
  const std::vector<double> grid = make_grid(cfg, G);

  ValueTable table;
  table.grid_points = G;
  table.t_begin = t_begin;
  table.t_end = t_end;
  table.cost_to_go.assign(static_cast<std::size_t>(span + 1) * G, 0.0);
  table.best_level.assign(static_cast<std::size_t>(span) * G, 0);

  for (int s = span - 1; s >= 0; --s) {
    const int t = t_begin + s;
    const double net = scenario.load_kw[t] - scenario.pv_kw[t];
    const double price = scenario.price_per_kwh[t];
    const double* next_slice =
        table.cost_to_go.data() + static_cast<std::size_t>(s + 1) * G;
    double* slice = table.cost_to_go.data() + static_cast<std::size_t>(s) * G;
    int* act = table.best_level.data() + static_cast<std::size_t>(s) * G;
    for (int g = 0; g < G; ++g) {
      const LevelChoice c =
          best_level(cfg, dp, grid[g], net, price, next_slice);
      slice[g] = c.cost;
      act[g] = c.level;
    }
  }
  return table;
}

std::vector<Action> DPResult::actions() const {
  std::vector<Action> out;
  out.reserve(levels.size());
  for (int l : levels) out.push_back(action_from_index(l));
  return out;
}

DPResult dp_optimal(const BatteryConfig& cfg, const Scenario& scenario,
                    const DPConfig& dp, double initial_soc_kwh) {
  check_inputs(cfg, scenario, dp);
  if (initial_soc_kwh < 0.0 || initial_soc_kwh > cfg.capacity_kwh)
    throw std::invalid_argument("dp: initial soc outside [0, capacity]");

  const int H = scenario.horizon();
  const ValueTable table = dp_backward(cfg, scenario, dp, 0, H);

  DPResult res;
  res.levels.reserve(H);
  res.b_kw.reserve(H);
  res.soc_kwh.reserve(H + 1);
  res.soc_kwh.push_back(initial_soc_kwh);

  double soc = initial_soc_kwh;
  for (int t = 0; t < H; ++t) {
    const double net = scenario.load_kw[t] - scenario.pv_kw[t];
    const double price = scenario.price_per_kwh[t];
    const double* next_slice =
        table.cost_to_go.data() +
        static_cast<std::size_t>(t + 1) * table.grid_points;
    const LevelChoice c = best_level(cfg, dp, soc, net, price, next_slice);
    res.cost += c.outcome.payment;
    res.levels.push_back(c.level);
    res.b_kw.push_back(c.outcome.b_kw);
    soc = c.outcome.next_soc_kwh;
    res.soc_kwh.push_back(soc);
  }
  return res;
}

DPResult mpc_policy(const BatteryConfig& cfg, const Scenario& scenario,
                    const DPConfig& dp, int tau_slots,
                    double initial_soc_kwh) {
  check_inputs(cfg, scenario, dp);
  const int H = scenario.horizon();
  if (tau_slots < 1 || tau_slots > H)
    throw std::invalid_argument("mpc: tau_slots must be in [1, horizon]");
  if (initial_soc_kwh < 0.0 || initial_soc_kwh > cfg.capacity_kwh)
    throw std::invalid_argument("mpc: initial soc outside [0, capacity]");

  DPResult res;
  res.levels.reserve(H);
  res.b_kw.reserve(H);
  res.soc_kwh.reserve(H + 1);
  res.soc_kwh.push_back(initial_soc_kwh);

  double soc = initial_soc_kwh;
  for (int t = 0; t < H; ++t) {
    const int t_end = std::min(t + tau_slots, H);  // window shrinks at the end
    const ValueTable window = dp_backward(cfg, scenario, dp, t, t_end);
    const double net = scenario.load_kw[t] - scenario.pv_kw[t];
    const double price = scenario.price_per_kwh[t];
    const double* next_slice =
        window.cost_to_go.data() + window.grid_points;  // relative slot 1
    const LevelChoice c = best_level(cfg, dp, soc, net, price, next_slice);
    res.cost += c.outcome.payment;
    res.levels.push_back(c.level);
    res.b_kw.push_back(c.outcome.b_kw);
    soc = c.outcome.next_soc_kwh;
    res.soc_kwh.push_back(soc);
  }
  return res;
}

double do_nothing(const Scenario& scenario) {
  scenario.validate();
  double cost = 0.0;
  for (int t = 0; t < scenario.horizon(); ++t)
    cost += scenario.price_per_kwh[t] *
            (scenario.load_kw[t] - scenario.pv_kw[t]) * scenario.slot_hours;
  return cost;
}

BruteForceResult brute_force_enumerate(const BatteryConfig& cfg,
                                       const Scenario& scenario,
                                       double initial_soc_kwh) {
  cfg.validate();
  scenario.validate();
  const int H = scenario.horizon();
  if (H < 1) throw std::invalid_argument("brute force: empty scenario");
  if (H > 12)
    throw std::invalid_argument(
        "brute force: horizon too large (max 12 slots)");
  if (initial_soc_kwh < 0.0 || initial_soc_kwh > cfg.capacity_kwh)
    throw std::invalid_argument("brute force: initial soc outside [0, capacity]");
  if (scenario.slot_hours != cfg.slot_hours)
    throw std::invalid_argument(
        "brute force: scenario slot length does not match battery config");

  // Digit order matches the DP tie-break preference so the first minimum
  // found is the preferred sequence.
  static constexpr Action kOrder[3] = {Action::Idle, Action::Charge,
                                       Action::Discharge};
  long long total = 1;
  for (int t = 0; t < H; ++t) total *= 3;

  BruteForceResult best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<Action> seq(H);
  for (long long code = 0; code < total; ++code) {
    long long rest = code;
    for (int t = 0; t < H; ++t) {
      seq[t] = kOrder[rest % 3];
      rest /= 3;
    }
    double cost = 0.0;
    EnvState state{scenario.load_kw[0] - scenario.pv_kw[0],
                   scenario.price_per_kwh[0], initial_soc_kwh};
    for (int t = 0; t < H; ++t) {
      const int tn = std::min(t + 1, H - 1);
      const StepOutcome out =
          step(cfg, state, seq[t], scenario.load_kw[tn] - scenario.pv_kw[tn],
               scenario.price_per_kwh[tn]);
      cost -= out.reward;
      state = out.next_state;
    }
    if (cost < best.cost) {
      best.cost = cost;
      best.actions = seq;
    }
  }
  return best;
}

}  // namespace bess
