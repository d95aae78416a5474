#include "bess/dqn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bess/util.hpp"

namespace bess {

void Hyperparams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("hyperparams: gamma must be in (0, 1)");
  if (!(epsilon0 > 0.0 && epsilon0 <= 1.0))
    throw std::invalid_argument("hyperparams: epsilon0 must be in (0, 1]");
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::invalid_argument("hyperparams: kappa must be in (0, 1)");
  if (!(epsilon_min >= 0.0))
    throw std::invalid_argument("hyperparams: epsilon_min must be >= 0");
  if (batch_size < 1)
    throw std::invalid_argument("hyperparams: batch_size must be >= 1");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("hyperparams: learning_rate must be > 0");
  if (total_steps < 0)
    throw std::invalid_argument("hyperparams: total_steps must be >= 0");
  if (replay_capacity < 1)
    throw std::invalid_argument("hyperparams: replay_capacity must be >= 1");
}

int argmax_q(std::span<const double> q) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(q.size()); ++i)
    if (q[i] > q[best]) best = i;
  return best;
}

namespace {

std::array<double, 3> state_vector(const EnvState& s) {
  return {s.net_demand_kw, s.price_per_kwh, s.soc_kwh};
}

std::vector<double> q_values(const QNetwork& net, const Normalizer& norm,
                             const EnvState& s) {
  const auto raw = state_vector(s);
  return forward(net, norm.apply(raw));
}

}  // namespace

Action select_action(const QNetwork& net, const Normalizer& norm,
                     const EnvState& state, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("select_action: epsilon must be in [0, 1]");
  if (rng.uniform01() < epsilon)
    return action_from_index(static_cast<int>(rng.uniform_int(kNumActions)));
  return action_from_index(argmax_q(q_values(net, norm, state)));
}

double td_target(const QNetwork& net, const Normalizer& norm,
                 const Transition& transition, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("td_target: gamma must be in (0, 1)");
  const auto q = q_values(net, norm, transition.next_state);
  double max_q = q[0];
  for (double v : q) max_q = std::max(max_q, v);
  if (!std::isfinite(max_q))
    throw std::runtime_error("td_target: non-finite Q output");
  return transition.reward + gamma * max_q;
}

void batch_gradient(const QNetwork& net, const Normalizer& norm,
                    std::span<const Transition* const> batch,
                    std::span<const double> targets, bool parallel,
                    std::vector<Gradient>& scratch, Gradient& out,
                    std::vector<double>* per_sample_loss) {
  const int n = static_cast<int>(batch.size());
  if (static_cast<int>(targets.size()) != n)
    throw std::invalid_argument("batch_gradient: targets/batch size mismatch");
  while (static_cast<int>(scratch.size()) < n)
    scratch.push_back(make_zero_gradient(net));
  if (per_sample_loss) per_sample_loss->resize(n);

#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < n; ++i) {
    const auto raw = state_vector(batch[i]->state);
    const double l = backward_into(net, norm.apply(raw),
                                   action_index(batch[i]->action), targets[i],
                                   scratch[i]);
    if (per_sample_loss) (*per_sample_loss)[i] = l;
  }

  // Fixed-order reduction: summing in sample index order makes the result
  // independent of the thread count.
  out.set_zero();
  for (int i = 0; i < n; ++i) out.add(scratch[i]);
  out.scale(2.0 / n);  // d/dtheta of mean (y - Q)^2
}

double train_step(QNetwork& net, const Normalizer& norm,
                  const ReplayMemory& memory, const Hyperparams& hyper,
                  Rng& rng, TrainStepWorkspace* workspace) {
  if (memory.size() == 0)
    throw std::invalid_argument("train_step: replay memory is empty");

  TrainStepWorkspace local;
  TrainStepWorkspace& ws = workspace ? *workspace : local;

  const std::size_t k =
      std::min<std::size_t>(hyper.batch_size, memory.size());
  const auto batch = memory.sample(k, rng);

  ws.targets.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    ws.targets[i] = td_target(net, norm, *batch[i], hyper.gamma);

  if (ws.summed.layer_sizes.empty()) ws.summed = make_zero_gradient(net);
  batch_gradient(net, norm, batch, ws.targets, /*parallel=*/true,
                 ws.per_sample, ws.summed, &ws.losses);

  // Mean squared error; the per-sample kernel reports 0.5 e^2.
  double loss = 0.0;
  for (double l : ws.losses) loss += l;
  loss = 2.0 * loss / static_cast<double>(k);

  sgd_step(net, ws.summed, hyper.learning_rate);
  return loss;
}

Normalizer fit_normalizer(const BatteryConfig& cfg,
                          const std::vector<Scenario>& scenarios) {
  double net_lo = 0.0, net_hi = 0.0, p_lo = 0.0, p_hi = 0.0;
  bool first = true;
  for (const auto& sc : scenarios) {
    for (int t = 0; t < sc.horizon(); ++t) {
      const double nd = sc.load_kw[t] - sc.pv_kw[t];
      const double p = sc.price_per_kwh[t];
      if (first) {
        net_lo = net_hi = nd;
        p_lo = p_hi = p;
        first = false;
      } else {
        net_lo = std::min(net_lo, nd);
        net_hi = std::max(net_hi, nd);
        p_lo = std::min(p_lo, p);
        p_hi = std::max(p_hi, p);
      }
    }
  }
  Normalizer norm;
  norm.shift = {net_lo, p_lo, 0.0};
  norm.scale = {net_hi > net_lo ? net_hi - net_lo : 1.0,
                p_hi > p_lo ? p_hi - p_lo : 1.0, cfg.capacity_kwh};
  norm.validate();
  return norm;
}

TrainResult train(const BatteryConfig& cfg,
                  const std::vector<Scenario>& train_scenarios,
                  const Hyperparams& hyper, std::uint64_t seed) {
  cfg.validate();
  hyper.validate();
  if (train_scenarios.empty())
    throw std::invalid_argument("train: need at least one training scenario");
  for (const auto& sc : train_scenarios) {
    sc.validate();
    if (sc.horizon() < 1) throw std::invalid_argument("train: empty scenario");
    if (sc.slot_hours != cfg.slot_hours)
      throw std::invalid_argument(
          "train: scenario slot length does not match battery config");
  }

  Rng rng(seed);
  TrainResult res;
  res.net = init_random(default_layer_sizes(), rng.next_u64());
  res.norm = fit_normalizer(cfg, train_scenarios);

  ReplayMemory memory(hyper.replay_capacity);
  TrainStepWorkspace ws;
  res.log.reserve(static_cast<std::size_t>(hyper.total_steps));

  const int n_scenarios = static_cast<int>(train_scenarios.size());
  std::vector<int> order(n_scenarios);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  double epsilon = hyper.epsilon0;
  int episode = 0;
  int cursor = 0;   // position in order
  int slot = -1;    // -1 means a new episode starts on the next step
  const Scenario* sc = nullptr;
  EnvState state;

  for (long long step_i = 1; step_i <= hyper.total_steps; ++step_i) {
    if (slot < 0) {
      sc = &train_scenarios[order[cursor]];
      slot = 0;
      ++episode;
      state = EnvState{sc->load_kw[0] - sc->pv_kw[0], sc->price_per_kwh[0],
                       rng.uniform(0.0, cfg.capacity_kwh)};
    }

    const Action a = select_action(res.net, res.norm, state, epsilon, rng);
    const int tn = std::min(slot + 1, sc->horizon() - 1);
    const StepOutcome out = step(cfg, state, a,
                                 sc->load_kw[tn] - sc->pv_kw[tn],
                                 sc->price_per_kwh[tn]);
    memory.push(Transition{state, a, out.reward, out.next_state});
    const double loss = train_step(res.net, res.norm, memory, hyper, rng, &ws);
    res.log.push_back(TrainLogRow{step_i, episode, epsilon, out.reward, loss});

    state = out.next_state;
    ++slot;
    if (slot >= sc->horizon()) {
      slot = -1;
      epsilon = std::max(hyper.epsilon_min, hyper.kappa * epsilon);
      if (++cursor >= n_scenarios) {
        cursor = 0;
        rng.shuffle(order);
      }
    }
  }

  res.final_epsilon = epsilon;
  res.episodes = episode;
  return res;
}

Policy greedy_policy(const QNetwork& net, const Normalizer& norm) {
  return [net, norm](const EnvState& s) {
    return action_from_index(argmax_q(q_values(net, norm, s)));
  };
}

}  // namespace bess
