#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bess/battery.hpp"
#include "bess/qnet.hpp"
#include "bess/replay.hpp"
#include "bess/rng.hpp"
#include "bess/scenario.hpp"

namespace bess {

struct Hyperparams {
  double gamma = 0.99;
  double epsilon0 = 1.0;
  double kappa = 0.95;          // multiplicative epsilon decay per episode
  double epsilon_min = 0.01;
  double learning_rate = 1e-3;
  int batch_size = 32;
  long long total_steps = 200000;  // T
  std::size_t replay_capacity = 100000;

  void validate() const;
};

int argmax_q(std::span<const double> q);  // ties resolve to the lowest index

// epsilon-greedy: uniform random action with probability epsilon, otherwise
// argmax over the Q outputs. Draws one uniform, plus one integer draw on the
// explore branch.
Action select_action(const QNetwork& net, const Normalizer& norm,
                     const EnvState& state, double epsilon, Rng& rng);

// y = r + gamma * max_a' Q(s', a'). The task is continuing, so targets always
// bootstrap; there is no terminal case.
double td_target(const QNetwork& net, const Normalizer& norm,
                 const Transition& transition, double gamma);

// Mean over the batch of the per-sample gradients of 0.5 (y - Q(s,a))^2,
// doubled so the result is the gradient of mean (y - Q(s,a))^2. Per-sample
// gradients land in scratch, then are summed in sample order, which keeps the
// result identical for any thread count. If per_sample_loss is non-null it
// receives 0.5 (y_i - Q_i)^2 for each sample.
void batch_gradient(const QNetwork& net, const Normalizer& norm,
                    std::span<const Transition* const> batch,
                    std::span<const double> targets, bool parallel,
                    std::vector<Gradient>& scratch, Gradient& out,
                    std::vector<double>* per_sample_loss = nullptr);

struct TrainStepWorkspace {
  std::vector<Gradient> per_sample;
  Gradient summed;
  std::vector<double> targets;
  std::vector<double> losses;
};

// One learning update: sample min(batch_size, size) transitions without
// replacement, build targets with the current network, take one SGD step on
// the minibatch squared error. Returns the mean squared Bellman error.
double train_step(QNetwork& net, const Normalizer& norm,
                  const ReplayMemory& memory, const Hyperparams& hyper,
                  Rng& rng, TrainStepWorkspace* workspace = nullptr);

struct TrainLogRow {
  long long step;
  int episode;
  double epsilon;
  double reward;
  double loss;
};

struct TrainResult {
  QNetwork net;
  Normalizer norm;
  std::vector<TrainLogRow> log;
  double final_epsilon = 0.0;
  int episodes = 0;
};

// Full training loop: T environment steps over the training scenarios, cycled
// in seeded order with a fresh uniform-random initial state of charge per
// episode; epsilon decays multiplicatively at each episode end, floored at
// epsilon_min.
TrainResult train(const BatteryConfig& cfg,
                  const std::vector<Scenario>& train_scenarios,
                  const Hyperparams& hyper, std::uint64_t seed);

// Built from the training scenarios: net demand and price use the observed
// min/max, state of charge uses [0, capacity].
Normalizer fit_normalizer(const BatteryConfig& cfg,
                          const std::vector<Scenario>& scenarios);

// a = argmax_a' Q(s, a'), ties to the lowest index.
Policy greedy_policy(const QNetwork& net, const Normalizer& norm);

}  // namespace bess
