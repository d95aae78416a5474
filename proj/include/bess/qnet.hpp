#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bess {

// Parameter block shared by the network and its gradients: one row-major
// weight matrix and one bias vector per layer transition.
struct ParamBlock {
  std::vector<int> layer_sizes;
  std::vector<std::vector<double>> weights;  // [l]: sizes[l+1] x sizes[l]
  std::vector<std::vector<double>> biases;   // [l]: sizes[l+1]

  int num_transitions() const { return static_cast<int>(weights.size()); }
  std::size_t num_params() const;
  void set_zero();
  void add(const ParamBlock& other);
  void scale(double factor);
  bool all_finite() const;
};

// Feedforward approximator of Q(s, a): sigmoid hidden layers, identity output
// head, one output per action. The benchmark architecture is [3, 128, 32, 3].
struct QNetwork : ParamBlock {};
using Gradient = ParamBlock;

inline const std::vector<int>& default_layer_sizes() {
  static const std::vector<int> sizes{3, 128, 32, 3};
  return sizes;
}

// Per-input affine conditioning: normalized = (x - shift) / scale.
struct Normalizer {
  std::vector<double> shift;
  std::vector<double> scale;

  void validate() const;
  std::vector<double> apply(std::span<const double> x) const;
};

Normalizer identity_normalizer(int dim);

// Scaled-uniform init: weights ~ U(-w, w) with w = sqrt(6 / (fan_in +
// fan_out)), biases zero. Deterministic for a given seed; weights are drawn
// layer by layer in row-major order.
QNetwork init_random(const std::vector<int>& layer_sizes, std::uint64_t seed);

std::vector<double> forward(const QNetwork& net, std::span<const double> input);

Gradient make_zero_gradient(const QNetwork& net);

// Gradient of 0.5 * (target - Q(s, a))^2 with respect to all parameters,
// written into out (overwritten, not accumulated). Returns the loss value.
double backward_into(const QNetwork& net, std::span<const double> input,
                     int action_index, double target, Gradient& out);
Gradient backward(const QNetwork& net, std::span<const double> input,
                  int action_index, double target);

// theta <- theta - lr * grad (lr = 0 is a no-op). Throws if any parameter
// becomes non-finite.
void sgd_step(QNetwork& net, const Gradient& grad, double learning_rate);

// Binary checkpoint: magic, version, layer sizes, normalizer, then per layer
// the row-major weights and biases as little-endian 64-bit floats. Round-trips
// bit-exactly.
void save_checkpoint(const std::string& path, const QNetwork& net,
                     const Normalizer& norm);
struct Checkpoint {
  QNetwork net;
  Normalizer norm;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace bess
