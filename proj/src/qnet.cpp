#include "bess/qnet.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "bess/rng.hpp"

namespace bess {

std::size_t ParamBlock::num_params() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

void ParamBlock::set_zero() {
  for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

void ParamBlock::add(const ParamBlock& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (std::size_t i = 0; i < weights[l].size(); ++i)
      weights[l][i] += other.weights[l][i];
    for (std::size_t i = 0; i < biases[l].size(); ++i)
      biases[l][i] += other.biases[l][i];
  }
}

void ParamBlock::scale(double factor) {
  for (auto& w : weights)
    for (double& x : w) x *= factor;
  for (auto& b : biases)
    for (double& x : b) x *= factor;
}

bool ParamBlock::all_finite() const {
  for (const auto& w : weights)
    for (double x : w)
      if (!std::isfinite(x)) return false;
  for (const auto& b : biases)
    for (double x : b)
      if (!std::isfinite(x)) return false;
  return true;
}

void Normalizer::validate() const {
  if (shift.size() != scale.size())
    throw std::invalid_argument("normalizer: shift/scale size mismatch");
  for (double s : scale)
    if (!(s > 0.0))
      throw std::invalid_argument("normalizer: scale must be > 0");
}

std::vector<double> Normalizer::apply(std::span<const double> x) const {
  if (x.size() != shift.size())
    throw std::invalid_argument("normalizer: input dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = (x[i] - shift[i]) / scale[i];
  return out;
}

Normalizer identity_normalizer(int dim) {
  Normalizer n;
  n.shift.assign(dim, 0.0);
  n.scale.assign(dim, 1.0);
  return n;
}

namespace {

void check_sizes(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("qnet: need at least input and output layers");
  for (int s : layer_sizes)
    if (s < 1) throw std::invalid_argument("qnet: layer sizes must be >= 1");
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

QNetwork init_random(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  check_sizes(layer_sizes);
  QNetwork net;
  net.layer_sizes = layer_sizes;
  Rng rng(seed);
  const int transitions = static_cast<int>(layer_sizes.size()) - 1;
  net.weights.resize(transitions);
  net.biases.resize(transitions);
  for (int l = 0; l < transitions; ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    net.weights[l].resize(static_cast<std::size_t>(fan_out) * fan_in);
    for (double& w : net.weights[l]) w = rng.uniform(-bound, bound);
    net.biases[l].assign(fan_out, 0.0);
  }
  return net;
}

Gradient make_zero_gradient(const QNetwork& net) {
  Gradient g;
  g.layer_sizes = net.layer_sizes;
  g.weights.resize(net.weights.size());
  g.biases.resize(net.biases.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    g.weights[l].assign(net.weights[l].size(), 0.0);
    g.biases[l].assign(net.biases[l].size(), 0.0);
  }
  return g;
}

namespace {

// Activations per layer; sigmoid on hidden transitions, identity on the last.
void forward_trace(const QNetwork& net, std::span<const double> input,
                   std::vector<std::vector<double>>& acts) {
  const int transitions = net.num_transitions();
  acts.resize(transitions + 1);
  acts[0].assign(input.begin(), input.end());
  for (int l = 0; l < transitions; ++l) {
    const int rows = net.layer_sizes[l + 1];
    const int cols = net.layer_sizes[l];
    const bool output_layer = (l == transitions - 1);
    const std::vector<double>& in = acts[l];
    std::vector<double>& out = acts[l + 1];
    out.assign(rows, 0.0);
    const double* w = net.weights[l].data();
    for (int r = 0; r < rows; ++r) {
      double z = net.biases[l][r];
      const double* wrow = w + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) z += wrow[c] * in[c];
      out[r] = output_layer ? z : sigmoid(z);
    }
  }
}

}  // namespace

std::vector<double> forward(const QNetwork& net, std::span<const double> input) {
  if (static_cast<int>(input.size()) != net.layer_sizes.front())
    throw std::invalid_argument("forward: input dimension mismatch");
  for (double x : input)
    if (!std::isfinite(x))
      throw std::invalid_argument("forward: non-finite input");
  std::vector<std::vector<double>> acts;
  forward_trace(net, input, acts);
  return acts.back();
}

double backward_into(const QNetwork& net, std::span<const double> input,
                     int action_index, double target, Gradient& out) {
  const int transitions = net.num_transitions();
  const int n_out = net.layer_sizes.back();
  if (action_index < 0 || action_index >= n_out)
    throw std::invalid_argument("backward: action index out of range");

  std::vector<std::vector<double>> acts;
  forward_trace(net, input, acts);
  const double q = acts.back()[action_index];
  const double loss = 0.5 * (target - q) * (target - q);

  // Head error: only the selected output unit carries a nonzero delta.
  std::vector<double> delta(n_out, 0.0);
  delta[action_index] = q - target;

  for (int l = transitions - 1; l >= 0; --l) {
    const int rows = net.layer_sizes[l + 1];
    const int cols = net.layer_sizes[l];
    const std::vector<double>& in = acts[l];
    double* gw = out.weights[l].data();
    for (int r = 0; r < rows; ++r) {
      const double d = delta[r];
      out.biases[l][r] = d;
      double* gwrow = gw + static_cast<std::size_t>(r) * cols;
      if (d == 0.0) {
        std::fill(gwrow, gwrow + cols, 0.0);
      } else {
        for (int c = 0; c < cols; ++c) gwrow[c] = d * in[c];
      }
    }
    if (l > 0) {
      // delta_prev = (W^T delta) .* sigma'(z), with sigma' = a (1 - a).
      std::vector<double> prev(cols, 0.0);
      const double* w = net.weights[l].data();
      for (int r = 0; r < rows; ++r) {
        const double d = delta[r];
        if (d == 0.0) continue;
        const double* wrow = w + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) prev[c] += wrow[c] * d;
      }
      for (int c = 0; c < cols; ++c) prev[c] *= in[c] * (1.0 - in[c]);
      delta.swap(prev);
    }
  }
  return loss;
}

Gradient backward(const QNetwork& net, std::span<const double> input,
                  int action_index, double target) {
  Gradient g = make_zero_gradient(net);
  backward_into(net, input, action_index, target, g);
  return g;
}

void sgd_step(QNetwork& net, const Gradient& grad, double learning_rate) {
  if (!(learning_rate >= 0.0))
    throw std::invalid_argument("sgd_step: learning rate must be >= 0");
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (std::size_t i = 0; i < net.weights[l].size(); ++i)
      net.weights[l][i] -= learning_rate * grad.weights[l][i];
    for (std::size_t i = 0; i < net.biases[l].size(); ++i)
      net.biases[l][i] -= learning_rate * grad.biases[l][i];
  }
  if (!net.all_finite())
    throw std::runtime_error("sgd_step: non-finite parameter after update");
}

namespace {

constexpr char kMagic[8] = {'B', 'E', 'S', 'S', 'Q', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void write_f64(std::ofstream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i)
    b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const QNetwork& net,
                     const Normalizer& norm) {
  norm.validate();
  if (static_cast<int>(norm.shift.size()) != net.layer_sizes.front())
    throw std::invalid_argument("checkpoint: normalizer dimension mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, 8);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(net.layer_sizes.size()));
  for (int s : net.layer_sizes) write_u32(out, static_cast<std::uint32_t>(s));
  for (double v : norm.shift) write_f64(out, v);
  for (double v : norm.scale) write_f64(out, v);
  for (int l = 0; l < net.num_transitions(); ++l) {
    for (double v : net.weights[l]) write_f64(out, v);
    for (double v : net.biases[l]) write_f64(out, v);
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  if (read_u32(in) != kVersion)
    throw std::runtime_error("unsupported checkpoint version: " + path);
  const std::uint32_t n_layers = read_u32(in);
  if (n_layers < 2 || n_layers > 64)
    throw std::runtime_error("corrupt checkpoint header: " + path);

  Checkpoint ck;
  ck.net.layer_sizes.resize(n_layers);
  for (auto& s : ck.net.layer_sizes) s = static_cast<int>(read_u32(in));
  check_sizes(ck.net.layer_sizes);
  const int dim = ck.net.layer_sizes.front();
  ck.norm.shift.resize(dim);
  ck.norm.scale.resize(dim);
  for (double& v : ck.norm.shift) v = read_f64(in);
  for (double& v : ck.norm.scale) v = read_f64(in);
  const int transitions = static_cast<int>(n_layers) - 1;
  ck.net.weights.resize(transitions);
  ck.net.biases.resize(transitions);
  for (int l = 0; l < transitions; ++l) {
    ck.net.weights[l].resize(static_cast<std::size_t>(ck.net.layer_sizes[l + 1]) *
                             ck.net.layer_sizes[l]);
    ck.net.biases[l].resize(ck.net.layer_sizes[l + 1]);
    for (double& v : ck.net.weights[l]) v = read_f64(in);
    for (double& v : ck.net.biases[l]) v = read_f64(in);
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return ck;
}

}  // namespace bess
