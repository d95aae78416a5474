#include "bess/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bess/rng.hpp"

namespace bess {

void PriceChain::validate() const {
  if (n_states < 1) throw std::invalid_argument("price chain: n_states < 1");
  if (static_cast<int>(means.size()) != n_states)
    throw std::invalid_argument("price chain: means size != n_states");
  if (static_cast<int>(transition.size()) != n_states * n_states)
    throw std::invalid_argument("price chain: transition size != n_states^2");
  for (double m : means)
    if (!(m >= 0.0) || !std::isfinite(m))
      throw std::invalid_argument("price chain: means must be >= 0");
  if (!(noise_std >= 0.0))
    throw std::invalid_argument("price chain: noise_std must be >= 0");
  if (hold_slots < 1)
    throw std::invalid_argument("price chain: hold_slots must be >= 1");
  for (int i = 0; i < n_states; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n_states; ++j) {
      const double p = at(i, j);
      if (!(p >= 0.0))
        throw std::invalid_argument("price chain: negative transition entry");
      row_sum += p;
    }
    if (std::abs(row_sum - 1.0) > 1e-12)
      throw std::invalid_argument("price chain: row " + std::to_string(i) +
                                  " does not sum to 1");
  }
}

namespace {

int sample_next_state(const PriceChain& chain, int state, Rng& rng) {
  const double u = rng.uniform01();
  double cum = 0.0;
  for (int j = 0; j < chain.n_states; ++j) {
    cum += chain.at(state, j);
    if (u < cum) return j;
  }
  return chain.n_states - 1;  // guard against rounding in the row sum
}

}  // namespace

PriceSample sample_with_states(const PriceChain& chain, int horizon_slots,
                               std::uint64_t seed) {
  chain.validate();
  if (horizon_slots < 1)
    throw std::invalid_argument("sample_sequence: horizon must be >= 1");

  Rng rng(seed);
  PriceSample out;
  out.prices.reserve(horizon_slots);
  out.states.reserve(horizon_slots);

  int state = static_cast<int>(rng.uniform_int(chain.n_states));
  for (int t = 0; t < horizon_slots; ++t) {
    if (t > 0 && t % chain.hold_slots == 0)
      state = sample_next_state(chain, state, rng);
    double price = chain.means[state];
    if (chain.noise_std > 0.0) price += chain.noise_std * rng.gaussian();
    out.prices.push_back(std::max(0.0, price));
    out.states.push_back(state);
  }
  return out;
}

std::vector<double> sample_sequence(const PriceChain& chain, int horizon_slots,
                                    std::uint64_t seed) {
  return sample_with_states(chain, horizon_slots, seed).prices;
}

PriceChain default_chain() {
  PriceChain chain;
  chain.n_states = 9;
  chain.means.resize(9);
  for (int i = 0; i < 9; ++i) chain.means[i] = 0.05 + 0.0075 * i;  // 0.05..0.11
  chain.noise_std =
      0.05 * std::accumulate(chain.means.begin(), chain.means.end(), 0.0) / 9.0;
  chain.hold_slots = 3;

  // Banded, diagonal-heavy weights: stay 0.70, one level away 0.12 each, two
  // levels away 0.03 each, renormalized at the edges. Residual from the
  // division goes on the diagonal so every row sums to 1 exactly.
  chain.transition.assign(81, 0.0);
  const auto band_weight = [](int d) {
    if (d == 0) return 0.70;
    if (d == 1) return 0.12;
    if (d == 2) return 0.03;
    return 0.0;
  };
  for (int i = 0; i < 9; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < 9; ++j) row_sum += band_weight(std::abs(i - j));
    for (int j = 0; j < 9; ++j)
      chain.transition[i * 9 + j] = band_weight(std::abs(i - j)) / row_sum;
    double sum = 0.0;
    for (int j = 0; j < 9; ++j) sum += chain.transition[i * 9 + j];
    chain.transition[i * 9 + i] += 1.0 - sum;
  }
  chain.validate();
  return chain;
}

std::vector<double> stationary_distribution(const PriceChain& chain) {
  chain.validate();
  const int n = chain.n_states;
  std::vector<double> pi(n, 1.0 / n), next(n);
  for (int iter = 0; iter < 100000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) next[j] += pi[i] * chain.at(i, j);
    double diff = 0.0;
    for (int j = 0; j < n; ++j) diff += std::abs(next[j] - pi[j]);
    pi.swap(next);
    if (diff < 1e-14) break;
  }
  return pi;
}

}  // namespace bess
