#pragma once

#include <cstdint>
#include <vector>

namespace bess {

// Discrete-Markov price process: an n-state chain of mean price levels. The
// chain state is held for hold_slots slots between transitions; each emitted
// slot price is the state mean plus zero-mean Gaussian noise, truncated at 0.
struct PriceChain {
  int n_states = 9;
  std::vector<double> means;       // one mean price level per state
  std::vector<double> transition;  // row-major n x n, rows sum to 1
  double noise_std = 0.0;
  int hold_slots = 3;

  double at(int from, int to) const { return transition[from * n_states + to]; }
  void validate() const;
};

struct PriceSample {
  std::vector<double> prices;
  std::vector<int> states;  // chain state per slot
};

PriceSample sample_with_states(const PriceChain& chain, int horizon_slots,
                               std::uint64_t seed);

std::vector<double> sample_sequence(const PriceChain& chain, int horizon_slots,
                                    std::uint64_t seed);

// The nine-level default used by the synthetic benchmark. Means rise linearly
// from 0.05 to 0.11 $/kWh, the transition matrix is banded and diagonal-heavy
// (sticky levels, most remaining mass on adjacent levels), noise_std is 5% of
// the average level and the state is held for 3 slots (15 minutes at 5-minute
// slots).
PriceChain default_chain();

// Stationary distribution by power iteration; used by tests and reporting.
std::vector<double> stationary_distribution(const PriceChain& chain);

}  // namespace bess
