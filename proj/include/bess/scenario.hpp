#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bess {

// Raw measurement series at a fixed sampling period.
struct TimeSeries {
  std::vector<double> values;
  double resolution_seconds = 1.0;
};

// Aligned per-slot series of demand, renewable generation and price.
struct Scenario {
  std::vector<double> load_kw;
  std::vector<double> pv_kw;
  std::vector<double> price_per_kwh;
  double slot_hours = 5.0 / 60.0;

  int horizon() const { return static_cast<int>(load_kw.size()); }
  // Throws std::invalid_argument on length mismatch, negative load/PV/price,
  // or non-finite values.
  void validate() const;
};

// Splits one high-rate series into n_sequences slot-rate series. Sequence k's
// value at slot t is the mean of the k-th consecutive sub-block of samples
// within slot t. With 1 s samples, 300 s slots and 25 sequences each sub-block
// is 12 samples, so sequence k averages the k-th twelve seconds of every slot.
std::vector<TimeSeries> resample_interleaved(const TimeSeries& raw,
                                             double slot_seconds,
                                             int n_sequences);

// Daily-periodic demand profile (morning and evening peaks) with optional
// additive noise, clamped at zero. Deterministic for a given seed.
std::vector<double> synth_load(int horizon_slots, double slot_hours,
                               std::uint64_t seed, double noise_amp_kw = 2.0);

// Daytime generation bell, exactly zero at night. Noise acts as a
// multiplicative cloud factor so night slots stay zero.
std::vector<double> synth_pv(int horizon_slots, double slot_hours,
                             std::uint64_t seed, double noise_frac = 0.15);

// CSV schema (header required, in this order):
//   timestamp,load_kw,pv_kw,price_per_kwh
// Timestamps are informational; the slot index is positional.
Scenario load_scenario_csv(const std::string& path, double slot_hours);
void save_scenario_csv(const std::string& path, const Scenario& scenario);

// Seeded disjoint, exhaustive partition of [0, n) into (train, test) index
// sets; original order is kept within each side.
std::pair<std::vector<int>, std::vector<int>> split_indices(int n, int n_test,
                                                            std::uint64_t seed);
std::pair<std::vector<Scenario>, std::vector<Scenario>> split_train_test(
    const std::vector<Scenario>& scenarios, int n_test, std::uint64_t seed);

// Consecutive non-overlapping windows of window_slots; a trailing partial
// window is dropped.
std::vector<Scenario> cut_windows(const Scenario& scenario, int window_slots);

}  // namespace bess
