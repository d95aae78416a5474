#include "bess/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bess/rng.hpp"
#include "bess/util.hpp"

namespace bess {

namespace {

// Start of the generated timestamp axis (2012-06-01T00:00:00Z); informational
// only, slot index is positional.
constexpr long long kEpochStartSeconds = 1338508800LL;

void check_series(const std::vector<double>& v, const char* name,
                  bool nonneg) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]))
      throw std::invalid_argument(std::string("scenario: non-finite ") + name +
                                  " at slot " + std::to_string(i));
    if (nonneg && v[i] < 0.0)
      throw std::invalid_argument(std::string("scenario: negative ") + name +
                                  " at slot " + std::to_string(i));
  }
}

}  // namespace

void Scenario::validate() const {
  if (pv_kw.size() != load_kw.size() || price_per_kwh.size() != load_kw.size())
    throw std::invalid_argument("scenario: series length mismatch");
  if (!(slot_hours > 0.0))
    throw std::invalid_argument("scenario: slot_hours must be > 0");
  check_series(load_kw, "load_kw", true);
  check_series(pv_kw, "pv_kw", true);
  check_series(price_per_kwh, "price_per_kwh", true);
}

std::vector<TimeSeries> resample_interleaved(const TimeSeries& raw,
                                             double slot_seconds,
                                             int n_sequences) {
  if (!(raw.resolution_seconds > 0.0))
    throw std::invalid_argument("resample: raw resolution must be > 0");
  if (n_sequences < 1)
    throw std::invalid_argument("resample: n_sequences must be >= 1");
  const double ratio = slot_seconds / raw.resolution_seconds;
  const long long samples_per_slot = std::llround(ratio);
  if (samples_per_slot < 1 ||
      std::abs(ratio - static_cast<double>(samples_per_slot)) > 1e-9)
    throw std::invalid_argument(
        "resample: slot length must be a multiple of the raw resolution");
  const long long sub_block = samples_per_slot / n_sequences;
  if (sub_block < 1)
    throw std::invalid_argument(
        "resample: more sequences than samples per slot");

  const long long n_slots =
      static_cast<long long>(raw.values.size()) / samples_per_slot;
  std::vector<TimeSeries> out(n_sequences);
  for (int k = 0; k < n_sequences; ++k) {
    out[k].resolution_seconds = slot_seconds;
    out[k].values.reserve(n_slots);
    for (long long t = 0; t < n_slots; ++t) {
      const long long base = t * samples_per_slot + k * sub_block;
      double sum = 0.0;
      for (long long i = 0; i < sub_block; ++i) sum += raw.values[base + i];
      out[k].values.push_back(sum / static_cast<double>(sub_block));
    }
  }
  return out;
}

namespace {

// Hour-of-day for a slot index. When a whole number of slots fits in a day
// the value repeats exactly with a 24 h period.
double hour_of_day(int t, double slot_hours) {
  const double slots_per_day_real = 24.0 / slot_hours;
  const long long slots_per_day = std::llround(slots_per_day_real);
  if (slots_per_day >= 1 &&
      std::abs(slots_per_day_real - static_cast<double>(slots_per_day)) < 1e-9)
    return static_cast<double>(t % slots_per_day) * (24.0 / slots_per_day);
  return std::fmod(t * slot_hours, 24.0);
}

double bump(double h, double center, double width) {
  const double z = (h - center) / width;
  return std::exp(-0.5 * z * z);
}

}  // namespace

std::vector<double> synth_load(int horizon_slots, double slot_hours,
                               std::uint64_t seed, double noise_amp_kw) {
  if (horizon_slots < 1)
    throw std::invalid_argument("synth_load: horizon must be >= 1");
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(horizon_slots);
  for (int t = 0; t < horizon_slots; ++t) {
    const double h = hour_of_day(t, slot_hours);
    double v = 16.0 + 18.0 * bump(h, 8.0, 1.8) + 26.0 * bump(h, 19.0, 2.2);
    if (noise_amp_kw > 0.0) v += noise_amp_kw * rng.gaussian();
    out.push_back(std::max(0.0, v));
  }
  return out;
}

std::vector<double> synth_pv(int horizon_slots, double slot_hours,
                             std::uint64_t seed, double noise_frac) {
  if (horizon_slots < 1)
    throw std::invalid_argument("synth_pv: horizon must be >= 1");
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(horizon_slots);
  for (int t = 0; t < horizon_slots; ++t) {
    const double h = hour_of_day(t, slot_hours);
    double clear_sky = 0.0;
    if (h > 6.0 && h < 18.0) {
      const double s = std::sin(M_PI * (h - 6.0) / 12.0);
      clear_sky = 40.0 * s * s;
    }
    double v = clear_sky;
    if (noise_frac > 0.0 && clear_sky > 0.0)
      v = clear_sky * std::max(0.0, 1.0 + noise_frac * rng.gaussian());
    out.push_back(v);
  }
  return out;
}

namespace {

const char* const kHeader = "timestamp,load_kw,pv_kw,price_per_kwh";
const char* const kColumnNames[4] = {"timestamp", "load_kw", "pv_kw",
                                     "price_per_kwh"};

double parse_cell(const std::string& cell, std::size_t row, int col) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v))
    throw std::runtime_error("csv row " + std::to_string(row) + ", column " +
                             kColumnNames[col] + ": not a number: '" + cell +
                             "'");
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

Scenario load_scenario_csv(const std::string& path, double slot_hours) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("scenario file is empty: " + path);
  {
    std::string header = line;
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != kHeader)
      throw std::runtime_error("scenario file " + path +
                               ": missing or wrong header, expected '" +
                               kHeader + "'");
  }

  Scenario sc;
  sc.slot_hours = slot_hours;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 4)
      throw std::runtime_error("csv row " + std::to_string(row) +
                               ": expected 4 fields, got " +
                               std::to_string(fields.size()));
    const double load = parse_cell(fields[1], row, 1);
    const double pv = parse_cell(fields[2], row, 2);
    const double price = parse_cell(fields[3], row, 3);
    if (load < 0.0)
      throw std::runtime_error("csv row " + std::to_string(row) +
                               ", column load_kw: negative value");
    if (pv < 0.0)
      throw std::runtime_error("csv row " + std::to_string(row) +
                               ", column pv_kw: negative value");
    if (price < 0.0)
      throw std::runtime_error("csv row " + std::to_string(row) +
                               ", column price_per_kwh: negative value");
    sc.load_kw.push_back(load);
    sc.pv_kw.push_back(pv);
    sc.price_per_kwh.push_back(price);
  }
  if (sc.horizon() < 1)
    throw std::runtime_error("scenario file has no data rows: " + path);
  sc.validate();
  return sc;
}

void save_scenario_csv(const std::string& path, const Scenario& scenario) {
  scenario.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << kHeader << "\n";
  const double slot_seconds = scenario.slot_hours * 3600.0;
  for (int t = 0; t < scenario.horizon(); ++t) {
    const std::time_t ts =
        kEpochStartSeconds + std::llround(static_cast<double>(t) * slot_seconds);
    std::tm tm_utc{};
    gmtime_r(&ts, &tm_utc);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    out << stamp << ',' << format_double(scenario.load_kw[t]) << ','
        << format_double(scenario.pv_kw[t]) << ','
        << format_double(scenario.price_per_kwh[t]) << "\n";
  }
}

std::pair<std::vector<int>, std::vector<int>> split_indices(
    int n, int n_test, std::uint64_t seed) {
  if (n_test < 0 || n_test >= n)
    throw std::invalid_argument("split: n_test out of range");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<bool> is_test(n, false);
  for (int i = 0; i < n_test; ++i) is_test[order[i]] = true;
  std::vector<int> train, test;
  for (int i = 0; i < n; ++i) (is_test[i] ? test : train).push_back(i);
  return {train, test};
}

std::pair<std::vector<Scenario>, std::vector<Scenario>> split_train_test(
    const std::vector<Scenario>& scenarios, int n_test, std::uint64_t seed) {
  const auto [train_idx, test_idx] =
      split_indices(static_cast<int>(scenarios.size()), n_test, seed);
  std::pair<std::vector<Scenario>, std::vector<Scenario>> out;
  for (int i : train_idx) out.first.push_back(scenarios[i]);
  for (int i : test_idx) out.second.push_back(scenarios[i]);
  return out;
}

std::vector<Scenario> cut_windows(const Scenario& scenario, int window_slots) {
  if (window_slots < 1)
    throw std::invalid_argument("cut_windows: window_slots must be >= 1");
  std::vector<Scenario> out;
  const int horizon = scenario.horizon();
  for (int start = 0; start + window_slots <= horizon; start += window_slots) {
    Scenario w;
    w.slot_hours = scenario.slot_hours;
    w.load_kw.assign(scenario.load_kw.begin() + start,
                     scenario.load_kw.begin() + start + window_slots);
    w.pv_kw.assign(scenario.pv_kw.begin() + start,
                   scenario.pv_kw.begin() + start + window_slots);
    w.price_per_kwh.assign(
        scenario.price_per_kwh.begin() + start,
        scenario.price_per_kwh.begin() + start + window_slots);
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace bess
