#include "bess/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bess/util.hpp"

namespace bess {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("config: invalid value '" + value +
                              "' for key '" + key + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) bad_value(key, value);
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  long long out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) bad_value(key, value);
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) bad_value(key, value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

// Comma-separated doubles; ';' is accepted as a row separator and treated
// like ','.
std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  std::string cell;
  const auto flush = [&] {
    const std::string t = trim(cell);
    if (!t.empty()) out.push_back(parse_double(key, t));
    cell.clear();
  };
  for (char c : value) {
    if (c == ',' || c == ';')
      flush();
    else
      cell.push_back(c);
  }
  flush();
  if (out.empty()) bad_value(key, value);
  return out;
}

}  // namespace

void RunConfig::validate() const {
  battery.validate();
  hyper.validate();
  dp.validate();
  if (chain_noise_std && *chain_noise_std < 0.0)
    throw std::invalid_argument("config: chain.noise_std must be >= 0");
  if (chain_hold_slots < 1)
    throw std::invalid_argument("config: chain.hold_slots must be >= 1");
  chain();  // surfaces custom-chain inconsistencies early
  if (generate_sequences < 1)
    throw std::invalid_argument("config: generate.n_sequences must be >= 1");
  if (generate_horizon_slots < 1)
    throw std::invalid_argument("config: generate.horizon_slots must be >= 1");
  if (scenario_dir.empty())
    throw std::invalid_argument("config: paths.scenario_dir must be set");
  if (out_dir.empty())
    throw std::invalid_argument("config: paths.out_dir must be set");
  if (eval_n_test < 0)
    throw std::invalid_argument("config: eval.n_test must be >= 0");
  if (eval_window_slots < 1)
    throw std::invalid_argument("config: eval.window_slots must be >= 1");
  if (eval_tau_slots < 1)
    throw std::invalid_argument("config: eval.tau_slots must be >= 1");
  if (eval_initial_soc_kwh &&
      (*eval_initial_soc_kwh < 0.0 ||
       *eval_initial_soc_kwh > battery.capacity_kwh))
    throw std::invalid_argument(
        "config: eval.initial_soc_kwh outside [0, capacity]");
}

std::uint64_t RunConfig::require_seed() const {
  if (!seed)
    throw std::invalid_argument(
        "config: seed is required (set seed= in the config file or pass "
        "--seed)");
  return *seed;
}

PriceChain RunConfig::chain() const {
  PriceChain c;
  if (chain_means || chain_transition) {
    if (!chain_means || !chain_transition)
      throw std::invalid_argument(
          "config: chain.means and chain.transition must be given together");
    const int n = static_cast<int>(chain_means->size());
    if (static_cast<int>(chain_transition->size()) != n * n)
      throw std::invalid_argument(
          "config: chain.transition must have n_states^2 entries");
    c.n_states = n;
    c.means = *chain_means;
    c.transition = *chain_transition;
    double mean_of_means = 0.0;
    for (double m : c.means) mean_of_means += m;
    c.noise_std = 0.05 * mean_of_means / n;
  } else {
    c = default_chain();
  }
  c.hold_slots = chain_hold_slots;
  if (chain_noise_std) c.noise_std = *chain_noise_std;
  c.validate();
  return c;
}

void apply_key(RunConfig& cfg, const std::string& key,
               const std::string& value) {
  if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "battery.capacity_kwh") {
    cfg.battery.capacity_kwh = parse_double(key, value);
  } else if (key == "battery.max_charge_kw") {
    cfg.battery.max_charge_kw = parse_double(key, value);
  } else if (key == "battery.max_discharge_kw") {
    cfg.battery.max_discharge_kw = parse_double(key, value);
  } else if (key == "battery.eta_c") {
    cfg.battery.eta_c = parse_double(key, value);
  } else if (key == "battery.eta_d") {
    cfg.battery.eta_d = parse_double(key, value);
  } else if (key == "battery.slot_minutes") {
    const double minutes = parse_double(key, value);
    if (!(minutes > 0.0)) bad_value(key, value);
    cfg.slot_minutes = minutes;
    cfg.battery.slot_hours = minutes / 60.0;
  } else if (key == "chain.noise_std") {
    cfg.chain_noise_std = parse_double(key, value);
  } else if (key == "chain.hold_slots") {
    cfg.chain_hold_slots = static_cast<int>(parse_int(key, value));
  } else if (key == "chain.means") {
    cfg.chain_means = parse_double_list(key, value);
  } else if (key == "chain.transition") {
    cfg.chain_transition = parse_double_list(key, value);
  } else if (key == "hyper.gamma") {
    cfg.hyper.gamma = parse_double(key, value);
  } else if (key == "hyper.epsilon0") {
    cfg.hyper.epsilon0 = parse_double(key, value);
  } else if (key == "hyper.kappa") {
    cfg.hyper.kappa = parse_double(key, value);
  } else if (key == "hyper.epsilon_min") {
    cfg.hyper.epsilon_min = parse_double(key, value);
  } else if (key == "hyper.learning_rate") {
    cfg.hyper.learning_rate = parse_double(key, value);
  } else if (key == "hyper.batch_size") {
    cfg.hyper.batch_size = static_cast<int>(parse_int(key, value));
  } else if (key == "hyper.total_steps") {
    cfg.hyper.total_steps = parse_int(key, value);
  } else if (key == "hyper.replay_capacity") {
    cfg.hyper.replay_capacity =
        static_cast<std::size_t>(parse_u64(key, value));
  } else if (key == "dp.soc_grid_points") {
    cfg.dp.soc_grid_points = static_cast<int>(parse_int(key, value));
  } else if (key == "dp.action_levels") {
    cfg.dp.action_levels = static_cast<int>(parse_int(key, value));
  } else if (key == "dp.gamma") {
    cfg.dp.gamma = parse_double(key, value);
  } else if (key == "generate.n_sequences") {
    cfg.generate_sequences = static_cast<int>(parse_int(key, value));
  } else if (key == "generate.horizon_slots") {
    cfg.generate_horizon_slots = static_cast<int>(parse_int(key, value));
  } else if (key == "paths.scenario_dir") {
    cfg.scenario_dir = value;
  } else if (key == "paths.checkpoint") {
    cfg.checkpoint_path = value;
  } else if (key == "paths.out_dir") {
    cfg.out_dir = value;
  } else if (key == "eval.n_test") {
    cfg.eval_n_test = static_cast<int>(parse_int(key, value));
  } else if (key == "eval.window_slots") {
    cfg.eval_window_slots = static_cast<int>(parse_int(key, value));
  } else if (key == "eval.tau_slots") {
    cfg.eval_tau_slots = static_cast<int>(parse_int(key, value));
  } else if (key == "eval.initial_soc_kwh") {
    cfg.eval_initial_soc_kwh = parse_double(key, value);
  } else if (key == "eval.parallel_windows") {
    cfg.eval_parallel_windows = parse_bool(key, value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: " + path + ":" +
                                  std::to_string(line_no) +
                                  ": expected key = value");
    apply_key(cfg, trim(stripped.substr(0, eq)),
              trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

std::string config_text(const RunConfig& cfg) {
  std::ostringstream out;
  const auto put = [&](const char* key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  const auto put_d = [&](const char* key, double v) {
    put(key, format_double(v));
  };
  const auto put_i = [&](const char* key, long long v) {
    put(key, std::to_string(v));
  };

  if (cfg.seed) put("seed", std::to_string(*cfg.seed));
  put_d("battery.capacity_kwh", cfg.battery.capacity_kwh);
  put_d("battery.max_charge_kw", cfg.battery.max_charge_kw);
  put_d("battery.max_discharge_kw", cfg.battery.max_discharge_kw);
  put_d("battery.eta_c", cfg.battery.eta_c);
  put_d("battery.eta_d", cfg.battery.eta_d);
  put_d("battery.slot_minutes", cfg.slot_minutes);
  if (cfg.chain_means && cfg.chain_transition) {
    const int n = static_cast<int>(cfg.chain_means->size());
    std::string means, transition;
    for (int i = 0; i < n; ++i) {
      if (i) means += ',';
      means += format_double((*cfg.chain_means)[i]);
    }
    for (int i = 0; i < static_cast<int>(cfg.chain_transition->size()); ++i) {
      if (i) transition += (i % n == 0) ? ';' : ',';
      transition += format_double((*cfg.chain_transition)[i]);
    }
    put("chain.means", means);
    put("chain.transition", transition);
  }
  put_d("chain.noise_std", cfg.chain().noise_std);
  put_i("chain.hold_slots", cfg.chain_hold_slots);
  put_d("hyper.gamma", cfg.hyper.gamma);
  put_d("hyper.epsilon0", cfg.hyper.epsilon0);
  put_d("hyper.kappa", cfg.hyper.kappa);
  put_d("hyper.epsilon_min", cfg.hyper.epsilon_min);
  put_d("hyper.learning_rate", cfg.hyper.learning_rate);
  put_i("hyper.batch_size", cfg.hyper.batch_size);
  put_i("hyper.total_steps", cfg.hyper.total_steps);
  put_i("hyper.replay_capacity",
        static_cast<long long>(cfg.hyper.replay_capacity));
  put_i("dp.soc_grid_points", cfg.dp.soc_grid_points);
  put_i("dp.action_levels", cfg.dp.action_levels);
  put_d("dp.gamma", cfg.dp.gamma);
  put_i("generate.n_sequences", cfg.generate_sequences);
  put_i("generate.horizon_slots", cfg.generate_horizon_slots);
  put("paths.scenario_dir", cfg.scenario_dir);
  if (!cfg.checkpoint_path.empty()) put("paths.checkpoint", cfg.checkpoint_path);
  put("paths.out_dir", cfg.out_dir);
  put_i("eval.n_test", cfg.eval_n_test);
  put_i("eval.window_slots", cfg.eval_window_slots);
  put_i("eval.tau_slots", cfg.eval_tau_slots);
  put_d("eval.initial_soc_kwh", cfg.initial_soc_kwh());
  put("eval.parallel_windows", cfg.eval_parallel_windows ? "true" : "false");
  return out.str();
}

void save_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("config: cannot write '" + path + "'");
  out << config_text(cfg);
  if (!out) throw std::runtime_error("config: write failed for '" + path + "'");
}

}  // namespace bess
