#include "bess/runner.hpp"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bess/config.hpp"
#include "bess/scenario.hpp"
#include "doctest.h"

using namespace bess;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("bess_runner_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// Small end-to-end configuration: 3 scenarios of 12 five-minute slots.
RunConfig small_config(const TempDir& dir) {
  RunConfig cfg;
  cfg.seed = 11;
  cfg.generate_sequences = 3;
  cfg.generate_horizon_slots = 12;
  cfg.scenario_dir = dir.file("scen");
  cfg.out_dir = dir.file("out");
  cfg.hyper.total_steps = 30;
  cfg.hyper.batch_size = 8;
  cfg.hyper.replay_capacity = 64;
  cfg.eval_n_test = 1;
  cfg.eval_window_slots = 6;
  cfg.eval_tau_slots = 3;
  return cfg;
}

}  // namespace

TEST_CASE("run_generate") {
  TempDir dir;
  RunConfig cfg = small_config(dir);

  SUBCASE("writes one loadable CSV per sequence") {
    const GenerateOutputs out = run_generate(cfg);
    REQUIRE(out.files.size() == 3u);
    CHECK(out.files[0].find("scenario_000.csv") != std::string::npos);
    CHECK(out.files[2].find("scenario_002.csv") != std::string::npos);
    for (const auto& f : out.files) {
      const Scenario sc = load_scenario_csv(f, cfg.battery.slot_hours);
      CHECK(sc.horizon() == 12);
      CHECK_NOTHROW(sc.validate());
      for (double p : sc.price_per_kwh) CHECK(p >= 0.0);
    }
  }

  SUBCASE("same seed gives identical files, different seed differs") {
    const GenerateOutputs a = run_generate(cfg);
    RunConfig cfg2 = cfg;
    cfg2.scenario_dir = dir.file("scen2");
    const GenerateOutputs b = run_generate(cfg2);
    for (std::size_t i = 0; i < a.files.size(); ++i)
      CHECK(read_bytes(a.files[i]) == read_bytes(b.files[i]));

    RunConfig cfg3 = cfg;
    cfg3.seed = 12;
    cfg3.scenario_dir = dir.file("scen3");
    const GenerateOutputs c = run_generate(cfg3);
    CHECK(read_bytes(a.files[0]) != read_bytes(c.files[0]));
  }

  SUBCASE("guards") {
    RunConfig no_seed = cfg;
    no_seed.seed.reset();
    CHECK_THROWS_AS(run_generate(no_seed), std::invalid_argument);

    RunConfig too_many = cfg;
    too_many.generate_sequences = 301;  // 5-minute slots hold 300 raw samples
    CHECK_THROWS_AS(run_generate(too_many), std::invalid_argument);

    RunConfig fractional = cfg;
    apply_key(fractional, "battery.slot_minutes", "0.01");  // 0.6 s per slot
    CHECK_THROWS_AS(run_generate(fractional), std::invalid_argument);
  }
}

TEST_CASE("run_train") {
  TempDir dir;
  RunConfig cfg = small_config(dir);
  run_generate(cfg);

  SUBCASE("produces checkpoint, log and config snapshot") {
    const TrainOutputs out = run_train(cfg);
    CHECK(out.steps == 30);
    CHECK(out.final_epsilon <= cfg.hyper.epsilon0);
    CHECK(out.episodes >= 1);
    CHECK(std::isfinite(out.mean_episode_reward));

    CHECK_NOTHROW(load_checkpoint(out.checkpoint_path));
    const std::string log = read_bytes(out.log_path);
    CHECK(log.rfind("step,episode,epsilon,reward,loss\n", 0) == 0);
    CHECK(std::count(log.begin(), log.end(), '\n') == 31);  // header + 30 rows
    CHECK(log.find("\n1,1,") != std::string::npos);
    const RunConfig snap = load_config(out.config_path);
    CHECK(snap.seed == cfg.seed);
    CHECK(snap.hyper.total_steps == 30);
  }

  SUBCASE("same seed reproduces checkpoint and log byte for byte") {
    const TrainOutputs a = run_train(cfg);
    const std::string ckpt_a = read_bytes(a.checkpoint_path);
    const std::string log_a = read_bytes(a.log_path);
    RunConfig cfg2 = cfg;
    cfg2.out_dir = dir.file("out2");
    const TrainOutputs b = run_train(cfg2);
    CHECK(ckpt_a == read_bytes(b.checkpoint_path));
    CHECK(log_a == read_bytes(b.log_path));
  }

  SUBCASE("train/test split must leave training data") {
    RunConfig all_test = cfg;
    all_test.eval_n_test = 3;
    CHECK_THROWS_AS(run_train(all_test), std::invalid_argument);
  }

  SUBCASE("a single scenario trains when nothing is held out") {
    TempDir solo;
    RunConfig cfg1 = small_config(solo);
    cfg1.generate_sequences = 1;
    cfg1.eval_n_test = 0;
    run_generate(cfg1);
    const TrainOutputs out = run_train(cfg1);
    CHECK(out.steps == 30);
  }

  SUBCASE("missing scenario directory is reported") {
    RunConfig cfg2 = cfg;
    cfg2.scenario_dir = dir.file("nope");
    const std::string msg = [&] {
      try {
        run_train(cfg2);
      } catch (const std::exception& e) {
        return std::string(e.what());
      }
      return std::string();
    }();
    CHECK(msg.find("scenario directory not found") != std::string::npos);
  }
}

TEST_CASE("run_eval") {
  TempDir dir;
  RunConfig cfg = small_config(dir);
  run_generate(cfg);
  const TrainOutputs trained = run_train(cfg);
  cfg.checkpoint_path = trained.checkpoint_path;

  SUBCASE("evaluates every policy on every held-out window") {
    const EvalOutputs out = run_eval(cfg, true);
    // 1 test scenario, 12 slots cut into 2 windows, 4 policies each.
    REQUIRE(out.records.size() == 8u);
    REQUIRE(out.summary.size() == 4u);
    for (const char* policy : {"optimal", "mpc", "dqn", "do_nothing"})
      CHECK(out.summary.count(policy) == 1u);

    for (const auto& rec : out.records) {
      CHECK(rec.actions.size() == 6u);
      CHECK(rec.soc_kwh.size() == 7u);
      CHECK(rec.soc_kwh.front() == cfg.initial_soc_kwh());
      for (double e : rec.soc_kwh) {
        CHECK(e >= 0.0);
        CHECK(e <= cfg.battery.capacity_kwh);
      }
    }

    // The summary is the arithmetic mean over that policy's records.
    for (const auto& [policy, avg] : out.summary) {
      double sum = 0.0;
      int count = 0;
      for (const auto& rec : out.records)
        if (rec.policy == policy) {
          sum += rec.cost;
          ++count;
        }
      CHECK(count == 2);
      CHECK(avg == sum / count);
    }
    CHECK(out.summary_text.find("avg_window_cost") != std::string::npos);
    CHECK(out.summary_text.find("mpc(tau=3)") != std::string::npos);
  }

  SUBCASE("optimal lower-bounds every other policy per window") {
    const EvalOutputs out = run_eval(cfg, true);
    for (const auto& rec : out.records) {
      if (rec.policy == "optimal") continue;
      for (const auto& opt : out.records)
        if (opt.policy == "optimal" && opt.scenario_id == rec.scenario_id &&
            opt.window_id == rec.window_id)
          CHECK(opt.cost <= rec.cost + 1e-9);
    }
  }

  SUBCASE("full-window lookahead collapses mpc onto optimal") {
    cfg.eval_tau_slots = cfg.eval_window_slots;
    const EvalOutputs out = run_eval(cfg, true);
    for (const auto& rec : out.records) {
      if (rec.policy != "mpc") continue;
      for (const auto& opt : out.records)
        if (opt.policy == "optimal" && opt.scenario_id == rec.scenario_id &&
            opt.window_id == rec.window_id) {
          CHECK(rec.cost == opt.cost);
          CHECK(rec.soc_kwh == opt.soc_kwh);
        }
    }
  }

  SUBCASE("baseline mode runs without a checkpoint") {
    cfg.checkpoint_path.clear();
    const EvalOutputs out = run_eval(cfg, false);
    REQUIRE(out.records.size() == 6u);  // 2 windows x 3 policies
    CHECK(out.summary.count("dqn") == 0u);
    CHECK(out.summary.count("optimal") == 1u);
  }

  SUBCASE("emits results.json, per-window CSVs and a config snapshot") {
    const EvalOutputs out = run_eval(cfg, true);
    const auto doc = nlohmann::json::parse(read_bytes(out.results_path));
    CHECK(doc["tau_slots"] == 3);
    CHECK(doc["window_slots"] == 6);
    CHECK(doc["records"].size() == 8u);
    CHECK(doc["summary"].size() == 4u);
    for (const auto& rec : doc["records"]) {
      CHECK(rec["actions"].size() == 6u);
      CHECK(rec["soc_trajectory"].size() == 7u);
    }

    const int sid = out.records.front().scenario_id;
    char name[64];
    std::snprintf(name, sizeof(name), "trajectory_s%03d_w00.csv", sid);
    const std::string traj =
        read_bytes((std::filesystem::path(cfg.out_dir) / name).string());
    CHECK(traj.find("soc_optimal_kwh") != std::string::npos);
    CHECK(traj.find("soc_dqn_kwh") != std::string::npos);
    std::snprintf(name, sizeof(name), "prices_s%03d_w01.csv", sid);
    CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / name));
    CHECK(std::filesystem::exists(out.config_path));
  }

  SUBCASE("same seed writes identical results") {
    const EvalOutputs a = run_eval(cfg, true);
    const std::string bytes_a = read_bytes(a.results_path);
    cfg.out_dir = dir.file("out2");
    const EvalOutputs b = run_eval(cfg, true);
    CHECK(bytes_a == read_bytes(b.results_path));
  }

  SUBCASE("guards") {
    RunConfig bad_tau = cfg;
    bad_tau.eval_tau_slots = 7;  // > window
    CHECK_THROWS_AS(run_eval(bad_tau, true), std::invalid_argument);

    RunConfig no_ckpt = cfg;
    no_ckpt.checkpoint_path.clear();
    CHECK_THROWS_AS(run_eval(no_ckpt, true), std::invalid_argument);

    RunConfig long_window = cfg;
    long_window.eval_window_slots = 13;  // scenarios only have 12 slots
    long_window.eval_tau_slots = 13;
    CHECK_THROWS_AS(run_eval(long_window, true), std::runtime_error);

    RunConfig no_test = cfg;
    no_test.eval_n_test = 0;
    CHECK_THROWS_AS(run_eval(no_test, true), std::invalid_argument);
  }
}
