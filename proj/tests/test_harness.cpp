#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "retract/harness.hpp"

using namespace retract;
using namespace retract::harness;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MetricsRow sample_row() {
  MetricsRow r;
  r.seed = 12;
  r.n = 7;
  r.ap_fraction = 50;
  r.mode = "normal";
  r.final_visibility = 0.8888888888888888;
  r.replans = 2;
  r.replan_causes = {"force-during-pull", "height-exhausted"};
  r.max_force = 0.5123456789;
  r.planning_time_initial = 0.0123;
  r.replanning_times = {0.004, 1e-5};
  r.outcome = "success";
  return r;
}

}  // namespace

TEST_CASE("modes") {
  for (ScenarioMode m : {ScenarioMode::Normal, ScenarioMode::IgnoreAps, ScenarioMode::NoForceLimit})
    CHECK(parse_mode(mode_name(m)) == m);
  Config base;
  CHECK(configure(base, ScenarioMode::IgnoreAps).ignore_aps);
  CHECK(configure(base, ScenarioMode::IgnoreAps).force_limit_enabled);
  CHECK_FALSE(configure(base, ScenarioMode::NoForceLimit).force_limit_enabled);
  CHECK_FALSE(configure(base, ScenarioMode::Normal).ignore_aps);
}

TEST_CASE("batch spec validation") {
  BatchSpec s;
  CHECK_NOTHROW(s.validate());
  s.runs = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK_THROWS_AS(run_batch(s), std::invalid_argument);
  s.runs = 1;
  s.grid_values.clear();
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.grid_values = {7};
  s.ap_fractions = {120};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.ap_fractions = {50};
  s.jobs = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("metrics csv round trip") {
  MetricsRow empty = sample_row();
  empty.seed = 13;
  empty.replans = 0;
  empty.replan_causes.clear();
  empty.replanning_times.clear();
  empty.outcome = "no-plan";
  const std::vector<MetricsRow> rows{sample_row(), empty};
  std::stringstream ss;
  write_metrics_csv(ss, rows);
  const std::string text = ss.str();
  CHECK(text.rfind(std::string(kMetricsHeader) + "\n", 0) == 0);
  CHECK(text.find("force-during-pull;height-exhausted") != std::string::npos);
  std::istringstream in(text);
  CHECK(read_metrics_csv(in) == rows);
}

TEST_CASE("malformed csv") {
  std::istringstream bad_header("seed,N\n");
  CHECK_THROWS_AS(read_metrics_csv(bad_header), std::runtime_error);
  std::istringstream short_row(std::string(kMetricsHeader) + "\n1,7,50\n");
  try {
    read_metrics_csv(short_row);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream bad_number(std::string(kMetricsHeader) + "\n1,7,50,normal,abc,0,,0.1,0,,success\n");
  CHECK_THROWS_AS(read_metrics_csv(bad_number), std::runtime_error);
}

TEST_CASE("median") {
  CHECK(median({}) == 0.0);
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 3, 2}) == 2.5);
}

TEST_CASE("metrics row from a report") {
  exec::RunReport r;
  r.outcome = exec::Outcome::Success;
  r.final_visibility = 0.9;
  r.replans = 1;
  r.causes = {exec::ReplanCause::ForceDuringPull};
  r.max_force_seen = 0.51;
  r.planning_times = {0.2, 0.1};
  Config c;
  c.grid_n = 6;
  c.ap_fraction = 30;
  const MetricsRow m = metrics_row(r, 4, c, ScenarioMode::IgnoreAps);
  CHECK(m.seed == 4);
  CHECK(m.n == 6);
  CHECK(m.ap_fraction == 30);
  CHECK(m.mode == "ignore-aps");
  CHECK(m.replan_causes == std::vector<std::string>{"force-during-pull"});
  CHECK(m.planning_time_initial == 0.2);
  CHECK(m.replanning_times == std::vector<double>{0.1});
  CHECK(m.outcome == "success");
}

TEST_CASE("batch order, layout and repeatability") {
  const auto root = std::filesystem::temp_directory_path() / "retract_harness_test";
  std::filesystem::remove_all(root);
  BatchSpec s;
  s.runs = 2;
  s.grid_values = {6, 5};
  s.ap_fractions = {50};
  s.base_seed = 3;
  s.jobs = 2;
  s.record_timing = false;
  s.out_dir = root / "a";
  const BatchResult a = run_batch(s);
  REQUIRE(a.rows.size() == 4);
  CHECK(a.rows[0].n == 5);
  CHECK(a.rows[0].seed == 3);
  CHECK(a.rows[1].seed == 4);
  CHECK(a.rows[2].n == 6);
  CHECK(std::filesystem::exists(root / "a" / "metrics.csv"));
  CHECK(std::filesystem::exists(root / "a" / "summary.json"));
  CHECK(std::filesystem::exists(root / "a" / "n5_f50" / "run_3" / "trace.jsonl"));
  CHECK(a.summary.at("overall").at("runs") == 4);
  CHECK(a.summary.at("planning_time_by_N").size() == 2);

  s.out_dir = root / "b";
  s.jobs = 1;
  run_batch(s);
  CHECK(slurp(root / "a" / "metrics.csv") == slurp(root / "b" / "metrics.csv"));
  CHECK(slurp(root / "a" / "n6_f50" / "run_4" / "trace.jsonl") ==
        slurp(root / "b" / "n6_f50" / "run_4" / "trace.jsonl"));
  std::filesystem::remove_all(root);
}
