// retract: single closed-loop runs and batch experiments.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "retract/config.hpp"
#include "retract/executive.hpp"
#include "retract/harness.hpp"

namespace fs = std::filesystem;
using namespace retract;

namespace {

struct Flags {
  std::string config_file;
  std::optional<int> grid;
  std::string grid_list;
  std::optional<double> delta, epsilon, pull_height, ap_fraction;
  std::string ap_list;
  std::optional<unsigned long long> seed;
  int runs = 25;
  bool ignore_aps = false, no_force_limit = false, vtk = false, no_timing = false;
  std::optional<int> horizon;
  std::string objective;
  std::string out;
  int jobs = 1;
};

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config_file, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--delta", f.delta, "visibility threshold");
  app.add_option("--epsilon", f.epsilon, "force limit [N]");
  app.add_option("--pull-height", f.pull_height, "pull height [mm]");
  app.add_option("--seed", f.seed, "seed (base seed for batches)");
  app.add_flag("--ignore-aps", f.ignore_aps, "first plan ignores attachment distance");
  app.add_flag("--no-force-limit", f.no_force_limit, "disable the force gate");
  app.add_option("--horizon", f.horizon, "plan horizon");
  app.add_option("--objective", f.objective, "attachment term")->check(CLI::IsMember({"min", "sum"}));
  app.add_option("--out", f.out, "output directory");
  app.add_flag("--vtk", f.vtk, "write one VTK snapshot per control tick");
  app.add_flag("--no-timing", f.no_timing, "record zero planning times");
}

Config base_config(const Flags& f) {
  Config c = f.config_file.empty() ? Config{} : load_config(f.config_file);
  if (f.delta) c.delta = *f.delta;
  if (f.epsilon) c.epsilon = *f.epsilon;
  if (f.pull_height) c.pull_height = *f.pull_height;
  if (f.horizon) c.horizon = *f.horizon;
  if (f.seed) c.seed = *f.seed;
  if (!f.objective.empty()) c.objective = f.objective == "sum" ? ObjectiveKind::Sum : ObjectiveKind::Min;
  if (f.ignore_aps) c.ignore_aps = true;
  if (f.no_force_limit) c.force_limit_enabled = false;
  return c;
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    std::size_t used = 0;
    if constexpr (std::is_integral_v<T>)
      out.push_back(static_cast<T>(std::stoi(item, &used)));
    else
      out.push_back(static_cast<T>(std::stod(item, &used)));
    if (used != item.size()) throw std::invalid_argument("bad list item '" + item + "'");
  }
  return out;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

int cmd_run(const Flags& f) {
  Config c = base_config(f);
  if (f.grid) c.grid_n = *f.grid;
  if (f.ap_fraction) c.ap_fraction = *f.ap_fraction;
  c.validate();
  const fs::path out = f.out.empty() ? fs::path("run_" + std::to_string(c.seed)) : fs::path(f.out);
  fs::create_directories(out);
  exec::RunOptions opt;
  opt.record_timing = !f.no_timing;
  if (f.vtk) {
    opt.vtk_dir = out / "vtk";
    fs::create_directories(*opt.vtk_dir);
  }
  const exec::RunReport r = exec::run_task(c, c.seed, opt);
  {
    auto trace = open_out(out / "trace.jsonl");
    exec::write_trace_jsonl(trace, r.trace);
  }
  {
    auto rep = open_out(out / "report.json");
    rep << exec::report_json(r).dump(2) << '\n';
  }
  std::cout << exec::outcome_name(r.outcome) << " visibility=" << r.final_visibility << " replans=" << r.replans
            << " max_force=" << r.max_force_seen << " -> " << out.string() << '\n';
  return r.outcome == exec::Outcome::Success ? 0 : 1;
}

int cmd_batch(const Flags& f) {
  harness::BatchSpec spec;
  spec.base = base_config(f);
  spec.base.ignore_aps = false;
  spec.base.force_limit_enabled = true;
  spec.mode = f.ignore_aps ? harness::ScenarioMode::IgnoreAps
              : f.no_force_limit ? harness::ScenarioMode::NoForceLimit
                                 : harness::ScenarioMode::Normal;
  if (f.ignore_aps && f.no_force_limit) throw std::invalid_argument("--ignore-aps and --no-force-limit are exclusive");
  spec.runs = f.runs;
  spec.base_seed = spec.base.seed;
  spec.grid_values = f.grid ? std::vector<int>{*f.grid}
                     : f.grid_list.empty() ? std::vector<int>{spec.base.grid_n}
                                           : parse_list<int>(f.grid_list);
  spec.ap_fractions = f.ap_fraction ? std::vector<double>{*f.ap_fraction}
                      : f.ap_list.empty() ? std::vector<double>{spec.base.ap_fraction}
                                          : parse_list<double>(f.ap_list);
  spec.jobs = f.jobs;
  spec.record_timing = !f.no_timing;
  spec.out_dir = fs::path(f.out.empty() ? "batch" : f.out);
  spec.vtk = f.vtk;
  spec.validate();
  const auto res = harness::run_batch(spec);
  const auto& o = res.summary.at("overall");
  std::cout << "runs=" << o.at("runs") << " visibility=" << o.at("visibility").at("mean") << " +- "
            << o.at("visibility").at("sd") << " success=" << o.at("success_rate")
            << " replanned=" << o.at("replan_fraction") << " max_force=" << o.at("max_force").at("max") << " -> "
            << spec.out_dir->string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Autonomous tissue retraction: simulation, planning and re-planning"};
  app.require_subcommand(1);
  Flags f;

  auto* run = app.add_subcommand("run", "one closed-loop run");
  add_common(*run, f);
  run->add_option("--grid", f.grid, "candidate grasp grid N");
  run->add_option("--ap-fraction", f.ap_fraction, "attached bottom-node percentage");

  auto* batch = app.add_subcommand("batch", "seeded batch");
  add_common(*batch, f);
  batch->add_option("--grid", f.grid_list, "N, or a comma list");
  batch->add_option("--ap-fraction", f.ap_list, "percentage, or a comma list");
  batch->add_option("--runs", f.runs, "runs per (N, f) cell");
  batch->add_option("--jobs", f.jobs, "parallel workers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(f);
    return cmd_batch(f);
  } catch (const std::invalid_argument& e) {
    std::cerr << "retract: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "retract: " << e.what() << '\n';
    return 1;
  }
}
