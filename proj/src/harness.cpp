#include "retract/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace retract::harness {

using nlohmann::json;

std::string_view mode_name(ScenarioMode m) {
  switch (m) {
    case ScenarioMode::Normal: return "normal";
    case ScenarioMode::IgnoreAps: return "ignore-aps";
    case ScenarioMode::NoForceLimit: return "no-force-limit";
  }
  return "?";
}

std::optional<ScenarioMode> parse_mode(std::string_view s) {
  for (auto m : {ScenarioMode::Normal, ScenarioMode::IgnoreAps, ScenarioMode::NoForceLimit})
    if (mode_name(m) == s) return m;
  return std::nullopt;
}

Config configure(Config base, ScenarioMode mode) {
  if (mode == ScenarioMode::IgnoreAps) base.ignore_aps = true;
  if (mode == ScenarioMode::NoForceLimit) base.force_limit_enabled = false;
  return base;
}

void BatchSpec::validate() const {
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (grid_values.empty()) throw std::invalid_argument("no grid values");
  if (ap_fractions.empty()) throw std::invalid_argument("no ap fractions");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  for (int n : grid_values) {
    Config c = base;
    c.grid_n = n;
    c.validate();
  }
  for (double f : ap_fractions)
    if (!(f >= 0.0 && f <= 100.0)) throw std::invalid_argument("ap fraction must lie in [0, 100]");
}

MetricsRow metrics_row(const exec::RunReport& report, unsigned long long seed, const Config& config,
                       ScenarioMode mode) {
  MetricsRow row;
  row.seed = seed;
  row.n = config.grid_n;
  row.ap_fraction = config.ap_fraction;
  row.mode = std::string(mode_name(mode));
  row.final_visibility = report.final_visibility;
  row.replans = report.replans;
  for (auto c : report.causes) row.replan_causes.emplace_back(exec::cause_name(c));
  row.max_force = report.max_force_seen;
  if (!report.planning_times.empty()) {
    row.planning_time_initial = report.planning_times.front();
    row.replanning_times.assign(report.planning_times.begin() + 1, report.planning_times.end());
  }
  row.outcome = std::string(exec::outcome_name(report.outcome));
  return row;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "'");
  return v;
}

template <class Int>
Int parse_int(const std::string& s) {
  Int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::runtime_error("bad integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    std::string causes, times;
    for (std::size_t i = 0; i < r.replan_causes.size(); ++i) causes += (i ? ";" : "") + r.replan_causes[i];
    for (std::size_t i = 0; i < r.replanning_times.size(); ++i) times += (i ? ";" : "") + fmt(r.replanning_times[i]);
    out << r.seed << ',' << r.n << ',' << fmt(r.ap_fraction) << ',' << r.mode << ',' << fmt(r.final_visibility)
        << ',' << r.replans << ',' << causes << ',' << fmt(r.max_force) << ',' << fmt(r.planning_time_initial)
        << ',' << times << ',' << r.outcome << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw std::runtime_error("unexpected metrics header");
  std::vector<MetricsRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) throw std::runtime_error("line " + std::to_string(lineno) + ": expected 11 fields");
    try {
      MetricsRow r;
      r.seed = parse_int<unsigned long long>(f[0]);
      r.n = parse_int<int>(f[1]);
      r.ap_fraction = parse_double(f[2]);
      r.mode = f[3];
      r.final_visibility = parse_double(f[4]);
      r.replans = parse_int<int>(f[5]);
      if (!f[6].empty()) r.replan_causes = split(f[6], ';');
      r.max_force = parse_double(f[7]);
      r.planning_time_initial = parse_double(f[8]);
      if (!f[9].empty())
        for (const auto& t : split(f[9], ';')) r.replanning_times.push_back(parse_double(t));
      r.outcome = f[10];
      rows.push_back(std::move(r));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

json stats(const std::vector<double>& v) {
  if (v.empty()) return {{"mean", 0.0}, {"sd", 0.0}, {"max", 0.0}};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
  return {{"mean", mean}, {"sd", sd}, {"max", *std::max_element(v.begin(), v.end())}};
}

json group_summary(const std::vector<const MetricsRow*>& rows, const std::vector<const exec::RunReport*>& reps) {
  std::vector<double> vis, force, initial, replan;
  int success = 0, replanned = 0, a = 0, b = 0, c = 0;
  std::map<std::string, int> causes, outcomes;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = *rows[i];
    vis.push_back(r.final_visibility);
    force.push_back(r.max_force);
    initial.push_back(r.planning_time_initial);
    replan.insert(replan.end(), r.replanning_times.begin(), r.replanning_times.end());
    if (r.outcome == "success") ++success;
    if (r.replans > 0) ++replanned;
    for (const auto& k : r.replan_causes) ++causes[k];
    ++outcomes[r.outcome];
    if (exec::is_straight_success(*reps[i])) ++a;
    if (exec::is_lateral_recovery(*reps[i])) ++b;
    if (exec::is_regrasp_recovery(*reps[i])) ++c;
  }
  const double n = static_cast<double>(rows.size());
  return {{"runs", rows.size()},
          {"visibility", stats(vis)},
          {"success_rate", success / n},
          {"replan_fraction", replanned / n},
          {"replan_causes", causes},
          {"outcomes", outcomes},
          {"scenario_counts", {{"A", a}, {"B", b}, {"C", c}}},
          {"max_force", stats(force)},
          {"median_planning_time_initial", median(initial)},
          {"median_replanning_time", median(replan)}};
}

}  // namespace

json summarize(const std::vector<MetricsRow>& rows, const std::vector<exec::RunReport>& reports) {
  std::map<std::pair<int, double>, std::vector<std::size_t>> groups;
  std::map<int, std::vector<double>> by_n;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    groups[{rows[i].n, rows[i].ap_fraction}].push_back(i);
    by_n[rows[i].n].push_back(rows[i].planning_time_initial);
  }
  auto collect = [&](const std::vector<std::size_t>& idx) {
    std::vector<const MetricsRow*> r;
    std::vector<const exec::RunReport*> p;
    for (auto i : idx) {
      r.push_back(&rows[i]);
      p.push_back(&reports[i]);
    }
    return group_summary(r, p);
  };
  std::vector<std::size_t> all(rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  json out;
  out["overall"] = collect(all);
  json g = json::array();
  for (const auto& [key, idx] : groups) {
    json s = collect(idx);
    s["N"] = key.first;
    s["f_%"] = key.second;
    g.push_back(std::move(s));
  }
  out["groups"] = std::move(g);
  json t = json::array();
  for (const auto& [n, times] : by_n) t.push_back({{"N", n}, {"median_planning_time_initial", median(times)}});
  out["planning_time_by_N"] = std::move(t);
  return out;
}

BatchResult run_batch(const BatchSpec& spec) {
  spec.validate();
  struct Job {
    Config config;
    unsigned long long seed;
    std::filesystem::path dir;
  };
  std::vector<Job> jobs;
  std::vector<int> grids = spec.grid_values;
  std::vector<double> fracs = spec.ap_fractions;
  std::sort(grids.begin(), grids.end());
  grids.erase(std::unique(grids.begin(), grids.end()), grids.end());
  std::sort(fracs.begin(), fracs.end());
  fracs.erase(std::unique(fracs.begin(), fracs.end()), fracs.end());
  const bool single = grids.size() == 1 && fracs.size() == 1;
  for (int n : grids)
    for (double f : fracs)
      for (int i = 0; i < spec.runs; ++i) {
        Config c = configure(spec.base, spec.mode);
        c.grid_n = n;
        c.ap_fraction = f;
        const unsigned long long seed = spec.base_seed + static_cast<unsigned long long>(i);
        c.seed = seed;
        std::filesystem::path dir;
        if (spec.out_dir) {
          const std::string run = "run_" + std::to_string(seed);
          dir = single ? *spec.out_dir / run
                       : *spec.out_dir / ("n" + std::to_string(n) + "_f" + fmt(f)) / run;
        }
        jobs.push_back({c, seed, dir});
      }

  BatchResult result;
  result.reports.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
      const Job& job = jobs[k];
      exec::RunOptions opt;
      opt.record_timing = spec.record_timing;
      if (spec.vtk && spec.out_dir) {
        opt.vtk_dir = job.dir / "vtk";
        std::filesystem::create_directories(*opt.vtk_dir);
      }
      try {
        result.reports[k] = exec::run_task(job.config, job.seed, opt);
      } catch (const std::exception& e) {
        exec::RunReport r;
        r.outcome = exec::Outcome::Error;
        r.detail = e.what();
        result.reports[k] = std::move(r);
      }
    }
  };
  const int workers = std::min<int>(spec.jobs, static_cast<int>(jobs.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t k = 0; k < jobs.size(); ++k)
    result.rows.push_back(metrics_row(result.reports[k], jobs[k].seed, jobs[k].config, spec.mode));
  result.summary = summarize(result.rows, result.reports);

  if (spec.out_dir) {
    std::filesystem::create_directories(*spec.out_dir);
    auto open = [](const std::filesystem::path& p) {
      std::ofstream out(p);
      if (!out) throw std::runtime_error("cannot write " + p.string());
      return out;
    };
    {
      auto out = open(*spec.out_dir / "metrics.csv");
      write_metrics_csv(out, result.rows);
    }
    {
      auto out = open(*spec.out_dir / "summary.json");
      out << result.summary.dump(2) << '\n';
    }
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      std::filesystem::create_directories(jobs[k].dir);
      auto trace = open(jobs[k].dir / "trace.jsonl");
      exec::write_trace_jsonl(trace, result.reports[k].trace);
      auto report = open(jobs[k].dir / "report.json");
      report << exec::report_json(result.reports[k]).dump(2) << '\n';
    }
  }
  return result;
}

}  // namespace retract::harness
