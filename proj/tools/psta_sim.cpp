// psta-sim: run, compare and sweep quadrotor scenarios; run the built-in
// correctness suites.
//
// Exit codes: 0 ok, 1 configuration or I/O error, 2 divergence.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "psta/psta.hpp"
#include "psta/validation.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;

struct CommonOptions {
  std::string scenario;
  std::string out = "out";
  std::vector<std::string> overrides;
  std::string controller;
  double duration = 0.0;
  double h = 0.0;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_controller) {
  cmd->add_option("scenario", o.scenario, "Scenario file, or a name under $PSTA_SCENARIO_DIR")->required();
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--override", o.overrides, "Dot-path assignment into the scenario, e.g. controller.psta.x.K=120")
      ->take_all()
      ->allow_extra_args(false);
  if (with_controller) {
    cmd->add_option("--controller", o.controller, "Controller variant")->check(CLI::IsMember({"psta", "smc", "psmc"}));
  }
  cmd->add_option("--duration", o.duration, "Override the scenario duration [s]")->check(CLI::PositiveNumber);
  cmd->add_option("--h", o.h, "Override the controller period [s]")->check(CLI::PositiveNumber);
}

psta::Scenario load(const CommonOptions& o, const std::string& controller,
                    const std::vector<std::string>& extra_overrides = {}) {
  std::vector<std::string> ov = o.overrides;
  ov.insert(ov.end(), extra_overrides.begin(), extra_overrides.end());
  if (!controller.empty()) ov.push_back("controller.type=" + controller);
  if (o.duration > 0.0) ov.push_back("duration=" + psta::detail::fmt15(o.duration));
  if (o.h > 0.0) ov.push_back("controller_h=" + psta::detail::fmt15(o.h));
  const fs::path path = psta::resolve_scenario_path(o.scenario);
  psta::Scenario sc = psta::load_scenario(path, ov);
  return sc;
}

// Keeps generated names inside the output directory.
std::string safe_name(std::string s) {
  for (char& c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) c = '_';
  }
  if (s.empty() || s == "." || s == "..") s = "_";
  return s;
}

struct RunOutcome {
  psta::SimLog log;
  psta::MetricsReport metrics;
};

RunOutcome simulate(const psta::Scenario& sc) {
  RunOutcome r;
  r.log = psta::run_scenario(sc);
  if (r.log.records.empty()) {
    r.metrics.diverged = true;
    return r;
  }
  try {
    r.metrics = psta::compute_metrics(r.log);
  } catch (const std::invalid_argument&) {
    // divergence before the metrics window opened
    r.metrics = psta::compute_metrics(r.log, {psta::TimeWindow{-1.0, r.log.records.back().t}, std::nullopt, 0.05});
  }
  return r;
}

void write_outputs(const RunOutcome& r, const fs::path& dir) {
  fs::create_directories(dir);
  psta::write_csv(r.log, dir / "log.csv");
  psta::write_report(r.metrics, {r.log.scenario, r.log.controller, r.log.identity_violations, r.log.actuator_clamps},
                     dir / "metrics.txt");
}

int cmd_run(const CommonOptions& o) {
  const psta::Scenario sc = load(o, o.controller);
  const RunOutcome r = simulate(sc);
  write_outputs(r, o.out);
  psta::write_report(r.metrics, {r.log.scenario, r.log.controller, r.log.identity_violations, r.log.actuator_clamps},
                     std::cout);
  if (r.log.diverged) {
    std::cerr << "diverged: " << r.log.divergence_reason << "\n";
    return kExitDiverged;
  }
  return kExitOk;
}

std::string cell(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

void print_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) w[i] = header[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) w[i] = std::max(w[i], r[i].size());
  }
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      out << std::left << std::setw(static_cast<int>(w[i])) << r[i] << (i + 1 < r.size() ? "  " : "\n");
    }
  };
  line(header);
  for (const auto& r : rows) line(r);
}

std::vector<std::string> metric_cells(const RunOutcome& r) {
  const auto& m = r.metrics;
  return {cell(m.rmse.x()),       cell(m.rmse.y()),       cell(m.rmse.z()),         cell(m.relative_pose_error),
          cell(m.chattering.x()), cell(m.chattering.y()), cell(m.chattering.z()),
          r.log.diverged ? "DIVERGED" : "ok"};
}

const std::vector<std::string> kMetricHeader = {"rmse_x", "rmse_y", "rmse_z", "rpe",   "chat_M1",
                                                "chat_M2", "chat_M3", "status"};

int cmd_compare(const CommonOptions& o, std::vector<std::string> controllers) {
  if (controllers.size() < 2) throw psta::ConfigError("controllers", 0, "compare needs at least two controllers");
  std::vector<psta::Scenario> scenarios;
  for (const auto& c : controllers) scenarios.push_back(load(o, c));

  std::vector<std::vector<std::string>> rows;
  bool any_diverged = false;
  std::vector<std::string> used;
  for (std::size_t i = 0; i < controllers.size(); ++i) {
    const RunOutcome r = simulate(scenarios[i]);
    std::string dir = safe_name(controllers[i]);
    int dup = 1;
    while (std::find(used.begin(), used.end(), dir) != used.end()) dir = safe_name(controllers[i]) + "-" + std::to_string(++dup);
    used.push_back(dir);
    write_outputs(r, fs::path(o.out) / dir);
    std::vector<std::string> row{dir};
    const auto m = metric_cells(r);
    row.insert(row.end(), m.begin(), m.end());
    rows.push_back(row);
    any_diverged = any_diverged || r.log.diverged;
  }
  std::vector<std::string> header{"controller"};
  header.insert(header.end(), kMetricHeader.begin(), kMetricHeader.end());
  print_table(std::cout, header, rows);
  std::ofstream table(fs::path(o.out) / "compare.txt", std::ios::binary);
  print_table(table, header, rows);
  if (!table) throw std::runtime_error("cannot write " + (fs::path(o.out) / "compare.txt").string());
  return any_diverged ? kExitDiverged : kExitOk;
}

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

GridAxis parse_grid(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw psta::ConfigError(spec, 0, "grid must look like key=v1,v2,...");
  }
  GridAxis g{spec.substr(0, eq), {}};
  std::stringstream ss(spec.substr(eq + 1));
  std::string v;
  while (std::getline(ss, v, ',')) {
    if (v.empty()) throw psta::ConfigError(g.key, 0, "empty grid value");
    g.values.push_back(v);
  }
  return g;
}

int cmd_sweep(const CommonOptions& o, const std::vector<std::string>& grid_specs, unsigned jobs) {
  if (grid_specs.empty()) throw psta::ConfigError("grid", 0, "sweep needs at least one --grid key=v1,v2");
  std::vector<GridAxis> grid;
  for (const auto& s : grid_specs) grid.push_back(parse_grid(s));

  // Cartesian product, last axis varying fastest.
  std::vector<std::vector<std::string>> points{{}};
  for (const auto& axis : grid) {
    std::vector<std::vector<std::string>> next;
    for (const auto& p : points) {
      for (const auto& v : axis.values) {
        auto q = p;
        q.push_back(v);
        next.push_back(q);
      }
    }
    points = std::move(next);
  }

  // Load everything up front so config errors surface before any run.
  std::vector<psta::Scenario> scenarios;
  for (const auto& p : points) {
    std::vector<std::string> ov;
    for (std::size_t i = 0; i < grid.size(); ++i) ov.push_back(grid[i].key + "=" + p[i]);
    scenarios.push_back(load(o, o.controller, ov));
  }

  std::vector<RunOutcome> results(points.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < points.size(); start += jobs) {
    std::vector<std::future<RunOutcome>> batch;
    const std::size_t end = std::min(points.size(), start + jobs);
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, [&sc = scenarios[i]] {
        RunOutcome r = simulate(sc);
        r.log.records = {};  // only the metrics are kept per point
        r.log.records.shrink_to_fit();
        return r;
      }));
    }
    for (std::size_t i = start; i < end; ++i) results[i] = batch[i - start].get();
  }

  std::size_t best = points.size();
  double best_score = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].log.diverged) continue;
    const double score = results[i].metrics.rmse.norm();
    if (best == points.size() || score < best_score) {
      best = i;
      best_score = score;
    }
  }

  std::vector<std::string> header{"point"};
  for (const auto& a : grid) header.push_back(a.key);
  header.insert(header.end(), kMetricHeader.begin(), kMetricHeader.end());
  header.push_back("best");
  std::vector<std::vector<std::string>> rows;
  bool any_diverged = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    row.insert(row.end(), points[i].begin(), points[i].end());
    const auto m = metric_cells(results[i]);
    row.insert(row.end(), m.begin(), m.end());
    row.push_back(i == best ? "*" : "");
    rows.push_back(row);
    any_diverged = any_diverged || results[i].log.diverged;
  }
  print_table(std::cout, header, rows);

  fs::create_directories(o.out);
  const fs::path csv_path = fs::path(o.out) / "sweep.csv";
  std::ofstream csv(csv_path, std::ios::binary);
  for (std::size_t i = 0; i < header.size(); ++i) csv << header[i] << (i + 1 < header.size() ? "," : "\r\n");
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const bool quote = r[i].find_first_of(",\"") != std::string::npos;
      std::string v = r[i];
      if (quote) {
        std::string q = "\"";
        for (char c : v) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
        v = q + "\"";
      }
      csv << v << (i + 1 < r.size() ? "," : "\r\n");
    }
  }
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  return any_diverged ? kExitDiverged : kExitOk;
}

int cmd_validate(int draws) {
  bool ok = true;
  for (const auto& r : psta::validation::run_all(draws)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PSTA quadrotor simulation harness"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  CommonOptions run_opt, cmp_opt, sweep_opt;
  auto* run = app.add_subcommand("run", "Simulate one scenario; writes <out>/log.csv and <out>/metrics.txt");
  add_common(run, run_opt, true);

  auto* compare = app.add_subcommand("compare", "Run several controllers on the same scenario");
  add_common(compare, cmp_opt, false);
  std::vector<std::string> controllers{"psta", "smc"};
  compare->add_option("--controllers", controllers, "Controllers to compare")
      ->delimiter(',')
      ->check(CLI::IsMember({"psta", "smc", "psmc"}))
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Cartesian sweep over scenario keys");
  add_common(sweep, sweep_opt, true);
  std::vector<std::string> grid;
  unsigned jobs = 0;
  sweep->add_option("--grid", grid, "key=v1,v2,... (repeatable)")->take_all()->allow_extra_args(false);
  sweep->add_option("--jobs", jobs, "Parallel runs (0 = hardware concurrency)");

  auto* validate = app.add_subcommand("validate", "Run the built-in correctness suites");
  int draws = 10000;
  validate->add_option("--draws", draws, "Random draws per suite")->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opt);
    if (*compare) return cmd_compare(cmp_opt, controllers);
    if (*sweep) return cmd_sweep(sweep_opt, grid, jobs);
    if (*validate) return cmd_validate(draws);
  } catch (const psta::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
