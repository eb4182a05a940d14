#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "psta/psta.hpp"

using namespace psta;
namespace fs = std::filesystem;

namespace {

fs::path scenario_file(const std::string& name) { return fs::path(PSTA_SOURCE_DIR) / "scenarios" / (name + ".yaml"); }

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("psta_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

const char* kHoverYaml = R"(name: hover
duration: 3.0
plant_dt: 1.0e-3
controller_h: 1.0e-3
quad:
  mass: 1.0
  inertia: [0.01, 0.01, 0.02]
initial_state:
  position: [0.1, -0.1, 0.9]
reference:
  type: setpoint
  position: [0.0, 0.0, 1.0]
controller:
  type: psta
  psta:
    translation: {B: 10.0, K: 50.0, H: 0.5, F1: 1.0, F2: 1.0, F: 20.0}
    rotation:    {B: 30.0, K: 400.0, H: 0.05, F1: 10.0, F2: 10.0, F: 200.0}
)";

SimLog synthetic_log(std::size_t n, double dt) {
  SimLog log;
  log.h = dt;
  for (std::size_t k = 0; k < n; ++k) {
    LogRecord r;
    r.t = static_cast<double>(k) * dt;
    log.records.push_back(r);
  }
  return log;
}

}  // namespace

TEST(Reference, CircleAtZero) {
  Trajectory tr;
  tr.shape = CircleTrajectory{Vec3::Zero(), 1.0, 0.1};
  const ReferenceSample r = reference_at(0.0, tr);
  EXPECT_NEAR((r.p_d - Vec3(1, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((r.pd_dot - Vec3(0, 0.2 * std::numbers::pi, 0)).norm(), 0.0, 1e-15);
}

TEST(Reference, EllipseAtZero) {
  Trajectory tr;
  tr.shape = EllipseTrajectory{Vec3(0, 1, 1.6), Vec3(-1.5, 0, 0), Vec3(0, -1.5, -0.6), 0.2};
  const ReferenceSample r = reference_at(0.0, tr);
  EXPECT_NEAR((r.p_d - Vec3(-1.5, 1.0, 1.6)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((r.pd_dot - Vec3(0, -0.6 * std::numbers::pi, -0.24 * std::numbers::pi)).norm(), 0.0, 1e-14);
}

TEST(Reference, DerivativeMatchesFiniteDifference) {
  Trajectory tr;
  tr.shape = EllipseTrajectory{Vec3(0, 1, 1.6), Vec3(-1.5, 0, 0), Vec3(0, -1.5, -0.6), 0.2};
  const double t = 1.3, e = 1e-6;
  const Vec3 fd = (reference_at(t + e, tr).p_d - reference_at(t - e, tr).p_d) / (2 * e);
  EXPECT_LE((fd - reference_at(t, tr).pd_dot).norm(), 1e-8);
}

TEST(Reference, SetpointAndTable) {
  Trajectory tr;
  tr.shape = SetpointTrajectory{Vec3(1, 2, 3)};
  for (double t : {0.0, 1.0, 50.0}) EXPECT_EQ(reference_at(t, tr).pd_dot, Vec3::Zero());
  tr.shape = TableTrajectory{{0.0, 2.0}, {Vec3::Zero(), Vec3(2, 0, 0)}};
  const ReferenceSample r = reference_at(0.5, tr);
  EXPECT_DOUBLE_EQ(r.p_d.x(), 0.5);
  EXPECT_DOUBLE_EQ(r.pd_dot.x(), 1.0);
  EXPECT_EQ(reference_at(5.0, tr).p_d, Vec3(2, 0, 0));
}

TEST(Reference, YawWraps) {
  Trajectory tr;
  tr.yaw_rate = 1.0;
  const double psi = reference_at(4.0, tr).psi_d;
  EXPECT_GT(psi, -std::numbers::pi);
  EXPECT_LE(psi, std::numbers::pi);
  EXPECT_NEAR(psi, 4.0 - 2.0 * std::numbers::pi, 1e-12);
}

TEST(Metrics, PerfectTracking) {
  const MetricsReport m = compute_metrics(synthetic_log(101, 0.01));
  EXPECT_EQ(m.rmse, Vec3::Zero());
  EXPECT_EQ(m.max_abs_error, Vec3::Zero());
  EXPECT_EQ(m.relative_pose_error, 0.0);
  EXPECT_EQ(m.chattering, Vec3::Zero());
}

TEST(Metrics, ConstantOffset) {
  SimLog log = synthetic_log(101, 0.01);
  for (auto& r : log.records) r.pos_error = Vec3(0.01, 0, 0);
  const MetricsReport m = compute_metrics(log);
  EXPECT_NEAR(m.rmse.x(), 0.01, 1e-15);
  EXPECT_NEAR(m.max_abs_error.x(), 0.01, 1e-15);
  EXPECT_EQ(m.rmse.y(), 0.0);
  EXPECT_NEAR(m.relative_pose_error, 0.01, 1e-15);
}

TEST(Metrics, SquareWaveTotalVariation) {
  SimLog log = synthetic_log(401, 0.01);
  const double a = 0.3;
  // alternate every 10 samples inside the final quarter (t in [3, 4])
  int flips = 0;
  double prev = a;
  for (auto& r : log.records) {
    const double v = (r.t < 3.0 - 1e-9) ? a : ((static_cast<long>(std::lround(r.t * 100)) / 10) % 2 ? -a : a);
    if (r.t >= 3.0 - 1e-9 && v != prev) ++flips;
    prev = v;
    r.input.M_u = Vec3(v, 0, 0);
  }
  const MetricsReport m = compute_metrics(log);
  EXPECT_NEAR(m.chattering.x(), 2.0 * a * flips, 1e-12);
  EXPECT_GT(flips, 0);
}

TEST(Metrics, EmptyWindowThrows) {
  MetricsOptions opt;
  opt.window = TimeWindow{10.0, 20.0};
  EXPECT_THROW(compute_metrics(synthetic_log(11, 0.1), opt), std::invalid_argument);
  EXPECT_THROW(compute_metrics(SimLog{}), std::invalid_argument);
}

TEST(Csv, RoundTripFullPrecision) {
  const fs::path dir = temp_dir("csv");
  SimLog log = synthetic_log(3, 1e-3);
  log.records[1].state.p = Vec3(std::numbers::pi, -1.0 / 3.0, 1e-17);
  log.records[2].input.f_u = 37.376099999999994;
  write_csv(log, dir / "log.csv");
  const CsvTable t = read_csv(dir / "log.csv");
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.header.size(), kCsvColumns.size());
  // 15 significant digits
  EXPECT_NEAR(t.rows[1][t.column("x")], std::numbers::pi, 5e-15 * std::numbers::pi);
  EXPECT_NEAR(t.rows[1][t.column("y")], -1.0 / 3.0, 5e-15 / 3.0);
  EXPECT_EQ(t.rows[1][t.column("z")], 1e-17);
  EXPECT_EQ(t.rows[2][t.column("fu")], 37.3761);
}

TEST(Csv, EmptyLogIsHeaderOnly) {
  std::ostringstream out;
  write_csv(SimLog{}, out);
  const std::string s = out.str();
  EXPECT_EQ(s.find("\r\n"), s.size() - 2);
  EXPECT_EQ(s.rfind("t,", 0), 0u);
}

TEST(Csv, UnwritablePathNamesPath) {
  try {
    write_csv(SimLog{}, fs::path("/nonexistent-dir/log.csv"));
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/log.csv"), std::string::npos);
  }
}

TEST(Report, KeyValueBlockParses) {
  MetricsReport m;
  m.rmse = Vec3(0.01, 0.02, 0.03);
  m.samples = 42;
  std::stringstream ss;
  write_report(m, {"demo", "psta", 0, 3}, ss);
  const auto kv = parse_report(ss);
  auto get = [&](const std::string& k) {
    for (const auto& [key, v] : kv)
      if (key == k) return v;
    return std::string("<missing>");
  };
  EXPECT_EQ(get("scenario"), "demo");
  EXPECT_EQ(get("rmse_y"), "0.02");
  EXPECT_EQ(get("samples"), "42");
  EXPECT_EQ(get("actuator_clamps"), "3");
}

TEST(Config, ShippedScenariosLoad) {
  const Scenario a = load_scenario(scenario_file("numeric-circle"));
  EXPECT_EQ(a.quad.m, 3.81);
  EXPECT_EQ(a.gains.kind, ControllerKind::Psta);
  const Scenario b = load_scenario(scenario_file("ellipse-manip"));
  EXPECT_EQ(b.quad.m, 0.7);
  EXPECT_TRUE(b.actuator_layer);
}

TEST(Config, UnknownKeyNamesKeyAndLine) {
  const fs::path dir = temp_dir("cfg");
  std::string text = kHoverYaml;
  text.replace(text.find("  mass: 1.0"), 11, "  mass: 1.0\n  colour: red");
  const fs::path p = write_text(dir / "bad.yaml", text);
  try {
    load_scenario(p);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "quad.colour");
    EXPECT_EQ(e.line(), 7);
  }
}

TEST(Config, MissingFileNamesPath) {
  try {
    load_scenario("/no/such/scenario.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/no/such/scenario.yaml"), std::string::npos);
  }
}

TEST(Config, WrongTypeIsReported) {
  const fs::path dir = temp_dir("cfg2");
  std::string text = kHoverYaml;
  text.replace(text.find("duration: 3.0"), 13, "duration: soon");
  try {
    load_scenario(write_text(dir / "bad.yaml", text));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "duration");
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(Config, Overrides) {
  const Scenario s = load_scenario(scenario_file("numeric-circle"),
                                   {"duration=2.5", "controller.type=smc", "controller.psta.x.K=123"});
  EXPECT_EQ(s.duration, 2.5);
  EXPECT_EQ(s.gains.kind, ControllerKind::Smc);
  EXPECT_EQ(s.gains.psta[0].K, 123.0);
  EXPECT_EQ(s.gains.psta[1].K, 200.0);
  EXPECT_THROW(load_scenario(scenario_file("numeric-circle"), {"no_equals_sign"}), ConfigError);
  EXPECT_THROW(load_scenario(scenario_file("numeric-circle"), {"controller.type=pid"}), ConfigError);
}

TEST(Simulation, HoverRegulates) {
  const fs::path dir = temp_dir("hover");
  const SimLog log = run_scenario(load_scenario(write_text(dir / "hover.yaml", kHoverYaml)));
  ASSERT_FALSE(log.diverged);
  EXPECT_LT(log.records.back().pos_error.norm(), 1e-3);
  EXPECT_EQ(log.identity_violations, 0);
}

TEST(Simulation, RowCountAndDeterminism) {
  const Scenario sc = load_scenario(scenario_file("numeric-circle"));
  const SimLog a = run_scenario(sc);
  const SimLog b = run_scenario(sc);
  EXPECT_EQ(a.records.size(), static_cast<std::size_t>(std::lround(sc.duration / sc.controller_h)) + 1);
  std::ostringstream ca, cb;
  write_csv(a, ca);
  write_csv(b, cb);
  EXPECT_EQ(ca.str(), cb.str());
}

TEST(Simulation, SmcChattersMoreOnEveryChannel) {
  const MetricsReport p = compute_metrics(run_scenario(load_scenario(scenario_file("numeric-circle"))));
  const MetricsReport s =
      compute_metrics(run_scenario(load_scenario(scenario_file("numeric-circle"), {"controller.type=smc"})));
  for (int i = 0; i < 3; ++i) EXPECT_LT(p.chattering(i), s.chattering(i)) << "channel " << i;
}

TEST(Simulation, DisturbanceIsExercised) {
  const auto path = scenario_file("numeric-circle");
  const MetricsReport with = compute_metrics(run_scenario(load_scenario(path)));
  std::vector<std::string> off;
  for (const char* ch : {"force_x", "force_y", "force_z", "torque_x", "torque_y", "torque_z"}) {
    off.push_back(std::string("disturbance.") + ch + ".amplitude=0");
  }
  const MetricsReport without = compute_metrics(run_scenario(load_scenario(path, off)));
  EXPECT_LT(without.rmse.norm(), with.rmse.norm());
}

TEST(Simulation, PlantStepRefinement) {
  const auto path = scenario_file("numeric-circle");
  const MetricsReport coarse = compute_metrics(run_scenario(load_scenario(path)));
  const MetricsReport fine = compute_metrics(run_scenario(load_scenario(path, {"plant_dt=5e-4"})));
  for (int i = 0; i < 2; ++i) {
    EXPECT_LT(std::abs(fine.rmse(i) - coarse.rmse(i)) / coarse.rmse(i), 0.01) << "axis " << i;
  }
}

TEST(Simulation, DivergenceIsFlagged) {
  const SimLog log =
      run_scenario(load_scenario(scenario_file("numeric-circle"), {"controller.type=smc", "controller.smc.rotation.lambda=1e4",
                                                                   "controller.smc.rotation.F=1e12"}));
  EXPECT_TRUE(log.diverged);
  EXPECT_FALSE(log.divergence_reason.empty());
  EXPECT_LT(log.records.back().t, 20.0);
}
