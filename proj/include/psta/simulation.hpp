#pragma once

// Closed-loop scenario driver.

#include <cmath>
#include <string>
#include <vector>

#include "psta/cascade.hpp"
#include "psta/errors.hpp"
#include "psta/quad_dynamics.hpp"
#include "psta/reference.hpp"

namespace psta {

struct Scenario {
  std::string name = "unnamed";
  double duration = 1.0;      // [s]
  double plant_dt = 1e-3;     // [s]
  double controller_h = 1e-3; // [s], integer multiple of plant_dt
  QuadParams quad;
  RigidBodyState initial;
  Trajectory reference;
  DisturbanceProfile disturbance;
  CascadeGains gains;
  CascadeOptions options;
  bool actuator_layer = false;

  /// Copies controller_h into every kernel's step size.
  void sync_period() {
    for (auto& g : gains.psta) g.h = controller_h;
    for (auto& g : gains.psmc) g.h = controller_h;
    for (auto& g : gains.smc) g.smc.h = controller_h;
  }

  long substeps() const { return std::lround(controller_h / plant_dt); }
  long ticks() const { return std::lround(duration / controller_h); }

  void validate() const {
    if (!(duration > 0.0)) throw std::invalid_argument("scenario duration must be > 0");
    if (!(plant_dt > 0.0) || !(controller_h > 0.0)) throw std::invalid_argument("plant_dt and controller_h must be > 0");
    if (plant_dt > controller_h * (1.0 + 1e-12)) throw std::invalid_argument("plant_dt must not exceed controller_h");
    const double ratio = controller_h / plant_dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
      throw std::invalid_argument("controller_h must be an integer multiple of plant_dt");
    }
    if (gains.period() != controller_h) throw std::invalid_argument("controller gains use a period different from controller_h");
    quad.validate();
    gains.validate();
    reference.validate();
    disturbance.validate();
    if (!initial.finite() || orthonormality_error(initial.R) > 1e-9 || std::abs(initial.R.determinant() - 1.0) > 1e-9) {
      throw std::invalid_argument("initial state must be finite with a proper rotation");
    }
  }
};

struct LogRecord {
  double t = 0.0;
  RigidBodyState state;
  ReferenceSample ref;
  Vec3 pos_error = Vec3::Zero();  // p - p_d
  Vec3 e_R = Vec3::Zero();
  ControlInput input;             // as applied to the plant
  Vec3 sigma_tran = Vec3::Zero();
  Vec3 sigma_rot = Vec3::Zero();
  Wrench wrench;
};

struct SimLog {
  std::string scenario;
  std::string controller;
  double h = 0.0;
  std::vector<LogRecord> records;
  bool diverged = false;
  std::string divergence_reason;
  long identity_violations = 0;  // PSTA |y_k| > |rho_{k-1}| events
  long actuator_clamps = 0;
  long attitude_fallbacks = 0;
};

inline constexpr double kDivergenceRadius = 1e3;  // [m]

/// Runs the closed loop. The controller ticks every controller_h with the
/// plant integrated in between under zero-order hold; one record per tick,
/// ticks at t = k*h for k = 0..duration/h.
inline SimLog run_scenario(const Scenario& sc) {
  sc.validate();
  SimLog log;
  log.scenario = sc.name;
  log.controller = to_string(sc.gains.kind);
  log.h = sc.controller_h;

  CascadeController ctrl(sc.gains, sc.quad, sc.options);
  const long n_ticks = sc.ticks();
  const long n_sub = sc.substeps();
  log.records.reserve(static_cast<std::size_t>(n_ticks) + 1);
  auto wrench_at = [&sc](double t) { return disturbance_at(t, sc.disturbance); };

  RigidBodyState state = sc.initial;
  for (long k = 0; k <= n_ticks; ++k) {
    const double t = static_cast<double>(k) * sc.controller_h;
    if (!state.finite() || state.p.norm() > kDivergenceRadius) {
      log.diverged = true;
      log.divergence_reason = "state left the admissible region at t=" + std::to_string(t);
      break;
    }
    const ReferenceSample ref = reference_at(t, sc.reference);
    ControlInput u;
    try {
      u = ctrl.update(state, ref);
    } catch (const NonFiniteError& e) {
      log.diverged = true;
      log.divergence_reason = e.what();
      break;
    }
    if (sc.actuator_layer) {
      const MixResult mix = mix_inverse(u, sc.quad);
      if (mix.clamped) ++log.actuator_clamps;
      u = mix.realized;
    }
    const DebugRecord& dbg = ctrl.debug();
    if (dbg.attitude_held || dbg.heading_fallback) ++log.attitude_fallbacks;

    LogRecord rec;
    rec.t = t;
    rec.state = state;
    rec.ref = ref;
    rec.pos_error = state.p - ref.p_d;
    rec.e_R = dbg.errors.e_R;
    rec.input = u;
    rec.sigma_tran = dbg.sigma_tran;
    rec.sigma_rot = dbg.sigma_rot;
    rec.wrench = wrench_at(t);
    log.records.push_back(rec);

    if (k == n_ticks) break;
    try {
      for (long j = 0; j < n_sub; ++j) {
        const double tj = t + static_cast<double>(j) * sc.plant_dt;
        state = integrate_step(state, u, wrench_at, sc.quad, tj, sc.plant_dt);
      }
    } catch (const IntegrationError& e) {
      log.diverged = true;
      log.divergence_reason = e.what();
      break;
    }
  }
  log.identity_violations = ctrl.identity_violations();
  return log;
}

}  // namespace psta
