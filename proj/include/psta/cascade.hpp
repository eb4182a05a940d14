#pragma once

// Cascaded position/attitude controller. The outer loop maps translational
// sliding variables to a desired acceleration and thrust; the desired
// attitude is built from the acceleration direction and the yaw command;
// the inner loop maps attitude sliding variables to body moments.
//
// Axis index convention for the rotational channels: 0 <-> roll (body x,
// J_x), 1 <-> pitch (body y, J_y), 2 <-> yaw (body z, J_z).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>

#include "psta/baselines.hpp"
#include "psta/psta_kernel.hpp"
#include "psta/quad_dynamics.hpp"
#include "psta/so3.hpp"

namespace psta {

struct ReferenceSample {
  Vec3 p_d = Vec3::Zero();
  Vec3 pd_dot = Vec3::Zero();
  double psi_d = 0.0;
  double psi_d_dot = 0.0;
};

struct AttitudeErrors {
  Vec3 e_R = Vec3::Zero();
  Vec3 e_omega = Vec3::Zero();
};

enum class ControllerKind { Psta, Psmc, Smc };

inline const char* to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::Psta: return "psta";
    case ControllerKind::Psmc: return "psmc";
    case ControllerKind::Smc: return "smc";
  }
  return "?";
}

enum class OmegaDesiredMode { Zero, Numeric };

/// Per-axis sliding-surface constant plus the kernel gains. The step size h
/// inside each gain set must equal the controller period.
struct SmcAxisGains {
  double H = 0.1;
  SmcGains smc;
};

struct CascadeGains {
  ControllerKind kind = ControllerKind::Psta;
  // 0..2: x, y, z; 3..5: roll, pitch, yaw
  std::array<PstaGains, 6> psta{};
  std::array<PsmcGains, 6> psmc{};
  std::array<SmcAxisGains, 6> smc{};

  double sliding_H(std::size_t axis) const {
    switch (kind) {
      case ControllerKind::Psta: return psta[axis].H;
      case ControllerKind::Psmc: return psmc[axis].H;
      case ControllerKind::Smc: return smc[axis].H;
    }
    return 0.0;
  }

  double period() const {
    switch (kind) {
      case ControllerKind::Psta: return psta[0].h;
      case ControllerKind::Psmc: return psmc[0].h;
      case ControllerKind::Smc: return smc[0].smc.h;
    }
    return 0.0;
  }

  void validate() const {
    const double h = period();
    for (std::size_t i = 0; i < 6; ++i) {
      switch (kind) {
        case ControllerKind::Psta: psta[i].validate(); break;
        case ControllerKind::Psmc: psmc[i].validate(); break;
        case ControllerKind::Smc:
          smc[i].smc.validate();
          if (!(smc[i].H >= 0.0)) throw std::invalid_argument("SMC sliding constant H must be >= 0");
          break;
      }
      const double hi = kind == ControllerKind::Psta   ? psta[i].h
                        : kind == ControllerKind::Psmc ? psmc[i].h
                                                       : smc[i].smc.h;
      if (hi != h) throw std::invalid_argument("CascadeGains: all axes must share the controller period h");
    }
  }
};

struct CascadeOptions {
  bool gravity_feedforward = true;
  double thrust_max_factor = 2.0;  // f_max = factor * m * g
  OmegaDesiredMode omega_d_mode = OmegaDesiredMode::Zero;
};

// ---------------------------------------------------------------------------
// Axis kernels. Every kernel takes a sliding variable with the convention
// "positive value demands positive output".

class PsmcAxis {
 public:
  PsmcAxis() = default;
  explicit PsmcAxis(const PsmcGains& g) : gains_(g) { gains_.validate(); }
  double step(double s) {
    const PsmcStep r = psmc_step(gains_, state_, s);
    state_ = r.next;
    return r.u;
  }
  void reset() { state_ = {}; }
  const PsmcState& state() const { return state_; }

 private:
  PsmcGains gains_;
  PsmcState state_;
};

/// Conventional SMC on one axis; sigma_dot from a backward difference.
class SmcAxis {
 public:
  SmcAxis() = default;
  explicit SmcAxis(const SmcGains& g) : gains_(g) { gains_.validate(); }
  double step(double s) {
    // smc_step expects (actual - desired)
    const double sigma = -s;
    const double sigma_dot = has_prev_ ? (sigma - prev_) / gains_.h : 0.0;
    prev_ = sigma;
    has_prev_ = true;
    return smc_step(gains_, sigma, sigma_dot);
  }
  void reset() { has_prev_ = false; prev_ = 0.0; }

 private:
  SmcGains gains_;
  double prev_ = 0.0;
  bool has_prev_ = false;
};

using AxisKernel = std::variant<PstaAxis, PsmcAxis, SmcAxis>;

inline AxisKernel make_axis(const CascadeGains& g, std::size_t axis) {
  switch (g.kind) {
    case ControllerKind::Psta: return PstaAxis(g.psta[axis]);
    case ControllerKind::Psmc: return PsmcAxis(g.psmc[axis]);
    case ControllerKind::Smc: return SmcAxis(g.smc[axis].smc);
  }
  return PstaAxis(g.psta[axis]);
}

inline double step_axis(AxisKernel& k, double s) {
  return std::visit([s](auto& a) { return a.step(s); }, k);
}

// ---------------------------------------------------------------------------
// Loop stages

inline Vec3 translational_sliding(const RigidBodyState& s, const ReferenceSample& ref, const Vec3& H) {
  return (ref.p_d - s.p) + H.cwiseProduct(ref.pd_dot - s.v);
}

struct PositionLoopResult {
  Vec3 sigma = Vec3::Zero();
  Vec3 a_desired = Vec3::Zero();  // includes gravity feedforward when enabled
  double f_u = 0.0;
};

/// Outer loop: sliding variables, per-axis kernels, thrust along the
/// current body z axis clamped to [0, f_max].
inline PositionLoopResult position_loop(const RigidBodyState& s, const ReferenceSample& ref, const Vec3& H,
                                        std::span<AxisKernel, 3> axes, const QuadParams& quad,
                                        const CascadeOptions& opt) {
  PositionLoopResult r;
  r.sigma = translational_sliding(s, ref, H);
  for (int i = 0; i < 3; ++i) r.a_desired(i) = step_axis(axes[i], r.sigma(i));
  if (opt.gravity_feedforward) r.a_desired.z() += quad.g;
  const double f_max = opt.thrust_max_factor * quad.m * quad.g;
  r.f_u = std::clamp(quad.m * r.a_desired.dot(s.R * Vec3::UnitZ()), 0.0, f_max);
  return r;
}

struct DesiredAttitude {
  Mat3 R_d = Mat3::Identity();
  bool held_previous = false;    // |a_desired| too small, previous R_d reused
  bool heading_fallback = false; // thrust axis parallel to the yaw heading
};

inline constexpr double kMinDesiredAccel = 1e-6;
inline constexpr double kMinHeadingCross = 1e-6;

inline DesiredAttitude desired_attitude(const Vec3& a_desired, double psi_d,
                                        const Mat3& previous = Mat3::Identity()) {
  DesiredAttitude out;
  const double n = a_desired.norm();
  if (!(n > kMinDesiredAccel)) {
    out.R_d = previous;
    out.held_previous = true;
    return out;
  }
  const Vec3 b3 = a_desired / n;
  Vec3 b1(std::cos(psi_d), std::sin(psi_d), 0.0);
  Vec3 cross = b3.cross(b1);
  if (cross.norm() <= kMinHeadingCross) {
    const double psi = psi_d + 0.5 * std::numbers::pi;
    b1 = Vec3(std::cos(psi), std::sin(psi), 0.0);
    cross = b3.cross(b1);
    out.heading_fallback = true;
  }
  const Vec3 b2 = cross / cross.norm();
  out.R_d.col(0) = b2.cross(b3);
  out.R_d.col(1) = b2;
  out.R_d.col(2) = b3;
  return out;
}

inline AttitudeErrors attitude_errors(const Mat3& R, const Mat3& R_d, const Vec3& omega, const Vec3& omega_d) {
  AttitudeErrors e;
  e.e_R = 0.5 * vee(R_d.transpose() * R - R.transpose() * R_d);
  e.e_omega = omega - R.transpose() * R_d * omega_d;
  return e;
}

struct AttitudeLoopResult {
  Vec3 sigma = Vec3::Zero();  // e_R + H e_omega
  Vec3 M_u = Vec3::Zero();
};

/// Inner loop. sigma is (actual - desired), so the kernels receive -sigma.
inline AttitudeLoopResult attitude_loop(const AttitudeErrors& err, const Vec3& H, std::span<AxisKernel, 3> axes,
                                        const Vec3& J) {
  AttitudeLoopResult r;
  r.sigma = err.e_R + H.cwiseProduct(err.e_omega);
  for (int i = 0; i < 3; ++i) r.M_u(i) = J(i) * step_axis(axes[i], -r.sigma(i));
  return r;
}

// ---------------------------------------------------------------------------

struct DebugRecord {
  Vec3 sigma_tran = Vec3::Zero();
  Vec3 sigma_rot = Vec3::Zero();
  Vec3 a_desired = Vec3::Zero();
  Mat3 R_d = Mat3::Identity();
  AttitudeErrors errors;
  Vec3 omega_d = Vec3::Zero();
  bool attitude_held = false;
  bool heading_fallback = false;
};

/// Stateful cascade; step once per controller period.
class CascadeController {
 public:
  CascadeController(const CascadeGains& gains, const QuadParams& quad, const CascadeOptions& opt = {})
      : gains_(gains), quad_(quad), opt_(opt) {
    gains_.validate();
    quad_.validate();
    reset();
  }

  void reset() {
    for (std::size_t i = 0; i < 3; ++i) {
      position_[i] = make_axis(gains_, i);
      attitude_[i] = make_axis(gains_, i + 3);
    }
    R_d_prev_ = Mat3::Identity();
    has_prev_ = false;
  }

  ControlInput update(const RigidBodyState& s, const ReferenceSample& ref) {
    const Vec3 H_tran(gains_.sliding_H(0), gains_.sliding_H(1), gains_.sliding_H(2));
    const Vec3 H_rot(gains_.sliding_H(3), gains_.sliding_H(4), gains_.sliding_H(5));

    const PositionLoopResult pos = position_loop(s, ref, H_tran, position_, quad_, opt_);
    const DesiredAttitude att = desired_attitude(pos.a_desired, ref.psi_d, R_d_prev_);

    Vec3 omega_d = Vec3::Zero();
    if (opt_.omega_d_mode == OmegaDesiredMode::Numeric && has_prev_) {
      omega_d = log_so3(R_d_prev_.transpose() * att.R_d) / gains_.period();
    }
    const AttitudeErrors err = attitude_errors(s.R, att.R_d, s.omega, omega_d);
    const AttitudeLoopResult rot = attitude_loop(err, H_rot, attitude_, quad_.J);

    R_d_prev_ = att.R_d;
    has_prev_ = true;

    debug_.sigma_tran = pos.sigma;
    debug_.sigma_rot = rot.sigma;
    debug_.a_desired = pos.a_desired;
    debug_.R_d = att.R_d;
    debug_.errors = err;
    debug_.omega_d = omega_d;
    debug_.attitude_held = att.held_previous;
    debug_.heading_fallback = att.heading_fallback;
    return ControlInput{pos.f_u, rot.M_u};
  }

  const DebugRecord& debug() const { return debug_; }
  const CascadeGains& gains() const { return gains_; }

  /// Steps where a PSTA axis reported |y_k| > |rho_{k-1}| (expected 0).
  long identity_violations() const {
    long n = 0;
    for (const auto* group : {&position_, &attitude_}) {
      for (const auto& k : *group) {
        if (const auto* a = std::get_if<PstaAxis>(&k)) n += a->identity_violations();
      }
    }
    return n;
  }

  const AxisKernel& position_axis(std::size_t i) const { return position_[i]; }
  const AxisKernel& attitude_axis(std::size_t i) const { return attitude_[i]; }

 private:
  CascadeGains gains_;
  QuadParams quad_;
  CascadeOptions opt_;
  std::array<AxisKernel, 3> position_;
  std::array<AxisKernel, 3> attitude_;
  Mat3 R_d_prev_ = Mat3::Identity();
  bool has_prev_ = false;
  DebugRecord debug_;
};

}  // namespace psta
