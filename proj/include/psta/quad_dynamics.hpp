#pragma once

// 6-DOF quadrotor plant: rigid-body dynamics, rotor mixing, scripted
// external wrenches and a fixed-step integrator.

#include <array>
#include <cmath>
#include <concepts>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "psta/errors.hpp"
#include "psta/so3.hpp"

namespace psta {

struct QuadParams {
  double m = 1.0;                 // mass [kg]
  Vec3 J = Vec3(0.1, 0.1, 0.1);   // diagonal inertia [kg m^2]
  double d = 0.17;                // arm length [m]
  double k_b = 1e-5;              // thrust factor [N s^2]
  double k_d = 1e-6;              // drag factor [N m s^2]
  double g = 9.81;                // gravity [m/s^2]

  void validate() const {
    if (!(m > 0.0) || !(J.minCoeff() > 0.0) || !(d > 0.0) || !(k_b > 0.0) || !(k_d > 0.0) || !(g >= 0.0)) {
      throw std::invalid_argument("QuadParams: require m, J, d, k_b, k_d > 0 and g >= 0");
    }
  }
};

struct RigidBodyState {
  Vec3 p = Vec3::Zero();      // position, world [m]
  Vec3 v = Vec3::Zero();      // velocity, world [m/s]
  Mat3 R = Mat3::Identity();  // body -> world
  Vec3 omega = Vec3::Zero();  // angular velocity, body [rad/s]

  bool finite() const { return p.allFinite() && v.allFinite() && R.allFinite() && omega.allFinite(); }
};

struct ControlInput {
  double f_u = 0.0;           // collective thrust [N]
  Vec3 M_u = Vec3::Zero();    // body moment [N m]
};

struct Wrench {
  Vec3 f_ext = Vec3::Zero();  // world frame [N]
  Vec3 M_ext = Vec3::Zero();  // body frame [N m]
};

struct StateDerivative {
  Vec3 p_dot;
  Vec3 v_dot;
  Mat3 R_dot;
  Vec3 omega_dot;
};

inline StateDerivative dynamics_deriv(const RigidBodyState& s, const ControlInput& u, const Wrench& w,
                                      const QuadParams& p) {
  StateDerivative d;
  d.p_dot = s.v;
  d.R_dot = s.R * hat(s.omega);
  d.v_dot = -p.g * Vec3::UnitZ() + (u.f_u * (s.R * Vec3::UnitZ()) + w.f_ext) / p.m;
  const Vec3 Jw = p.J.cwiseProduct(s.omega);
  d.omega_dot = (-s.omega.cross(Jw) + u.M_u + w.M_ext).cwiseQuotient(p.J);
  return d;
}

// ---------------------------------------------------------------------------
// Rotor mixing

using RotorVector = std::array<double, 4>;

/// Thrust and moments from squared rotor speeds.
inline ControlInput thrust_moments_sq(const RotorVector& w2, const QuadParams& p) {
  ControlInput u;
  u.f_u = p.k_b * (w2[0] + w2[1] + w2[2] + w2[3]);
  u.M_u = Vec3(p.k_b * p.d * (w2[3] - w2[1]),
               p.k_b * p.d * (w2[2] - w2[0]),
               p.k_d * (w2[1] + w2[3] - w2[0] - w2[2]));
  return u;
}

/// Thrust and moments from rotor speeds. Throws std::domain_error on a
/// negative speed.
inline ControlInput thrust_moments(const RotorVector& omega_rotors, const QuadParams& p) {
  RotorVector w2{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (omega_rotors[i] < 0.0) {
      throw std::domain_error("thrust_moments: rotor " + std::to_string(i + 1) + " speed is negative");
    }
    w2[i] = omega_rotors[i] * omega_rotors[i];
  }
  return thrust_moments_sq(w2, p);
}

struct MixResult {
  RotorVector omega_sq{};  // squared rotor speeds after clamping
  ControlInput realized;   // wrench actually produced by omega_sq
  bool clamped = false;    // true when any unclamped solution was negative
};

/// Exact inverse of the mixing map, with negative squared speeds clamped
/// to zero and the realized input recomputed.
inline MixResult mix_inverse(const ControlInput& u, const QuadParams& p) {
  const double S = u.f_u / p.k_b;
  const double A = u.M_u.x() / (p.k_b * p.d);  // w4 - w2
  const double Bm = u.M_u.y() / (p.k_b * p.d); // w3 - w1
  const double C = u.M_u.z() / p.k_d;          // (w2 + w4) - (w1 + w3)
  const double odd = 0.5 * (S - C);            // w1 + w3
  const double even = 0.5 * (S + C);          // w2 + w4

  MixResult r;
  r.omega_sq = {0.5 * (odd - Bm), 0.5 * (even - A), 0.5 * (odd + Bm), 0.5 * (even + A)};
  for (double& w : r.omega_sq) {
    if (w < 0.0) {
      w = 0.0;
      r.clamped = true;
    }
  }
  r.realized = r.clamped ? thrust_moments_sq(r.omega_sq, p) : u;
  return r;
}

// ---------------------------------------------------------------------------
// Scripted disturbances

enum class Wave { Sin, Cos };

/// offset + amplitude * wave(2 pi frequency t + phase)
struct SinusoidChannel {
  double amplitude = 0.0;
  double frequency = 0.0;  // [Hz]
  double phase = 0.0;      // [rad]
  double offset = 0.0;
  Wave wave = Wave::Sin;

  double at(double t) const {
    const double arg = 2.0 * std::numbers::pi * frequency * t + phase;
    return offset + amplitude * (wave == Wave::Sin ? std::sin(arg) : std::cos(arg));
  }
};

struct TimeGate {
  double start = 0.0;
  double stop = 0.0;
};

/// Six wrench channels (fx, fy, fz world; Mx, My, Mz body). With no gates
/// the profile is always active; otherwise it is active on [start, stop)
/// of any gate and zero elsewhere.
struct DisturbanceProfile {
  std::array<SinusoidChannel, 6> channels{};
  std::vector<TimeGate> gates;

  void validate() const {
    for (const auto& c : channels) {
      if (!(c.frequency >= 0.0) || !std::isfinite(c.amplitude) || !std::isfinite(c.phase) ||
          !std::isfinite(c.offset)) {
        throw std::invalid_argument("DisturbanceProfile: channel frequency must be >= 0 and values finite");
      }
    }
    for (const auto& g : gates) {
      if (!(g.stop > g.start)) throw std::invalid_argument("DisturbanceProfile: gate stop must exceed start");
    }
  }

  bool active(double t) const {
    if (gates.empty()) return true;
    for (const auto& g : gates) {
      if (t >= g.start && t < g.stop) return true;
    }
    return false;
  }
};

inline Wrench disturbance_at(double t, const DisturbanceProfile& profile) {
  Wrench w;
  if (!profile.active(t)) return w;
  for (int i = 0; i < 3; ++i) {
    w.f_ext(i) = profile.channels[i].at(t);
    w.M_ext(i) = profile.channels[i + 3].at(t);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Integration

namespace detail {

// Body-frame inverse of the exponential-map differential, truncated after
// the second-order term (sufficient for a fourth-order Munthe-Kaas step).
inline Vec3 dexp_inv(const Vec3& theta, const Vec3& omega) {
  const Vec3 c = theta.cross(omega);
  return omega + 0.5 * c + theta.cross(c) / 12.0;
}

}  // namespace detail

/// Advances the state by dt with the input held constant. Translation and
/// angular rate use classic RK4; the rotation is advanced as
/// R <- R exp(hat(theta)), theta being the RK4-weighted body rotation
/// increment (Runge-Kutta-Munthe-Kaas), which keeps R on SO(3).
template <std::invocable<double> WrenchFn>
RigidBodyState integrate_step(const RigidBodyState& s, const ControlInput& u, WrenchFn&& w_fn,
                              const QuadParams& p, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_step: dt must be > 0");
  const auto step_index = static_cast<std::size_t>(std::llround(t / dt));

  auto stage = [&](const Vec3& theta, const Vec3& dp, const Vec3& dv, const Vec3& dw) {
    RigidBodyState x;
    x.p = s.p + dp;
    x.v = s.v + dv;
    x.R = s.R * exp_so3(theta);
    x.omega = s.omega + dw;
    return x;
  };

  const Wrench w0 = w_fn(t);
  const Wrench wm = w_fn(t + 0.5 * dt);
  const Wrench w1 = w_fn(t + dt);

  const StateDerivative d1 = dynamics_deriv(s, u, w0, p);
  const Vec3 k1 = s.omega;

  const Vec3 th2 = 0.5 * dt * k1;
  const RigidBodyState s2 = stage(th2, 0.5 * dt * d1.p_dot, 0.5 * dt * d1.v_dot, 0.5 * dt * d1.omega_dot);
  const StateDerivative d2 = dynamics_deriv(s2, u, wm, p);
  const Vec3 k2 = detail::dexp_inv(th2, s2.omega);

  const Vec3 th3 = 0.5 * dt * k2;
  const RigidBodyState s3 = stage(th3, 0.5 * dt * d2.p_dot, 0.5 * dt * d2.v_dot, 0.5 * dt * d2.omega_dot);
  const StateDerivative d3 = dynamics_deriv(s3, u, wm, p);
  const Vec3 k3 = detail::dexp_inv(th3, s3.omega);

  const Vec3 th4 = dt * k3;
  const RigidBodyState s4 = stage(th4, dt * d3.p_dot, dt * d3.v_dot, dt * d3.omega_dot);
  const StateDerivative d4 = dynamics_deriv(s4, u, w1, p);
  const Vec3 k4 = detail::dexp_inv(th4, s4.omega);

  RigidBodyState out;
  out.p = s.p + dt / 6.0 * (d1.p_dot + 2.0 * d2.p_dot + 2.0 * d3.p_dot + d4.p_dot);
  out.v = s.v + dt / 6.0 * (d1.v_dot + 2.0 * d2.v_dot + 2.0 * d3.v_dot + d4.v_dot);
  out.omega = s.omega + dt / 6.0 * (d1.omega_dot + 2.0 * d2.omega_dot + 2.0 * d3.omega_dot + d4.omega_dot);
  out.R = s.R * exp_so3(dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));

  if (!out.finite()) {
    throw IntegrationError("integrate_step: non-finite state", step_index);
  }
  if (dt <= 1e-2 && orthonormality_error(out.R) > 1e-6) {
    throw IntegrationError("integrate_step: rotation left SO(3)", step_index);
  }
  return out;
}

inline RigidBodyState integrate_step(const RigidBodyState& s, const ControlInput& u, const Wrench& w,
                                     const QuadParams& p, double t, double dt) {
  return integrate_step(s, u, [&w](double) { return w; }, p, t, dt);
}

}  // namespace psta
