#pragma once

// Built-in correctness suites: kernel-vs-oracle equivalence, the projection
// identity, discrete inclusion consistency and plant rotation integrity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "psta/oracle.hpp"
#include "psta/psta_kernel.hpp"
#include "psta/quad_dynamics.hpp"

namespace psta::validation {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Draw of (gains, state, sigma) with gains log-uniform in [1e-2, 1e2] and
/// h log-uniform in [1e-4, 1e-1].
struct PstaDraw {
  PstaGains gains;
  PstaState state;
  double sigma = 0.0;
};

class DrawGenerator {
 public:
  explicit DrawGenerator(std::uint64_t seed) : rng_(seed) {}

  PstaDraw next() {
    PstaDraw d;
    d.gains.B = log_uniform(1e-2, 1e2);
    d.gains.K = log_uniform(1e-2, 1e2);
    d.gains.H = log_uniform(1e-2, 1e2);
    d.gains.F1 = log_uniform(1e-2, 1e2);
    d.gains.F2 = log_uniform(1e-2, 1e2);
    d.gains.F = log_uniform(1e-2, 1e2);
    d.gains.h = log_uniform(1e-4, 1e-1);
    d.state.a2 = signed_scale();
    d.state.v = signed_scale();
    d.sigma = signed_scale();
    return d;
  }

  double log_uniform(double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng_));
  }

  // sign * 10^U(-3, 1), occasionally exactly zero
  double signed_scale() {
    std::uniform_int_distribution<int> pick(0, 19);
    if (pick(rng_) == 0) return 0.0;
    std::uniform_real_distribution<double> e(-3.0, 1.0);
    const double mag = std::pow(10.0, e(rng_));
    return (pick(rng_) % 2 == 0) ? mag : -mag;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

/// psta_step against the bisection oracle on `draws` random inputs.
inline SuiteResult oracle_equivalence(int draws, std::uint64_t seed = 20240601, double tol = 1e-9) {
  DrawGenerator gen(seed);
  int failures = 0, saturated = 0, dead_zone = 0;
  double worst = 0.0;
  std::ostringstream first;
  for (int i = 0; i < draws; ++i) {
    const PstaDraw d = gen.next();
    const PstaStep got = psta_step(d.gains, d.state, d.sigma);
    const oracle::PstaOracleResult ref = oracle::psta_step(d.gains, d.state, d.sigma);
    saturated += ref.saturated ? 1 : 0;
    dead_zone += (std::abs(ref.s) < 1.0) ? 1 : 0;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    worst = std::max({worst, rel(got.u, ref.u), rel(got.next.a2, ref.a2), rel(got.next.v, ref.v)});
    if (!close(got.u, ref.u, tol) || !close(got.next.a2, ref.a2, tol) || !close(got.next.v, ref.v, tol)) {
      if (failures++ == 0) {
        first << " first mismatch at draw " << i << ": u " << got.u << " vs " << ref.u << ", a2 " << got.next.a2
              << " vs " << ref.a2 << ", v " << got.next.v << " vs " << ref.v;
      }
    }
  }
  std::ostringstream os;
  os << draws << " draws (" << saturated << " saturated, " << dead_zone << " in the projection interior), worst rel. diff "
     << worst << ", failures " << failures << first.str();
  return {"oracle-equivalence", failures == 0, os.str()};
}

/// |y_k| <= |rho_{k-1}| along random step sequences.
inline SuiteResult projection_identity(int sequences, int steps, std::uint64_t seed = 7) {
  DrawGenerator gen(seed);
  long checks = 0, violations = 0;
  for (int s = 0; s < sequences; ++s) {
    PstaDraw d = gen.next();
    PstaState st = d.state;
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int k = 0; k < steps; ++k) {
      const double sigma = d.sigma + 0.1 * std::abs(d.sigma) * noise(gen.engine());
      const PstaStep r = psta_step(d.gains, st, sigma);
      ++checks;
      if (!r.diag.projection_identity_holds()) ++violations;
      st = r.next;
    }
  }
  std::ostringstream os;
  os << checks << " steps, " << violations << " violations";
  return {"projection-identity", violations == 0, os.str()};
}

/// Substitutes each returned (a2, v) back into the discrete equations the
/// step solves: the a2 balance, and membership of the v increment.
inline SuiteResult inclusion_consistency(int draws, std::uint64_t seed = 11, double tol = 1e-9) {
  DrawGenerator gen(seed);
  int failures = 0, checked = 0;
  double worst = 0.0;
  for (int i = 0; i < draws; ++i) {
    const PstaDraw d = gen.next();
    const PstaGains& g = d.gains;
    const PstaStep r = psta_step(g, d.state, d.sigma);
    if (r.diag.saturated) continue;
    ++checked;
    const double h = g.h;
    // selection implied by the v update
    const double s = (d.state.v - r.next.v) / g.kappa2();
    const double y = r.diag.y;
    const bool selection_ok = std::abs(s) <= 1.0 + 1e-12 &&
                              (std::abs(y) <= r.diag.y_tol || std::abs(s - sign(y)) <= 1e-9);
    const double lhs = (1.0 + h * g.c()) * r.next.a2;
    const double rhs = d.state.a2 + h * r.next.v - g.kappa1() * std::sqrt(std::abs(r.diag.rho)) * s;
    const double balance = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
    worst = std::max(worst, balance);
    if (!selection_ok || balance > tol) ++failures;
  }
  std::ostringstream os;
  os << checked << " unsaturated steps, worst a2-balance residual " << worst << ", failures " << failures;
  return {"inclusion-consistency", failures == 0, os.str()};
}

/// 1e5 plant steps at dt = 1e-3 with bounded, varying inputs.
inline SuiteResult rotation_integrity(long steps = 100000, double dt = 1e-3, double tol = 1e-6) {
  QuadParams p;
  p.m = 3.81;
  p.J = Vec3(0.1, 0.12, 0.15);
  RigidBodyState s;
  s.omega = Vec3(0.3, -0.2, 0.5);
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    ControlInput u;
    u.f_u = p.m * p.g;
    u.M_u = 0.01 * Vec3(std::sin(t), std::cos(1.3 * t), std::sin(0.7 * t));
    s = integrate_step(s, u, Wrench{}, p, t, dt);
    s.p.setZero();  // keep translation bounded; only the rotation matters here
    s.v.setZero();
  }
  const double err = orthonormality_error(s.R);
  std::ostringstream os;
  os << steps << " steps, ||R^T R - I||_F = " << err << ", det = " << s.R.determinant();
  return {"rotation-integrity", err <= tol && std::abs(s.R.determinant() - 1.0) <= tol, os.str()};
}

inline std::vector<SuiteResult> run_all(int draws = 10000) {
  return {oracle_equivalence(draws), projection_identity(100, 500), inclusion_consistency(draws),
          rotation_integrity()};
}

}  // namespace psta::validation
