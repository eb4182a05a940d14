#pragma once

// Proxy-based super-twisting algorithm, implicit Euler step.
//
// The proxy velocity a2 is driven so that the proxy sliding variable
// a2 + H*da2/dt follows the plant sliding variable sigma through a
// conditional super-twisting law; the control is the PD coupling
// u = K*a2 + B*da2/dt saturated to [-F, F]. Set-valued sign terms are
// evaluated at the new step and resolved in closed form by interval
// projections, so a constant sigma drives u to an exact fixed point
// instead of a discrete limit cycle.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "psta/errors.hpp"
#include "psta/scalar.hpp"

namespace psta {

struct PstaGains {
  double B = 1.0;   // derivative gain
  double K = 1.0;   // proportional gain
  double H = 0.1;   // convergence-rate constant [s]
  double F1 = 1.0;  // square-root correction gain
  double F2 = 1.0;  // integral correction gain
  double F = 1.0;   // saturation level
  double h = 1e-3;  // step size [s]

  double c() const { return K / B; }
  double kappa1() const { return F1 / B; }
  double kappa2() const { return F2 / B; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string("PstaGains.") + name + " must be finite and > 0");
      }
    };
    positive(B, "B");
    positive(K, "K");
    positive(H, "H");
    positive(F1, "F1");
    positive(F2, "F2");
    positive(F, "F");
    positive(h, "h");
    if (!std::isfinite(c()) || !std::isfinite(kappa1()) || !std::isfinite(kappa2())) {
      throw std::invalid_argument("PstaGains: derived ratios K/B, F1/B, F2/B must be finite");
    }
  }
};

struct PstaState {
  double a2 = 0.0;  // proxy velocity at the previous step
  double v = 0.0;   // super-twisting integral state at the previous step
};

struct PstaDiagnostics {
  double rho = 0.0;     // free value of y (no sign term)
  double kappa3 = 0.0;  // half-width of the projection interval
  double y = 0.0;       // (H+h) a2_k - (h sigma_k + H a2_{k-1}), recomputed from the new state
  double y_tol = 0.0;   // rounding allowance for |y| <= |rho|
  double u_unsat = 0.0;
  bool saturated = false;

  bool projection_identity_holds() const { return std::abs(y) <= std::abs(rho) + y_tol; }
};

struct PstaStep {
  double u = 0.0;
  PstaState next;
  PstaDiagnostics diag;
};

/// One implicit-Euler step. Throws NonFiniteError on non-finite input or
/// result; gains are assumed validated.
inline PstaStep psta_step(const PstaGains& g, const PstaState& s, double sigma) {
  if (!std::isfinite(sigma) || !std::isfinite(s.a2) || !std::isfinite(s.v)) {
    throw NonFiniteError("psta_step: non-finite sigma or state");
  }
  const double h = g.h;
  const double H = g.H;
  const double lambda1 = (H + h) / (1.0 + h * g.c());
  const double lambda2 = 1.0 / (H + h);
  const double drive = h * sigma + H * s.a2;

  const double rho = lambda1 * (s.a2 + h * s.v) - drive;
  const double kappa3 = lambda1 * (g.kappa1() * std::sqrt(std::abs(rho)) + h * g.kappa2());
  const double z = drive + rho;
  const double p = proj_interval(rho, kappa3);
  const double a2 = lambda2 * z - lambda2 * p;

  const double u_unsat = g.K * a2 + g.B * (a2 - s.a2) / h;

  PstaStep out;
  out.diag.rho = rho;
  out.diag.kappa3 = kappa3;
  out.diag.u_unsat = u_unsat;
  out.next.a2 = a2;
  if (std::abs(u_unsat) <= g.F) {
    // kappa2/kappa3 * Proj_B(rho) == kappa2 * clamp(rho/kappa3, -1, 1)
    out.next.v = s.v - g.kappa2() * proj_ratio(rho, kappa3);
  } else {
    const double u_star = proj_interval(u_unsat, g.F);
    out.next.v = s.v - proj_interval(s.v - u_star / g.B, h * g.kappa2());
    out.diag.saturated = true;
  }
  out.u = proj_interval(u_unsat, g.F);

  out.diag.y = (H + h) * a2 - drive;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  out.diag.y_tol = 8.0 * eps * (std::abs(drive) + (H + h) * std::abs(a2) + std::abs(z));

  if (!std::isfinite(out.u) || !std::isfinite(a2) || !std::isfinite(out.next.v)) {
    throw NonFiniteError("psta_step: non-finite result");
  }
  return out;
}

/// Stateful single-axis PSTA controller. A NonFiniteError poisons the
/// instance; further steps throw ControllerPoisoned until reset().
class PstaAxis {
 public:
  PstaAxis() = default;
  explicit PstaAxis(const PstaGains& gains) : gains_(gains) { gains_.validate(); }

  double step(double sigma) {
    if (poisoned_) throw ControllerPoisoned();
    try {
      last_ = psta_step(gains_, state_, sigma);
    } catch (const NonFiniteError&) {
      poisoned_ = true;
      throw;
    }
    state_ = last_.next;
    if (!last_.diag.projection_identity_holds()) ++identity_violations_;
    return last_.u;
  }

  void reset(PstaState s = {}) {
    state_ = s;
    poisoned_ = false;
    last_ = {};
  }

  const PstaGains& gains() const { return gains_; }
  const PstaState& state() const { return state_; }
  const PstaStep& last() const { return last_; }
  bool poisoned() const { return poisoned_; }
  long identity_violations() const { return identity_violations_; }

 private:
  PstaGains gains_;
  PstaState state_;
  PstaStep last_;
  bool poisoned_ = false;
  long identity_violations_ = 0;
};

}  // namespace psta
