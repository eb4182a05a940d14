#pragma once

// Baseline sliding-mode kernels: proxy-based first-order SMC (implicit
// Euler, chattering-free) and an explicit boundary-layer SMC.

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "psta/errors.hpp"
#include "psta/scalar.hpp"

namespace psta {

struct PsmcGains {
  double K = 1.0;
  double B = 1.0;
  double H = 0.1;
  double F = 1.0;
  double h = 1e-3;

  void validate() const {
    for (auto [v, name] : {std::pair{K, "K"}, {B, "B"}, {H, "H"}, {F, "F"}, {h, "h"}}) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string("PsmcGains.") + name + " must be finite and > 0");
      }
    }
  }
};

struct PsmcState {
  double a1 = 0.0;  // proxy position
  double a2 = 0.0;  // proxy velocity
};

struct PsmcStep {
  double u = 0.0;
  PsmcState next;
};

/// One implicit-Euler step of  da2/dt = -(K/B) a2 + (F/B) sgn(sigma - a2 - H da2/dt).
/// The sign is taken at the new step and resolved by projection onto
/// [-lambda1 h F/B, lambda1 h F/B]; |u| <= F by construction.
inline PsmcStep psmc_step(const PsmcGains& g, const PsmcState& s, double sigma) {
  if (!std::isfinite(sigma) || !std::isfinite(s.a1) || !std::isfinite(s.a2)) {
    throw NonFiniteError("psmc_step: non-finite sigma or state");
  }
  const double h = g.h;
  const double lambda1 = (g.H + h) / (1.0 + h * g.K / g.B);
  const double lambda2 = 1.0 / (g.H + h);
  const double rho = lambda1 * s.a2 - (h * sigma + g.H * s.a2);
  const double width = lambda1 * h * g.F / g.B;

  PsmcStep out;
  out.next.a2 = lambda2 * (lambda1 * s.a2 - proj_interval(rho, width));
  out.next.a1 = s.a1 + h * out.next.a2;
  // On the projection boundary K a2 + B da2 reduces to -F sign(rho) exactly;
  // take that value rather than the rounded expression.
  out.u = (std::abs(rho) >= width) ? -g.F * sign(rho)
                                   : proj_interval(g.K * out.next.a2 + g.B * (out.next.a2 - s.a2) / h, g.F);
  if (!std::isfinite(out.u) || !std::isfinite(out.next.a2)) {
    throw NonFiniteError("psmc_step: non-finite result");
  }
  return out;
}

struct SmcGains {
  double lambda = 0.0;          // sigma_dot damping
  double eta = 1.0;             // switching gain
  double F = 1.0;               // output saturation
  double h = 1e-3;              // step size, used by callers that difference sigma
  double boundary_layer = 0.0;  // 0 selects the pure sign function

  void validate() const {
    if (!(lambda >= 0.0) || !(eta > 0.0) || !(F > 0.0) || !(h > 0.0) || !(boundary_layer >= 0.0)) {
      throw std::invalid_argument("SmcGains: require lambda >= 0, eta > 0, F > 0, h > 0, boundary_layer >= 0");
    }
  }
};

/// Explicit first-order SMC, u = -lambda*sigma_dot - eta*sat(sigma/phi),
/// saturated at F. sigma is taken as (actual - desired).
inline double smc_step(const SmcGains& g, double sigma, double sigma_dot) {
  const double sw = (g.boundary_layer > 0.0) ? proj_interval(sigma / g.boundary_layer, 1.0) : sign(sigma);
  return proj_interval(-g.lambda * sigma_dot - g.eta * sw, g.F);
}

}  // namespace psta
