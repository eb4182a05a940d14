#pragma once

// Reference solvers used to check the closed-form kernels. They work on the
// discrete equations in residual form and find roots by bisection; they do
// not share code paths with psta_step / psmc_step beyond the gain ratios.

#include <cmath>
#include <functional>

#include "psta/baselines.hpp"
#include "psta/psta_kernel.hpp"

namespace psta::oracle {

/// Root of a nondecreasing (possibly discontinuous) function on [lo, hi]
/// by bisection, to the limit of double resolution.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Expands [x0 - w, x0 + w] until f changes sign over it.
inline std::pair<double, double> bracket(const std::function<double(double)>& f, double x0) {
  double w = 1.0 + std::abs(x0);
  for (int i = 0; i < 200; ++i) {
    if (f(x0 - w) < 0.0 && f(x0 + w) > 0.0) return {x0 - w, x0 + w};
    w *= 2.0;
  }
  return {x0 - w, x0 + w};
}

/// Solves  A*x - b + W*s = 0,  s in Sgn(x - x_switch), for x and the
/// selection s. A > 0, W >= 0: the residual is monotone in x.
struct SignInclusionSolution {
  double x = 0.0;
  double s = 0.0;
};

inline SignInclusionSolution solve_sign_inclusion(double A, double b, double W, double x_switch) {
  const double at_switch = A * x_switch - b;
  SignInclusionSolution sol;
  if (at_switch - W <= 0.0 && at_switch + W >= 0.0) {
    sol.x = x_switch;
    sol.s = (W > 0.0) ? -at_switch / W : 0.0;
    return sol;
  }
  auto residual = [&](double x) {
    const double s = (x > x_switch) ? 1.0 : ((x < x_switch) ? -1.0 : 0.0);
    return A * x - b + W * s;
  };
  const auto [lo, hi] = (at_switch + W < 0.0) ? std::pair{x_switch, bracket(residual, x_switch).second}
                                              : std::pair{bracket(residual, x_switch).first, x_switch};
  sol.x = bisect(residual, lo, hi);
  sol.s = (at_switch + W < 0.0) ? 1.0 : -1.0;
  return sol;
}

struct PstaOracleResult {
  double u = 0.0;
  double a2 = 0.0;
  double v = 0.0;
  double y = 0.0;
  double rho = 0.0;
  double s = 0.0;  // sign selection in the unsaturated v update
  bool saturated = false;
};

/// Discrete PSTA step from its defining equations:
///   (1 + h c) a2 = a2_prev + h v - kappa1 |rho|^(1/2) s,
///   v = v_prev - kappa2 s,            s in Sgn(y(a2)),
///   y(a2) = (H + h) a2 - (h sigma + H a2_prev),
/// with rho the value of y when the sign term is absent. When
/// |K a2 + B (a2 - a2_prev)/h| > F the v update is replaced by
///   v in v_prev + h kappa2 Sgn(u*/B - v).
inline PstaOracleResult psta_step(const PstaGains& g, const PstaState& st, double sigma) {
  const double h = g.h, H = g.H;
  const double A = 1.0 + h * g.c();
  const double drive = h * sigma + H * st.a2;
  auto y_of = [&](double a2) { return (H + h) * a2 - drive; };

  PstaOracleResult r;
  const double a2_free = (st.a2 + h * st.v) / A;
  r.rho = y_of(a2_free);
  const double W = g.kappa1() * std::sqrt(std::abs(r.rho)) + h * g.kappa2();
  const double a2_switch = drive / (H + h);

  const auto sol = solve_sign_inclusion(A, st.a2 + h * st.v, W, a2_switch);
  r.a2 = sol.x;
  r.s = sol.s;
  r.y = y_of(r.a2);

  const double u_unsat = g.K * r.a2 + g.B * (r.a2 - st.a2) / h;
  if (std::abs(u_unsat) <= g.F) {
    r.v = st.v - g.kappa2() * r.s;
    r.u = u_unsat;
    return r;
  }
  r.saturated = true;
  const double u_star = std::copysign(g.F, u_unsat);
  const double c = u_star / g.B;
  const double at_c = c - st.v;
  const double w = h * g.kappa2();
  if (at_c >= -w && at_c <= w) {
    r.v = c;
  } else {
    // Off the switching point the residual v - v_prev - w * sign(c - v) is
    // strictly increasing; bisect it.
    auto residual = [&](double v) {
      const double s = (c > v) ? 1.0 : ((c < v) ? -1.0 : 0.0);
      return v - st.v - w * s;
    };
    const auto [lo, hi] = bracket(residual, st.v);
    r.v = bisect(residual, lo, hi);
  }
  r.u = u_star;
  return r;
}

struct PsmcOracleResult {
  double u = 0.0;
  double a2 = 0.0;
};

/// (1 + h K/B) a2 = a2_prev - h (F/B) s,  s in Sgn(y(a2)).
inline PsmcOracleResult psmc_step(const PsmcGains& g, const PsmcState& st, double sigma) {
  const double h = g.h;
  const double A = 1.0 + h * g.K / g.B;
  const double a2_switch = (h * sigma + g.H * st.a2) / (g.H + h);
  const auto sol = solve_sign_inclusion(A, st.a2, h * g.F / g.B, a2_switch);
  PsmcOracleResult r;
  r.a2 = sol.x;
  r.u = g.K * r.a2 + g.B * (r.a2 - st.a2) / h;
  return r;
}

/// Continuous-time PSTA on its sliding manifold for sigma(t) = sin(w t),
/// a2(0) = 0: the proxy obeys H da2/dt + a2 = sigma and u = K a2 + B da2/dt.
struct SlidingSolution {
  double a2 = 0.0;
  double a2_dot = 0.0;
  double u = 0.0;
};

inline SlidingSolution sliding_sine_response(double t, double w, double H, double K, double B) {
  const double k = 1.0 + H * H * w * w;
  SlidingSolution s;
  s.a2 = (std::sin(w * t) - H * w * std::cos(w * t) + H * w * std::exp(-t / H)) / k;
  s.a2_dot = (std::sin(w * t) - s.a2) / H;
  s.u = K * s.a2 + B * s.a2_dot;
  return s;
}

}  // namespace psta::oracle
