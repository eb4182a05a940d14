#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <variant>
#include <vector>

#include "psta/cascade.hpp"

namespace psta {

/// center + radius * (cos wt, sin wt, 0), w = 2 pi f
struct CircleTrajectory {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  double frequency = 0.1;
};

/// offset + cos_amplitude * cos(wt) + sin_amplitude * sin(wt)
struct EllipseTrajectory {
  Vec3 offset = Vec3::Zero();
  Vec3 cos_amplitude = Vec3::Zero();
  Vec3 sin_amplitude = Vec3::Zero();
  double frequency = 0.2;
};

struct SetpointTrajectory {
  Vec3 position = Vec3::Zero();
};

/// Piecewise-linear through (t, position) samples; held constant outside
/// the sampled range.
struct TableTrajectory {
  std::vector<double> t;
  std::vector<Vec3> position;
};

struct Trajectory {
  std::variant<CircleTrajectory, EllipseTrajectory, SetpointTrajectory, TableTrajectory> shape =
      SetpointTrajectory{};
  double yaw = 0.0;       // [rad] at t = 0
  double yaw_rate = 0.0;  // [rad/s]

  void validate() const {
    if (const auto* tab = std::get_if<TableTrajectory>(&shape)) {
      if (tab->t.empty() || tab->t.size() != tab->position.size()) {
        throw std::invalid_argument("table trajectory needs matching, non-empty t and position lists");
      }
      if (!std::is_sorted(tab->t.begin(), tab->t.end()) ||
          std::adjacent_find(tab->t.begin(), tab->t.end()) != tab->t.end()) {
        throw std::invalid_argument("table trajectory times must be strictly increasing");
      }
    }
  }
};

// wrap to (-pi, pi]
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

/// Position and closed-form first derivative of the trajectory at t.
inline ReferenceSample reference_at(double t, const Trajectory& traj) {
  ReferenceSample r;
  r.psi_d = wrap_angle(traj.yaw + traj.yaw_rate * t);
  r.psi_d_dot = traj.yaw_rate;

  struct Visitor {
    double t;
    ReferenceSample& r;
    void operator()(const CircleTrajectory& c) const {
      const double w = 2.0 * std::numbers::pi * c.frequency;
      r.p_d = c.center + c.radius * Vec3(std::cos(w * t), std::sin(w * t), 0.0);
      r.pd_dot = c.radius * w * Vec3(-std::sin(w * t), std::cos(w * t), 0.0);
    }
    void operator()(const EllipseTrajectory& e) const {
      const double w = 2.0 * std::numbers::pi * e.frequency;
      const double cs = std::cos(w * t), sn = std::sin(w * t);
      r.p_d = e.offset + cs * e.cos_amplitude + sn * e.sin_amplitude;
      r.pd_dot = w * (-sn * e.cos_amplitude + cs * e.sin_amplitude);
    }
    void operator()(const SetpointTrajectory& s) const {
      r.p_d = s.position;
      r.pd_dot = Vec3::Zero();
    }
    void operator()(const TableTrajectory& tab) const {
      if (t <= tab.t.front()) {
        r.p_d = tab.position.front();
        return;
      }
      if (t >= tab.t.back()) {
        r.p_d = tab.position.back();
        return;
      }
      const auto it = std::upper_bound(tab.t.begin(), tab.t.end(), t);
      const auto i = static_cast<std::size_t>(it - tab.t.begin());
      const double t0 = tab.t[i - 1], t1 = tab.t[i];
      const Vec3 slope = (tab.position[i] - tab.position[i - 1]) / (t1 - t0);
      r.p_d = tab.position[i - 1] + (t - t0) * slope;
      r.pd_dot = slope;
    }
  };
  std::visit(Visitor{t, r}, traj.shape);
  return r;
}

}  // namespace psta
