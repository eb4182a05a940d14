#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "psta/simulation.hpp"

namespace psta {

struct TimeWindow {
  double start = 0.0;  // exclusive
  double stop = 0.0;   // inclusive
};

struct MetricsOptions {
  /// Tracking-error window. Default: t > 20% of the final log time.
  std::optional<TimeWindow> window;
  /// Chattering window. Default: the final quarter of the run.
  std::optional<TimeWindow> chatter_window;
  double settling_band = 0.05;  // fraction of the initial position error
};

struct MetricsReport {
  Vec3 rmse = Vec3::Zero();           // [m]
  Vec3 max_abs_error = Vec3::Zero();  // [m]
  double relative_pose_error = 0.0;   // mean |p - p_d| [m]
  Vec3 chattering = Vec3::Zero();     // total variation of M_u per channel [N m]
  double chattering_thrust = 0.0;     // total variation of f_u [N]
  double settling_time = 0.0;         // [s]
  std::size_t samples = 0;
  bool diverged = false;
};

inline MetricsReport compute_metrics(const SimLog& log, const MetricsOptions& opt = {}) {
  if (log.records.empty()) throw std::invalid_argument("compute_metrics: empty log");
  const double t_end = log.records.back().t;
  const TimeWindow win = opt.window.value_or(TimeWindow{0.2 * t_end, t_end});
  const TimeWindow chat = opt.chatter_window.value_or(TimeWindow{0.75 * t_end, t_end});
  auto inside = [](const TimeWindow& w, double t) { return t > w.start && t <= w.stop; };

  MetricsReport m;
  m.diverged = log.diverged;
  Vec3 sq = Vec3::Zero();
  double rpe = 0.0;
  for (const auto& r : log.records) {
    if (!inside(win, r.t)) continue;
    const Vec3 e = r.pos_error;
    sq += e.cwiseAbs2();
    m.max_abs_error = m.max_abs_error.cwiseMax(e.cwiseAbs());
    rpe += e.norm();
    ++m.samples;
  }
  if (m.samples == 0) throw std::invalid_argument("compute_metrics: empty tracking window");
  m.rmse = (sq / static_cast<double>(m.samples)).cwiseSqrt();
  m.relative_pose_error = rpe / static_cast<double>(m.samples);

  // Differences are taken between consecutive samples that both lie in
  // [chat.start, chat.stop].
  for (std::size_t k = 1; k < log.records.size(); ++k) {
    const auto& a = log.records[k - 1];
    const auto& b = log.records[k];
    if (a.t < chat.start || b.t > chat.stop) continue;
    m.chattering += (b.input.M_u - a.input.M_u).cwiseAbs();
    m.chattering_thrust += std::abs(b.input.f_u - a.input.f_u);
  }

  const double band = opt.settling_band * log.records.front().pos_error.norm();
  m.settling_time = 0.0;
  for (auto it = log.records.rbegin(); it != log.records.rend(); ++it) {
    if (it->pos_error.norm() > band) {
      m.settling_time = it->t;
      break;
    }
  }
  return m;
}

}  // namespace psta
