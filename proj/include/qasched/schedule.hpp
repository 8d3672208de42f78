#pragma once

// Piecewise-linear annealing schedules read off optimised QAOA angles.
// Layer i occupies a time slice of width |gamma_i| + |beta_i|; its supporting
// point sits at the slice midpoint with f = |gamma_i| / (|gamma_i| + |beta_i|).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "qasched/error.hpp"
#include "qasched/format.hpp"
#include "qasched/qaoa.hpp"

namespace qasched {

struct SchedulePoint {
  double t = 0.0;
  double f = 0.0;
  friend bool operator==(const SchedulePoint&, const SchedulePoint&) = default;
};

class Schedule {
 public:
  /// Validates: first point (0,0), last point (T,1), t strictly increasing,
  /// f in [0,1].
  explicit Schedule(std::vector<SchedulePoint> points, QaoaParams source = {})
      : points_(std::move(points)), source_(std::move(source)) {
    if (points_.size() < 2) throw Error(ErrorKind::validation, "a schedule needs at least two points");
    if (points_.front() != SchedulePoint{0.0, 0.0})
      throw Error(ErrorKind::validation, "a schedule starts at (0, 0)");
    if (points_.back().f != 1.0) throw Error(ErrorKind::validation, "a schedule ends at f = 1");
    for (std::size_t k = 0; k < points_.size(); ++k) {
      if (!(points_[k].f >= 0.0 && points_[k].f <= 1.0))
        throw Error(ErrorKind::validation, "schedule value outside [0, 1]");
      if (k > 0 && !(points_[k].t > points_[k - 1].t))
        throw Error(ErrorKind::validation, "schedule times must increase strictly");
    }
  }

  double total_time() const noexcept { return points_.back().t; }
  const std::vector<SchedulePoint>& points() const noexcept { return points_; }
  /// The angles the schedule was derived from, signs included.
  const QaoaParams& source() const noexcept { return source_; }

 private:
  std::vector<SchedulePoint> points_;
  QaoaParams source_;
};

inline Schedule derive_schedule(const QaoaParams& params) {
  params.validate();
  std::vector<SchedulePoint> points{{0.0, 0.0}};
  double elapsed = 0.0;
  for (std::size_t i = 0; i < params.layers(); ++i) {
    const double g = std::abs(params.gamma[i]);
    const double b = std::abs(params.beta[i]);
    const double width = g + b;
    if (width == 0.0) continue;
    points.push_back({elapsed + 0.5 * width, g / width});
    elapsed += width;
  }
  if (elapsed == 0.0) throw Error(ErrorKind::degenerate, "all QAOA angles are zero");
  points.push_back({elapsed, 1.0});
  return Schedule(std::move(points), params);
}

inline double sample(const Schedule& schedule, double t) {
  const auto& pts = schedule.points();
  if (!(t >= 0.0 && t <= schedule.total_time()))
    throw Error(ErrorKind::range, "time outside [0, T]");
  auto hi = std::lower_bound(pts.begin(), pts.end(), t,
                             [](const SchedulePoint& p, double value) { return p.t < value; });
  if (hi->t == t) return hi->f;
  auto lo = hi - 1;
  const double w = (t - lo->t) / (hi->t - lo->t);
  return lo->f + w * (hi->f - lo->f);
}

struct DwellComparison {
  double dwell_fraction = 0.0;   // share of T with f(t) >= threshold
  double linear_fraction = 0.0;  // the same for the linear ramp, 1 - threshold
};

inline DwellComparison linear_dwell_comparison(const Schedule& schedule, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw Error(ErrorKind::range, "threshold must lie in (0, 1)");
  const auto& pts = schedule.points();
  double above = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const auto& a = pts[k - 1];
    const auto& b = pts[k];
    const double len = b.t - a.t;
    const bool a_up = a.f >= threshold;
    const bool b_up = b.f >= threshold;
    if (a_up && b_up) {
      above += len;
    } else if (a_up != b_up) {
      const double cross = (threshold - a.f) / (b.f - a.f);  // in (0, 1]
      above += a_up ? cross * len : (1.0 - cross) * len;
    }
  }
  return {above / schedule.total_time(), 1.0 - threshold};
}

/// max_t |f(t) - t/T|. The difference is piecewise linear, so the maximum
/// sits on a supporting point.
inline double max_linear_deviation(const Schedule& schedule) {
  double worst = 0.0;
  const double total = schedule.total_time();
  for (const auto& p : schedule.points()) worst = std::max(worst, std::abs(p.f - p.t / total));
  return worst;
}

inline std::string schedule_csv(const Schedule& schedule) {
  std::string out = "t,f\n";
  for (const auto& p : schedule.points()) out += format_real(p.t) + ',' + format_real(p.f) + '\n';
  return out;
}

inline nlohmann::json to_json(const Schedule& schedule) {
  nlohmann::json t = nlohmann::json::array(), f = nlohmann::json::array();
  for (const auto& p : schedule.points()) {
    t.push_back(p.t);
    f.push_back(p.f);
  }
  std::vector<int> gamma_sign, beta_sign;
  for (double g : schedule.source().gamma) gamma_sign.push_back(g > 0 ? 1 : (g < 0 ? -1 : 0));
  for (double b : schedule.source().beta) beta_sign.push_back(b > 0 ? 1 : (b < 0 ? -1 : 0));
  return {{"total_time", schedule.total_time()},
          {"t", t},
          {"f", f},
          {"gamma", schedule.source().gamma},
          {"beta", schedule.source().beta},
          {"gamma_sign", gamma_sign},
          {"beta_sign", beta_sign}};
}

}  // namespace qasched
