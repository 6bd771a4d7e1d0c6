#include "hmtraj/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "hmtraj/error.hpp"
#include "hmtraj/numeric.hpp"

namespace hmtraj {

namespace {

constexpr double kTimeTol = 1e-9;

bool is_whole(double v) { return std::abs(v - std::round(v)) < 1e-9; }

// Neighbors are carried over the standardized window as far as their span
// allows, clipped to the last grid time they still cover.
std::optional<Trajectory> standardize_neighbor(const Trajectory& n,
                                               const StandardizationConfig& cfg) {
  if (n.size() < 2) return std::nullopt;
  if (n.front().t > -cfg.history_s + kTimeTol || n.back().t < -kTimeTol) return std::nullopt;
  const double last = std::min(n.back().t, cfg.horizon_s);
  const auto steps = static_cast<long>(std::floor((last + cfg.history_s) * cfg.rate_hz + kTimeTol));
  const double t_end = -cfg.history_s + static_cast<double>(steps) / cfg.rate_hz;
  return resample_trajectory(n, cfg.rate_hz, -cfg.history_s, t_end);
}

std::vector<TimedPoint> rotated(std::span<const TimedPoint> pts, Point2 pivot, double angle) {
  std::vector<TimedPoint> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    const Point2 q = rotate_about(p.position(), pivot, angle);
    out.push_back({p.t, q.x, q.y});
  }
  return out;
}

}  // namespace

Trajectory::Trajectory(std::vector<TimedPoint> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!std::isfinite(p.t) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("trajectory point {} is not finite", i));
    }
    if (i > 0 && !(p.t > points_[i - 1].t)) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("trajectory timestamps not strictly increasing at point {}", i));
    }
  }
}

Point2 Trajectory::position_at(double t) const {
  if (points_.size() < 2) {
    throw Error(ErrorKind::Degenerate, "interpolation needs at least 2 points");
  }
  if (t < points_.front().t - kTimeTol || t > points_.back().t + kTimeTol) {
    throw Error(ErrorKind::Coverage, fmt::format("time {} outside trajectory span [{}, {}]", t,
                                                 points_.front().t, points_.back().t));
  }
  // First point strictly after t; the bracketing segment is [it - 1, it].
  auto it = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double v, const TimedPoint& p) { return v < p.t; });
  if (it == points_.begin()) return points_.front().position();
  if (it == points_.end()) return points_.back().position();
  const TimedPoint& a = *(it - 1);
  const TimedPoint& b = *it;
  const double alpha = (t - a.t) / (b.t - a.t);
  return {a.x + alpha * (b.x - a.x), a.y + alpha * (b.y - a.y)};
}

void StandardizationConfig::validate() const {
  if (!(history_s > 0.0) || !(horizon_s > 0.0) || !(rate_hz > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "history_s, horizon_s and rate_hz must be positive");
  }
  if (!is_whole(rate_hz * horizon_s) || !is_whole(rate_hz * history_s)) {
    throw Error(ErrorKind::InvalidArgument,
                "rate_hz * horizon_s and rate_hz * history_s must be whole step counts");
  }
}

int StandardizationConfig::future_steps() const {
  return static_cast<int>(std::lround(rate_hz * horizon_s));
}

int StandardizationConfig::past_steps() const {
  return static_cast<int>(std::lround(rate_hz * history_s)) + 1;
}

Trajectory resample_trajectory(const Trajectory& traj, double rate_hz, double t_start,
                               double t_end) {
  if (!(rate_hz > 0.0)) throw Error(ErrorKind::InvalidArgument, "rate_hz must be positive");
  if (traj.size() < 2) {
    throw Error(ErrorKind::Degenerate, "resampling needs at least 2 points");
  }
  if (t_end < t_start) throw Error(ErrorKind::InvalidArgument, "t_end before t_start");
  if (traj.front().t > t_start + kTimeTol || traj.back().t < t_end - kTimeTol) {
    throw Error(ErrorKind::Coverage,
                fmt::format("trajectory span [{}, {}] does not cover [{}, {}]", traj.front().t,
                            traj.back().t, t_start, t_end));
  }
  const long count = std::lround((t_end - t_start) * rate_hz) + 1;
  std::vector<TimedPoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    const double t = (i == count - 1 && count > 1) ? t_end
                                                   : t_start + static_cast<double>(i) / rate_hz;
    const Point2 p = traj.position_at(t);
    out.push_back({t, p.x, p.y});
  }
  return Trajectory(std::move(out));
}

Trajectory full_track(const Sample& s) {
  std::vector<TimedPoint> pts(s.past.points().begin(), s.past.points().end());
  pts.insert(pts.end(), s.future.points().begin(), s.future.points().end());
  return Trajectory(std::move(pts));
}

Sample standardize_sample(const Sample& s, const StandardizationConfig& cfg) {
  cfg.validate();
  if (s.past.size() < 2 || s.past.front().t > -cfg.history_s + kTimeTol) {
    throw Error(ErrorKind::Coverage,
                fmt::format("sample '{}': past too short, need {} s of history", s.id,
                            cfg.history_s));
  }
  if (s.past.back().t < -kTimeTol) {
    throw Error(ErrorKind::Coverage,
                fmt::format("sample '{}': past does not reach t = 0", s.id));
  }
  if (s.future.empty() || s.future.back().t < cfg.horizon_s - kTimeTol) {
    throw Error(ErrorKind::Coverage,
                fmt::format("sample '{}': future too short, need {} s of horizon", s.id,
                            cfg.horizon_s));
  }

  const Trajectory track = full_track(s);
  Sample out;
  out.id = s.id;
  out.dataset = s.dataset;
  out.is_predefined_target = s.is_predefined_target;
  out.past = resample_trajectory(track, cfg.rate_hz, -cfg.history_s, 0.0);
  out.future = resample_trajectory(track, cfg.rate_hz, 1.0 / cfg.rate_hz, cfg.horizon_s);
  for (const auto& n : s.neighbors) {
    if (auto r = standardize_neighbor(n, cfg)) out.neighbors.push_back(std::move(*r));
  }
  return out;
}

double average_speed(const Sample& s) {
  if (s.past.empty() || s.future.empty()) {
    throw Error(ErrorKind::InvalidArgument, "average_speed needs past and future");
  }
  const double horizon = s.future.back().t;
  return distance(s.future.back().position(), s.past.back().position()) / horizon;
}

Histogram speed_histogram(std::span<const Sample> samples, double bin_width) {
  std::vector<double> speeds;
  speeds.reserve(samples.size());
  for (const auto& s : samples) speeds.push_back(average_speed(s));
  return make_histogram(speeds, bin_width);
}

Sample rotate_sample(const Sample& s, double angle) {
  const Point2 pivot = s.past.back().position();
  Sample out = s;
  out.past = Trajectory(rotated(s.past.points(), pivot, angle));
  out.future = Trajectory(rotated(s.future.points(), pivot, angle));
  for (std::size_t i = 0; i < s.neighbors.size(); ++i) {
    out.neighbors[i] = Trajectory(rotated(s.neighbors[i].points(), pivot, angle));
  }
  return out;
}

std::vector<Sample> filter_slow_agents(std::span<const Sample> samples,
                                       double include_non_targets, std::uint64_t seed) {
  if (!(include_non_targets >= 0.0 && include_non_targets <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "include_non_targets must lie in [0, 1]");
  }
  auto draw = [&](const std::string& id, std::uint64_t slot) {
    const std::uint64_t bits = mix64(mix64(seed ^ stable_hash(id)) + slot);
    return unit_from_bits(bits) < include_non_targets;
  };

  std::vector<Sample> out;
  for (const auto& s : samples) {
    if (!s.is_predefined_target) {
      if (draw(s.id, 0)) out.push_back(s);
      continue;
    }
    out.push_back(s);
    if (s.past.empty() || s.future.empty()) continue;
    const double t0 = s.past.front().t;
    const double t1 = s.future.back().t;
    for (std::size_t j = 0; j < s.neighbors.size(); ++j) {
      const Trajectory& n = s.neighbors[j];
      if (n.empty() || n.front().t > t0 + kTimeTol || n.back().t < t1 - kTimeTol) continue;
      if (!draw(s.id, j + 1)) continue;

      std::vector<TimedPoint> past;
      std::vector<TimedPoint> future;
      for (const auto& p : n.points()) (p.t <= 0.0 ? past : future).push_back(p);
      if (past.empty() || future.empty()) continue;

      Sample promoted;
      promoted.id = fmt::format("{}/agent{}", s.id, j);
      promoted.dataset = s.dataset;
      promoted.past = Trajectory(std::move(past));
      promoted.future = Trajectory(std::move(future));
      promoted.is_predefined_target = false;
      promoted.neighbors.push_back(full_track(s));
      for (std::size_t m = 0; m < s.neighbors.size(); ++m) {
        if (m != j) promoted.neighbors.push_back(s.neighbors[m]);
      }
      out.push_back(std::move(promoted));
    }
  }
  return out;
}

}  // namespace hmtraj
