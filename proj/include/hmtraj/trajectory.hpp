#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hmtraj/geometry.hpp"
#include "hmtraj/histogram.hpp"

namespace hmtraj {

/// Position at a time relative to the prediction instant (t = 0 is "now").
struct TimedPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;

  Point2 position() const { return {x, y}; }
  friend bool operator==(const TimedPoint&, const TimedPoint&) = default;
};

/// Ordered track with strictly increasing, finite timestamps.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TimedPoint> points);

  std::span<const TimedPoint> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const TimedPoint& front() const { return points_.front(); }
  const TimedPoint& back() const { return points_.back(); }
  const TimedPoint& operator[](std::size_t i) const { return points_[i]; }

  /// Linear interpolation inside [front().t, back().t].
  Point2 position_at(double t) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::vector<TimedPoint> points_;
};

struct Sample {
  std::string id;
  std::string dataset;
  Trajectory past;    // t <= 0
  Trajectory future;  // t > 0
  std::vector<Trajectory> neighbors;
  bool is_predefined_target = true;
};

struct StandardizationConfig {
  double history_s = 1.0;
  double horizon_s = 3.0;
  double rate_hz = 10.0;

  /// Throws InvalidArgument unless all fields are positive and
  /// rate_hz * horizon_s (and rate_hz * history_s) are whole step counts.
  void validate() const;
  int future_steps() const;
  int past_steps() const;
};

/// Resamples onto t_start, t_start + 1/rate, ..., t_end.
Trajectory resample_trajectory(const Trajectory& traj, double rate_hz, double t_start,
                               double t_end);

/// Past and future concatenated into one track.
Trajectory full_track(const Sample& s);

Sample standardize_sample(const Sample& s, const StandardizationConfig& cfg);

/// Displacement between t = 0 and the last future point, divided by the horizon.
double average_speed(const Sample& s);

Histogram speed_histogram(std::span<const Sample> samples, double bin_width);

/// Rotates every position about the target's t = 0 position.
Sample rotate_sample(const Sample& s, double angle);

/// Keeps every predefined target and promotes each eligible non-target agent
/// with probability `include_non_targets`. A neighbor is eligible when it
/// spans the target's full past/future window. Draws are counter-based on
/// (seed, sample id, neighbor slot), so output is independent of order.
std::vector<Sample> filter_slow_agents(std::span<const Sample> samples,
                                       double include_non_targets, std::uint64_t seed);

}  // namespace hmtraj
