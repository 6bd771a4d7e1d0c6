#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "hmtraj/histogram.hpp"
#include "hmtraj/trajectory.hpp"

namespace hmtraj {

struct KalmanConfig {
  double process_accel_std = 1.0;  // m/s^2, white acceleration
  double obs_std = 0.5;            // m, per axis

  void validate() const;
};

struct KalmanOutput {
  Trajectory filtered;
  /// Posterior covariance of [x, y, vx, vy] at every timestamp.
  std::vector<Eigen::Matrix4d> covariances;
};

/// Forward constant-velocity Kalman filter with position-only observations.
/// The state starts at point 0 with the velocity of the first difference;
/// the step time comes from the track itself, which must be uniformly
/// sampled (1e-6 s tolerance) with at least 3 points.
KalmanOutput kalman_filter_cv_detailed(const Trajectory& traj, const KalmanConfig& cfg);

Trajectory kalman_filter_cv(const Trajectory& traj, const KalmanConfig& cfg);

/// Largest distance between a raw point and its filtered counterpart.
double perception_noise(const Trajectory& traj, const KalmanConfig& cfg);

/// perception_noise of each sample's past + future track.
std::vector<double> sample_noise(std::span<const Sample> samples, const KalmanConfig& cfg);

Histogram noise_histogram(std::span<const Sample> samples, const KalmanConfig& cfg,
                          double bin_width);

}  // namespace hmtraj
