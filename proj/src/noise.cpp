#include "hmtraj/noise.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "hmtraj/error.hpp"

namespace hmtraj {

void KalmanConfig::validate() const {
  if (!(process_accel_std > 0.0) || !(obs_std > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "Kalman noise parameters must be positive");
  }
}

KalmanOutput kalman_filter_cv_detailed(const Trajectory& traj, const KalmanConfig& cfg) {
  cfg.validate();
  if (traj.size() < 3) {
    throw Error(ErrorKind::Degenerate, "Kalman filtering needs at least 3 points");
  }
  const double dt = traj[1].t - traj[0].t;
  for (std::size_t i = 2; i < traj.size(); ++i) {
    if (std::abs((traj[i].t - traj[i - 1].t) - dt) > 1e-6) {
      throw Error(ErrorKind::NonUniformSampling,
                  fmt::format("step {} is {} s, expected {} s", i, traj[i].t - traj[i - 1].t, dt));
    }
  }

  using Mat4 = Eigen::Matrix4d;
  using Vec4 = Eigen::Vector4d;

  Mat4 F = Mat4::Identity();
  F(0, 2) = dt;
  F(1, 3) = dt;

  // Discretized white-acceleration noise, per axis [dt^4/4, dt^3/2; dt^3/2, dt^2].
  const double qa = cfg.process_accel_std * cfg.process_accel_std;
  Mat4 Q = Mat4::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    Q(axis, axis) = qa * std::pow(dt, 4) / 4.0;
    Q(axis, axis + 2) = Q(axis + 2, axis) = qa * std::pow(dt, 3) / 2.0;
    Q(axis + 2, axis + 2) = qa * dt * dt;
  }

  Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
  H(0, 0) = 1.0;
  H(1, 1) = 1.0;
  const double rv = cfg.obs_std * cfg.obs_std;
  const Eigen::Matrix2d R = rv * Eigen::Matrix2d::Identity();

  // Two-point start: position from z0, velocity (z1 - z0) / dt.
  Vec4 x;
  x << traj[0].x, traj[0].y, (traj[1].x - traj[0].x) / dt, (traj[1].y - traj[0].y) / dt;
  Mat4 P = Mat4::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    P(axis, axis) = rv;
    P(axis, axis + 2) = P(axis + 2, axis) = -rv / dt;
    P(axis + 2, axis + 2) = 2.0 * rv / (dt * dt);
  }

  KalmanOutput out;
  std::vector<TimedPoint> filtered;
  filtered.reserve(traj.size());
  filtered.push_back(traj[0]);
  out.covariances.push_back(P);

  for (std::size_t i = 1; i < traj.size(); ++i) {
    x = F * x;
    P = F * P * F.transpose() + Q;

    const Eigen::Vector2d z(traj[i].x, traj[i].y);
    const Eigen::Vector2d innovation = z - H * x;
    const Eigen::Matrix2d S = H * P * H.transpose() + R;
    const Eigen::Matrix<double, 4, 2> K = P * H.transpose() * S.inverse();
    x += K * innovation;
    // Joseph form keeps P symmetric positive definite.
    const Mat4 I_KH = Mat4::Identity() - K * H;
    P = I_KH * P * I_KH.transpose() + K * R * K.transpose();

    filtered.push_back({traj[i].t, x(0), x(1)});
    out.covariances.push_back(P);
  }
  out.filtered = Trajectory(std::move(filtered));
  return out;
}

Trajectory kalman_filter_cv(const Trajectory& traj, const KalmanConfig& cfg) {
  return kalman_filter_cv_detailed(traj, cfg).filtered;
}

double perception_noise(const Trajectory& traj, const KalmanConfig& cfg) {
  const Trajectory filtered = kalman_filter_cv(traj, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    worst = std::max(worst, distance(traj[i].position(), filtered[i].position()));
  }
  return worst;
}

std::vector<double> sample_noise(std::span<const Sample> samples, const KalmanConfig& cfg) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(perception_noise(full_track(s), cfg));
  return out;
}

Histogram noise_histogram(std::span<const Sample> samples, const KalmanConfig& cfg,
                          double bin_width) {
  if (samples.empty()) throw Error(ErrorKind::EmptyInput, "no samples for noise histogram");
  return make_histogram(sample_noise(samples, cfg), bin_width);
}

}  // namespace hmtraj
