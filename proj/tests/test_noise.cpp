#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <random>

#include "hmtraj/error.hpp"
#include "hmtraj/noise.hpp"

using namespace hmtraj;

namespace {

Trajectory cv_track(int n, double dt, Point2 p0, Point2 v) {
  std::vector<TimedPoint> pts;
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    pts.push_back({t, p0.x + v.x * t, p0.y + v.y * t});
  }
  return Trajectory(std::move(pts));
}

Trajectory with_noise(const Trajectory& base, double std, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std);
  std::vector<TimedPoint> pts;
  for (const auto& p : base.points()) pts.push_back({p.t, p.x + n(rng), p.y + n(rng)});
  return Trajectory(std::move(pts));
}

Sample sample_from(const Trajectory& track, std::string id) {
  // Split at t = 1.0 so the past ends at 0 after shifting.
  std::vector<TimedPoint> past, future;
  for (const auto& p : track.points()) {
    const TimedPoint q{p.t - 1.0, p.x, p.y};
    (q.t <= 0.0 ? past : future).push_back(q);
  }
  Sample s;
  s.id = std::move(id);
  s.dataset = "test";
  s.past = Trajectory(std::move(past));
  s.future = Trajectory(std::move(future));
  return s;
}

}  // namespace

TEST_CASE("noiseless constant-velocity tracks are reproduced") {
  const KalmanConfig cfg;
  for (double dt : {0.1, 0.5}) {
    const Trajectory raw = cv_track(30, dt, {3.0, -2.0}, {7.5, 1.25});
    const Trajectory f = kalman_filter_cv(raw, cfg);
    REQUIRE(f.size() == raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      CHECK(f[i].t == raw[i].t);
      CHECK(distance(f[i].position(), raw[i].position()) < 1e-6);
    }
    CHECK(perception_noise(raw, cfg) < 1e-6);
  }
  const Trajectory still = cv_track(10, 0.1, {4.0, 4.0}, {0.0, 0.0});
  const Trajectory f = kalman_filter_cv(still, cfg);
  for (std::size_t i = 0; i < still.size(); ++i) CHECK(f[i].position() == still[i].position());
  CHECK(perception_noise(still, cfg) == 0.0);
}

TEST_CASE("three filter steps match the scalar recursion") {
  // 1D track at dt = 0.5 with default noise settings. Values come from the
  // per-axis 2x2 recursion run in exact rational arithmetic.
  const Trajectory raw({{0.0, 0.0, 0.0}, {0.5, 1.0, 0.0}, {1.0, 1.5, 0.0}, {1.5, 3.5, 0.0}});
  const Trajectory f = kalman_filter_cv(raw, KalmanConfig{});
  const double want[] = {0.0, 1.0, 1.6161460624725033, 3.1757518287726905};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(f[i].x - want[i]) <= 1e-9);
    CHECK(f[i].y == 0.0);
  }
}

TEST_CASE("single spike") {
  const Trajectory base = cv_track(21, 0.1, {0, 0}, {10.0, 0.0});
  std::vector<TimedPoint> pts(base.points().begin(), base.points().end());
  pts[10].y += 1.0;
  const double noise = perception_noise(Trajectory(std::move(pts)), KalmanConfig{});
  CHECK(noise > 0.2);
  CHECK(noise <= 1.0);
}

TEST_CASE("mean noise grows with injected noise") {
  std::mt19937_64 rng(41);
  const KalmanConfig cfg;
  const Trajectory base = cv_track(31, 0.1, {0, 0}, {8.0, 2.0});
  double prev = -1.0;
  std::vector<std::vector<double>> draws;
  for (double s : {0.1, 0.3, 0.5}) {
    std::vector<double> v;
    double sum = 0.0;
    for (int i = 0; i < 1000; ++i) {
      v.push_back(perception_noise(with_noise(base, s, rng), cfg));
      sum += v.back();
    }
    const double mean = sum / 1000.0;
    CHECK(mean >= prev);
    prev = mean;
    std::sort(v.begin(), v.end());
    draws.push_back(std::move(v));
  }
  // Empirical CDF ordering at the deciles.
  for (std::size_t a = 0; a + 1 < draws.size(); ++a) {
    for (std::size_t q = 100; q < 1000; q += 100) CHECK(draws[a][q] <= draws[a + 1][q]);
  }
}

TEST_CASE("filtering is translation equivariant") {
  std::mt19937_64 rng(42);
  const KalmanConfig cfg;
  const Trajectory raw = with_noise(cv_track(25, 0.1, {1, 2}, {5, -3}), 0.3, rng);
  const Trajectory f = kalman_filter_cv(raw, cfg);
  const double dx = 812.5, dy = -301.25;
  std::vector<TimedPoint> moved;
  for (const auto& p : raw.points()) moved.push_back({p.t, p.x + dx, p.y + dy});
  const Trajectory g = kalman_filter_cv(Trajectory(moved), cfg);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(std::abs(g[i].x - f[i].x - dx) <= 1e-9);
    CHECK(std::abs(g[i].y - f[i].y - dy) <= 1e-9);
  }
  CHECK(std::abs(perception_noise(Trajectory(moved), cfg) - perception_noise(raw, cfg)) <= 1e-9);
}

TEST_CASE("covariance stays symmetric positive definite") {
  std::mt19937_64 rng(43);
  for (double dt : {0.05, 0.1, 0.5}) {
    const Trajectory raw = with_noise(cv_track(60, dt, {0, 0}, {3, 3}), 0.4, rng);
    const KalmanOutput out = kalman_filter_cv_detailed(raw, KalmanConfig{});
    REQUIRE(out.covariances.size() == raw.size());
    for (const auto& P : out.covariances) {
      CHECK((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * P.cwiseAbs().maxCoeff());
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(P);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("filter input validation") {
  const KalmanConfig cfg;
  CHECK_THROWS_AS(kalman_filter_cv(cv_track(2, 0.1, {0, 0}, {1, 0}), cfg), Error);
  const Trajectory uneven({{0.0, 0, 0}, {0.1, 1, 0}, {0.25, 2, 0}, {0.35, 3, 0}});
  try {
    kalman_filter_cv(uneven, cfg);
    FAIL("expected non-uniform-sampling error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonUniformSampling);
  }
  KalmanConfig bad;
  bad.obs_std = 0.0;
  CHECK_THROWS_AS(kalman_filter_cv(cv_track(5, 0.1, {0, 0}, {1, 0}), bad), Error);
}

TEST_CASE("noise histogram") {
  const KalmanConfig cfg;
  std::vector<Sample> clean;
  for (int i = 0; i < 20; ++i) {
    clean.push_back(sample_from(cv_track(31, 0.1, {double(i), 0}, {5, 1}), "c" + std::to_string(i)));
  }
  const Histogram h = noise_histogram(clean, cfg, 0.1);
  REQUIRE(h.bins.size() == 1);
  CHECK(h.bins[0].lower == 0.0);
  CHECK(h.bins[0].fraction == 1.0);

  std::mt19937_64 rng(44);
  std::vector<Sample> mixed;
  for (int i = 0; i < 300; ++i) {
    const double s = (i % 3) * 0.3;
    mixed.push_back(sample_from(with_noise(cv_track(31, 0.1, {0, 0}, {5, 1}), s + 1e-9, rng),
                                "m" + std::to_string(i)));
  }
  const double bw = 0.25;
  const Histogram hm = noise_histogram(mixed, cfg, bw);
  const std::vector<double> values = sample_noise(mixed, cfg);
  std::map<long, std::size_t> recount;
  for (double v : values) ++recount[static_cast<long>(std::floor(v / bw))];
  REQUIRE(hm.bins.size() == recount.size());
  double total = 0.0;
  std::size_t b = 0;
  for (const auto& [key, count] : recount) {
    CHECK(hm.bins[b].lower == key * bw);
    CHECK(hm.bins[b].count == count);
    total += hm.bins[b].fraction;
    ++b;
  }
  CHECK(hm.total == mixed.size());
  CHECK(std::abs(total - 1.0) <= 1e-12);

  CHECK_THROWS_AS(noise_histogram(std::span<const Sample>{}, cfg, 0.1), Error);
}
