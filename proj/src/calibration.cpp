#include "hmtraj/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "hmtraj/error.hpp"
#include "hmtraj/metrics.hpp"
#include "hmtraj/numeric.hpp"
#include "hmtraj/parallel.hpp"
#include "hmtraj/sampling.hpp"

namespace hmtraj {

std::vector<double> RadiusSweepConfig::default_radii() {
  std::vector<double> r;
  for (int i = 1; i <= 50; ++i) r.push_back(i / 10.0);
  return r;
}

void RadiusSweepConfig::validate() const {
  if (r_values.empty()) throw Error(ErrorKind::InvalidArgument, "radius sweep is empty");
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    if (!(r_values[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "sweep radii must be > 0");
    if (i > 0 && !(r_values[i] > r_values[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "sweep radii must be strictly ascending");
    }
  }
  if (l_for_objective < 1) throw Error(ErrorKind::InvalidArgument, "l_for_objective must be >= 1");
}

std::vector<double> radius_sweep_errors(const Heatmap& h, Point2 gt, int k,
                                        const RadiusSweepConfig& sweep) {
  sweep.validate();
  const NmsSampler sampler(h);
  std::vector<double> errors;
  errors.reserve(sweep.r_values.size());
  for (double r : sweep.r_values) {
    errors.push_back(min_fde(sampler.sample(k, r), gt, sweep.l_for_objective));
  }
  return errors;
}

double optimal_radius(const Heatmap& h, Point2 gt, int k, const RadiusSweepConfig& sweep) {
  const auto errors = radius_sweep_errors(h, gt, k, sweep);
  // min_element returns the first minimum, i.e. the smallest radius.
  const auto best = std::min_element(errors.begin(), errors.end());
  return sweep.r_values[static_cast<std::size_t>(best - errors.begin())];
}

std::vector<RadiusBin> binned_optimal_radii(std::span<const RadiusObservation> obs,
                                            double bin_width, std::size_t min_count) {
  if (!(bin_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "bin_width must be positive");
  std::map<std::int64_t, std::vector<double>> bins;
  for (const auto& o : obs) bins[floor_bin(o.uncertainty, bin_width)].push_back(o.r_opt);

  std::vector<RadiusBin> out;
  for (auto& [key, radii] : bins) {
    if (radii.size() < min_count) continue;
    const std::size_t n = radii.size();
    out.push_back({static_cast<double>(key) * bin_width + bin_width / 2.0,
                   order_insensitive_mean(std::move(radii)), n});
  }
  if (out.empty()) {
    throw Error(ErrorKind::EmptyInput,
                fmt::format("no uncertainty bin holds {} or more observations", min_count));
  }
  return out;
}

LineFit ols_fit(std::span<const Point2> points, std::span<const double> weights) {
  if (points.size() != weights.size()) {
    throw Error(ErrorKind::InvalidArgument, "points and weights differ in length");
  }
  if (points.size() < 2) throw Error(ErrorKind::Degenerate, "need at least 2 points");
  CompensatedSum sw, swx, swy;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(weights[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "weights must be > 0");
    sw.add(weights[i]);
    swx.add(weights[i] * points[i].x);
    swy.add(weights[i] * points[i].y);
  }
  const double x_mean = swx.value() / sw.value();
  const double y_mean = swy.value() / sw.value();
  CompensatedSum sxx, sxy;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dx = points[i].x - x_mean;
    sxx.add(weights[i] * dx * dx);
    sxy.add(weights[i] * dx * (points[i].y - y_mean));
  }
  if (!(sxx.value() > 0.0)) throw Error(ErrorKind::Degenerate, "all x values are equal");
  const double slope = sxy.value() / sxx.value();
  return {slope, y_mean - slope * x_mean};
}

CalibrationResult calibrate(std::span<const LabeledHeatmap> dataset, const CalibrationOptions& opts,
                            std::string source_dataset) {
  opts.sweep.validate();
  if (dataset.empty()) throw Error(ErrorKind::EmptyInput, "calibration dataset is empty");

  CalibrationResult result;
  result.observations.resize(dataset.size());
  parallel_for(dataset.size(), opts.workers, [&](std::size_t i) {
    const auto& s = dataset[i];
    result.observations[i] = {uncertainty(s.heatmap).spread,
                              optimal_radius(s.heatmap, s.gt, opts.k, opts.sweep)};
  });

  try {
    result.bins = binned_optimal_radii(result.observations, opts.bin_width, opts.min_count);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyInput) throw;
  }
  if (result.bins.size() < 2) {
    throw Error(ErrorKind::InsufficientBins,
                fmt::format("calibration needs at least 2 uncertainty bins with >= {} samples, got {}",
                            opts.min_count, result.bins.size()));
  }

  std::vector<Point2> points;
  std::vector<double> weights;
  for (const auto& b : result.bins) {
    points.push_back({b.center, b.mean_r_opt});
    weights.push_back(static_cast<double>(b.count));
  }
  const LineFit fit = ols_fit(points, weights);
  if (!(fit.intercept > 0.0)) {
    throw Error(ErrorKind::Degenerate,
                fmt::format("fitted intercept {} is not positive", fit.intercept));
  }

  CompensatedSum sq;
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double res = points[i].y - (fit.slope * points[i].x + fit.intercept);
    sq.add(weights[i] * res * res);
    total += weights[i];
  }

  result.model.a = fit.slope;
  result.model.b = fit.intercept;
  result.model.source_dataset = std::move(source_dataset);
  result.model.bin_count = static_cast<int>(result.bins.size());
  result.model.residual_rms = std::sqrt(sq.value() / total);
  return result;
}

LossValue learned_uncertainty_loss(double log_variance, double error) {
  if (!(error >= 0.0)) throw Error(ErrorKind::InvalidArgument, "error must be >= 0");
  const double scaled = error * std::exp(-log_variance);
  return {scaled + log_variance, 1.0 - scaled};
}

}  // namespace hmtraj
