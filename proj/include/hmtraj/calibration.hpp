#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hmtraj/calibration_model.hpp"
#include "hmtraj/heatmap.hpp"

namespace hmtraj {

struct RadiusSweepConfig {
  std::vector<double> r_values = default_radii();
  int l_for_objective = 6;

  /// 0.1, 0.2, ..., 5.0
  static std::vector<double> default_radii();
  void validate() const;
};

/// Sweep radius minimizing minFDE_{l_for_objective} for one heatmap and its
/// ground truth. Ties go to the smallest radius.
double optimal_radius(const Heatmap& h, Point2 gt, int k, const RadiusSweepConfig& sweep);

/// Objective value (minFDE_l) at every sweep radius, same order as r_values.
std::vector<double> radius_sweep_errors(const Heatmap& h, Point2 gt, int k,
                                        const RadiusSweepConfig& sweep);

struct RadiusObservation {
  double uncertainty = 0.0;
  double r_opt = 0.0;
};

struct RadiusBin {
  double center = 0.0;
  double mean_r_opt = 0.0;
  std::size_t count = 0;
};

/// Floor-bins observations on U and averages r_opt per bin. Throws
/// EmptyInput when no bin reaches min_count.
std::vector<RadiusBin> binned_optimal_radii(std::span<const RadiusObservation> obs,
                                            double bin_width = 1.0,
                                            std::size_t min_count = 100);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Weighted least squares line through (x, y) minimizing
/// sum w_i (y_i - slope x_i - intercept)^2. Solved from the centered normal
/// equations. Throws Degenerate if all x coincide.
LineFit ols_fit(std::span<const Point2> points, std::span<const double> weights);

struct LabeledHeatmap {
  std::string sample_id;
  Heatmap heatmap;
  Point2 gt;
};

struct CalibrationResult {
  CalibrationModel model;
  std::vector<RadiusBin> bins;
  std::vector<RadiusObservation> observations;  // same order as the input
};

struct CalibrationOptions {
  int k = 6;
  RadiusSweepConfig sweep;
  double bin_width = 1.0;
  std::size_t min_count = 100;
  int workers = 1;
};

/// Per-sample U and optimal radius, bin averages, then a count-weighted line
/// fit on (bin center, mean radius). Throws InsufficientBins when fewer than
/// two bins survive, and Degenerate when the fitted intercept is not positive.
CalibrationResult calibrate(std::span<const LabeledHeatmap> dataset, const CalibrationOptions& opts,
                            std::string source_dataset);

struct LossValue {
  double loss = 0.0;
  double gradient = 0.0;  // d loss / d log_variance
};

/// Learned-variance baseline loss on s = log V with error E:
/// L(s) = E * exp(-s) + s.
LossValue learned_uncertainty_loss(double log_variance, double error);

}  // namespace hmtraj
