#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "hmtraj/calibration.hpp"
#include "hmtraj/heatmap.hpp"

namespace hmtraj {

/// Generator for (heatmap, ground truth) pairs drawn from random Gaussian
/// mixtures. The heatmap is the discretized mixture and the ground truth is a
/// draw from the same mixture, so the heatmap is a perfectly calibrated
/// predictor.
struct ScenarioConfig {
  int min_modes = 1;
  int max_modes = 4;
  double x_min = 0.0;
  double x_max = 60.0;
  double y_min = -20.0;
  double y_max = 20.0;
  double sigma_min = 0.5;
  double sigma_max = 6.0;
  double weight_floor = 0.1;
  double truncate_sigmas = 4.0;
  /// Covers the mean region plus truncate_sigmas * sigma_max on every side.
  GridSpec grid{-24.0, -44.0, 0.5, 217, 177};
  std::uint64_t seed = 0;

  void validate() const;
};

struct Scenario {
  std::string sample_id;
  Heatmap heatmap;
  Point2 gt;
  MixtureSpec mixture;
};

/// Pure function of (cfg, index): the random stream is keyed on both.
Scenario sample_scenario(const ScenarioConfig& cfg, std::uint64_t index);

std::string scenario_id(std::uint64_t index);

/// Scenarios whose sweep-optimal radius is planted on a known affine law of
/// their uncertainty.
///
/// The heatmap is a dominant peak, a line of cells along +x with slowly
/// decreasing mass, and a low-mass far cluster whose weight is tuned by
/// bisection so that the heatmap's uncertainty hits a target U drawn
/// uniformly from [u_min, u_max]. With k = 2 the second endpoint is the first
/// line cell beyond the radius, and the ground truth is placed on the line so
/// that the best sweep radius is the grid value nearest slope * U + intercept.
/// Use planted_sweep() and k = 2 with these scenarios.
struct PlantedRadiusConfig {
  double slope = 0.02;
  double intercept = 0.9;
  double u_min = 3.0;
  double u_max = 43.0;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr int kPlantedK = 2;

/// 0.01, 0.03, ..., 4.99 with l_for_objective = 2.
RadiusSweepConfig planted_sweep();

Scenario sample_planted_scenario(const PlantedRadiusConfig& cfg, std::uint64_t index);

/// Writes heatmaps.jsonl, gt.jsonl and manifest.json into out_dir. Heatmaps
/// are thresholded at write_min_prob before writing (0 keeps every cell).
void generate_dataset(const ScenarioConfig& cfg, std::size_t n, const std::filesystem::path& out_dir,
                      double write_min_prob = 1e-6, int workers = 1);

void generate_planted_dataset(const PlantedRadiusConfig& cfg, std::size_t n,
                              const std::filesystem::path& out_dir, int workers = 1);

}  // namespace hmtraj
