#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "hmtraj/calibration_model.hpp"
#include "hmtraj/heatmap.hpp"

namespace hmtraj {

struct Endpoint {
  Point2 position;
  double score = 0.0;  // probability mass claimed by this modality
};

struct PredictionSet {
  std::vector<Endpoint> endpoints;  // descending score
  double radius_used = 0.0;
  std::optional<UncertaintyEstimate> uncertainty;
};

struct FixedRadius {
  double r = 1.5;
};

struct AdaptiveRadius {
  CalibrationModel model;
};

using RadiusMode = std::variant<FixedRadius, AdaptiveRadius>;

struct SamplingConfig {
  int k = 6;
  RadiusMode radius_mode = FixedRadius{};
  double r_min = 0.1;
  double r_max = 10.0;

  void validate() const;
};

/// Greedy non-maximum suppression over a heatmap.
///
/// Each step takes the live cell with the largest mass (ties: lowest index),
/// emits its center, and suppresses every live cell whose center lies within
/// Euclidean distance r of it. The endpoint score is the mass suppressed in
/// that step, summed in ascending cell index. Stops after k endpoints or when
/// no live mass is left, so fewer than k endpoints may come back.
///
/// Construction sorts the cells once; sample() can then be called for many
/// radii, which is what the radius sweep does.
class NmsSampler {
 public:
  explicit NmsSampler(const Heatmap& h);

  PredictionSet sample(int k, double r) const;

 private:
  Heatmap heatmap_;
  std::vector<std::uint32_t> order_;  // positions into cells(), by mass desc
};

PredictionSet nms_sample(const Heatmap& h, int k, double r);

/// clamp(a * U + b, r_min, r_max)
double adaptive_radius(double uncertainty, const CalibrationModel& model, double r_min,
                       double r_max);

/// Radius the config would use for a heatmap of the given uncertainty.
double resolve_radius(const SamplingConfig& cfg, double uncertainty);

/// Uncertainty, radius resolution, then NMS. The estimate is attached to the result.
PredictionSet sample_with_uncertainty(const Heatmap& h, const SamplingConfig& cfg);

}  // namespace hmtraj
