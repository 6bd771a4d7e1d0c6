#pragma once

#include <optional>
#include <string>

namespace hmtraj {

/// Affine uncertainty-to-radius map: r = a * U + b.
struct CalibrationModel {
  double a = 0.0;  // m per m^2
  double b = 1.0;  // m
  std::string source_dataset;
  std::optional<int> bin_count;
  std::optional<double> residual_rms;

  /// Throws InvalidArgument unless a is finite and b > 0.
  void validate() const;
};

/// Models fitted per training dataset in the original evaluation, together
/// with the best fixed radius found there.
struct CalibrationPreset {
  CalibrationModel model;
  double fixed_radius = 0.0;
};

/// Built-in copies of the shipped preset files (data/presets/*.json).
/// Known names: argoverse, interaction, nuscenes, shifts. Throws
/// InvalidArgument for anything else.
CalibrationPreset builtin_preset(const std::string& dataset);

}  // namespace hmtraj
