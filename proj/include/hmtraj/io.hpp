#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hmtraj/calibration.hpp"
#include "hmtraj/histogram.hpp"
#include "hmtraj/metrics.hpp"
#include "hmtraj/noise.hpp"
#include "hmtraj/sampling.hpp"
#include "hmtraj/synth.hpp"
#include "hmtraj/trajectory.hpp"

namespace hmtraj::io {

using Json = nlohmann::json;

// Files

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& path, const std::string& text);
Json read_json_file(const std::filesystem::path& path);

struct JsonLine {
  std::size_t line_no = 0;  // 1-based
  std::optional<Json> value;
  std::string error;  // set when value is empty
};

/// Non-blank lines of a JSONL file, parse failures reported per line.
std::vector<JsonLine> read_jsonl(const std::filesystem::path& path);

/// Round-trip shortest decimal form of a double.
std::string format_number(double v);

/// 16 hex digits of a stable hash over the canonical (sorted-key) dump.
std::string config_hash(const Json& config);

// Scenes: one Sample per line.

Json sample_to_json(const Sample& s);
Sample sample_from_json(const Json& j);

// Heatmaps: {"sample_id", "grid", "cells": [[index, probability], ...]}

struct HeatmapRecord {
  std::string sample_id;
  Heatmap heatmap;
};

Json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const Json& j);
Json heatmap_to_json(const std::string& sample_id, const Heatmap& h);
/// Normalizes the heatmap on read.
HeatmapRecord heatmap_from_json(const Json& j);
std::vector<HeatmapRecord> read_heatmaps(const std::filesystem::path& path);

// Ground truth: {"sample_id", "gt": [x, y]}

struct GroundTruth {
  std::string sample_id;
  Point2 gt;
};

Json gt_to_json(const GroundTruth& g);
GroundTruth gt_from_json(const Json& j);
std::vector<GroundTruth> read_ground_truth(const std::filesystem::path& path);

// Predictions: {"sample_id", "radius_used", "uncertainty", "endpoints": [[x, y, score], ...]}

Json prediction_to_json(const std::string& sample_id, const PredictionSet& p);
PredictionSet prediction_from_json(const Json& j);

// Calibration models: {"a", "b", "source_dataset", "bin_count", "residual_rms"}

Json model_to_json(const CalibrationModel& m);
CalibrationModel model_from_json(const Json& j);
CalibrationModel read_model(const std::filesystem::path& path);
/// Preset files carry the model plus "fixed_radius".
CalibrationPreset read_preset(const std::filesystem::path& path);

// Reports

/// Columns: sample_id, uncertainty, radius_used, fde_1..fde_k, miss_1..miss_k.
std::string eval_records_csv(const std::vector<EvalRecord>& records);
std::vector<EvalRecord> eval_records_from_csv(const std::string& text);

Json aggregate_to_json(const AggregateReport& r);
Json histogram_to_json(const Histogram& h);
/// Plot-ready x, y, count columns (x = bin lower edge, y = fraction).
std::string histogram_csv(const Histogram& h);

// Configs. Missing keys keep their defaults; unknown keys are rejected.

StandardizationConfig standardization_from_json(const Json& j);
Json standardization_to_json(const StandardizationConfig& c);
SamplingConfig sampling_from_json(const Json& j);
Json sampling_to_json(const SamplingConfig& c);
RadiusSweepConfig sweep_from_json(const Json& j);
Json sweep_to_json(const RadiusSweepConfig& c);
KalmanConfig kalman_from_json(const Json& j);
Json kalman_to_json(const KalmanConfig& c);
ScenarioConfig scenario_from_json(const Json& j);
Json scenario_to_json(const ScenarioConfig& c);
PlantedRadiusConfig planted_from_json(const Json& j);
Json planted_to_json(const PlantedRadiusConfig& c);

}  // namespace hmtraj::io
