#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmtraj/calibration.hpp"
#include "hmtraj/io.hpp"
#include "hmtraj/metrics.hpp"
#include "hmtraj/sampling.hpp"
#include "hmtraj/trajectory.hpp"

namespace hmtraj::harness {

namespace fs = std::filesystem;

/// Process exit codes shared by every command.
enum ExitCode : int { kSuccess = 0, kTotalFailure = 1, kPartialFailure = 2 };

ExitCode exit_code_for(std::size_t failed, std::size_t total);

// Standardization over a scene file.

struct LineFailure {
  std::size_t line_no = 0;
  std::string sample_id;  // empty when the line did not parse
  std::string message;
};

struct StandardizeOutcome {
  std::vector<Sample> samples;
  std::vector<LineFailure> failures;
  std::size_t total = 0;

  ExitCode exit_code() const;
};

StandardizeOutcome standardize_lines(std::span<const io::JsonLine> lines,
                                     const StandardizationConfig& cfg);

std::vector<Sample> read_samples(const fs::path& path);
std::string samples_jsonl(std::span<const Sample> samples);

// Evaluation.

/// Pairs heatmaps with ground truth by sample id, sorted by id. Throws
/// IdMismatch naming up to 10 offending ids when the id sets differ.
std::vector<LabeledHeatmap> join_by_id(std::vector<io::HeatmapRecord> heatmaps,
                                       std::span<const io::GroundTruth> gts);

std::vector<LabeledHeatmap> load_labeled(const fs::path& heatmaps, const fs::path& gts);

struct Evaluation {
  std::vector<EvalRecord> records;  // sorted by sample id
  AggregateReport report;
};

Evaluation evaluate(std::span<const LabeledHeatmap> dataset, const SamplingConfig& cfg,
                    int workers = 1);

/// Writes records.csv and report.json.
void write_evaluation(const Evaluation& ev, const fs::path& out_dir, const io::Json& config);

/// Mean minFDE_l over the dataset for each sweep radius used as a fixed radius.
std::vector<double> fixed_radius_errors(std::span<const LabeledHeatmap> dataset, int k,
                                        const RadiusSweepConfig& sweep, int workers = 1);

/// Sweep radius with the lowest mean minFDE_l; ties go to the smaller radius.
double best_fixed_radius(std::span<const LabeledHeatmap> dataset, int k,
                         const RadiusSweepConfig& sweep, int workers = 1);

/// Writes calibration.json (the model) and binned_radius.csv.
void write_calibration(const CalibrationResult& result, const fs::path& out_dir,
                       const io::Json& config, bool svg = false);

// Uncertainty vs error.

struct UncertaintyErrorAnalysis {
  std::vector<EvalRecord> records;
  std::vector<UncertaintyBin> bins;
  std::optional<double> spearman;  // over the surviving bins, when there are >= 2
};

UncertaintyErrorAnalysis uncertainty_error(std::span<const LabeledHeatmap> dataset,
                                           const SamplingConfig& cfg, double bin_width,
                                           std::size_t min_count, int workers = 1);

std::string uncertainty_bins_csv(std::span<const UncertaintyBin> bins);

// Cross-dataset evaluation.

struct SourceSpec {
  std::string tag;
  fs::path heatmaps;
  fs::path gts;
  double weight = 1.0;
};

struct ModelSpec {
  std::string tag;
  std::optional<SourceSpec> source;      // training data for calibration/baseline
  std::vector<SourceSpec> mixed;         // mixed-dataset mode, used instead of source
  std::size_t mixed_count = 0;           // 0: total size of the mixed sources
  std::optional<fs::path> calibration;   // fitted model to load
  std::optional<double> fixed_radius;    // evaluate this row with a fixed radius
  std::optional<double> baseline_radius; // fixed radius for the improvement matrix
};

struct RunManifest {
  std::vector<ModelSpec> models;
  std::vector<SourceSpec> test_sets;
  SamplingConfig sampling;  // radius mode is set per model
  RadiusSweepConfig sweep;
  double bin_width = 1.0;
  std::size_t min_count = 100;
  double default_baseline_radius = 1.5;
  std::uint64_t seed = 0;
  fs::path output_dir = "cross_eval";
  bool svg = false;

  /// Throws InvalidArgument on duplicate tags or missing files.
  void validate() const;
};

/// Relative paths are resolved against base_dir.
RunManifest manifest_from_json(const io::Json& j, const fs::path& base_dir);
io::Json manifest_to_json(const RunManifest& m);

struct MatrixCell {
  bool ok = false;
  std::string error;
  std::size_t count = 0;
  double min_fde = 0.0;           // minFDE_k with the row's sampling
  double miss_rate = 0.0;         // MR_k
  double baseline_min_fde = 0.0;  // minFDE_k with the row's baseline fixed radius
  double baseline_miss_rate = 0.0;
  double improvement = 0.0;       // (baseline - min_fde) / baseline
};

struct ModelSummary {
  std::string tag;
  bool ok = false;
  std::string error;
  std::string mode;  // "adaptive" or "fixed"
  std::optional<CalibrationModel> model;
  double radius = 0.0;           // fixed radius when mode == "fixed"
  double baseline_radius = 0.0;
  std::size_t training_count = 0;
};

struct ReportMatrix {
  int k = 6;
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<ModelSummary> models;
  std::vector<std::vector<MatrixCell>> cells;  // [row][col]
  std::string config_hash;

  ExitCode exit_code() const;
};

/// Labeled samples for a model's training side (single source or mixed draw).
std::vector<LabeledHeatmap> training_set(const ModelSpec& spec, std::uint64_t seed);

ReportMatrix cross_eval(const RunManifest& manifest, int workers = 1);

/// cross_eval.json, min_fde.csv, miss_rate.csv, improvement.csv, report.md,
/// and matrix SVGs when requested. No timestamps; see write_run_metadata.
void write_report_matrix(const ReportMatrix& m, const fs::path& out_dir, bool svg);

/// run_metadata.json with the wall-clock time, kept apart from the
/// deterministic outputs.
void write_run_metadata(const fs::path& out_dir, const std::string& command,
                        const std::string& config_hash);

}  // namespace hmtraj::harness
