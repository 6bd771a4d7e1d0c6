#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hmtraj/calibration_model.hpp"
#include "hmtraj/error.hpp"
#include "hmtraj/harness.hpp"
#include "hmtraj/io.hpp"
#include "hmtraj/parallel.hpp"
#include "hmtraj/svg.hpp"

namespace hmtraj::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;
using harness::ExitCode;

// One JSON document; each command reads the sections it needs.
struct RunConfig {
  StandardizationConfig standardization;
  SamplingConfig sampling;
  RadiusSweepConfig sweep;
  KalmanConfig kalman;
  ScenarioConfig scenario;
  PlantedRadiusConfig planted;
  double bin_width = 1.0;      // uncertainty bins for calibrate and uncertainty-error
  std::size_t min_count = 100;
  double report_bin_width = 0.5;  // speed and noise histograms, m/s or m
  double write_min_prob = 1e-6;
};

RunConfig load_config(const std::string& path) {
  RunConfig c;
  if (path.empty()) return c;
  const Json j = io::read_json_file(path);
  if (!j.is_object()) throw Error(ErrorKind::Parse, fmt::format("{}: config must be an object", path));
  static const char* known[] = {"standardization", "sampling", "sweep", "kalman", "scenario",
                                "planted", "bin_width", "min_count", "report_bin_width",
                                "write_min_prob"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw Error(ErrorKind::Parse, fmt::format("{}: unknown config key '{}'", path, key));
    }
  }
  if (j.contains("standardization")) c.standardization = io::standardization_from_json(j["standardization"]);
  if (j.contains("sampling")) c.sampling = io::sampling_from_json(j["sampling"]);
  if (j.contains("sweep")) c.sweep = io::sweep_from_json(j["sweep"]);
  if (j.contains("kalman")) c.kalman = io::kalman_from_json(j["kalman"]);
  if (j.contains("scenario")) c.scenario = io::scenario_from_json(j["scenario"]);
  if (j.contains("planted")) c.planted = io::planted_from_json(j["planted"]);
  c.bin_width = j.value("bin_width", c.bin_width);
  c.min_count = j.value("min_count", c.min_count);
  c.report_bin_width = j.value("report_bin_width", c.report_bin_width);
  c.write_min_prob = j.value("write_min_prob", c.write_min_prob);
  return c;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out = ".";
  bool svg = false;
};

void add_common(CLI::App* app, Common& c, bool with_svg = true) {
  app->add_option("--config", c.config, "JSON config document")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Seed for every random draw");
  app->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "Output directory");
  if (with_svg) app->add_flag("--svg", c.svg, "Also write SVG charts");
}

struct RadiusFlags {
  std::optional<double> radius;
  std::string model;
  std::string preset;
  std::optional<int> k;
};

void add_radius_flags(CLI::App* app, RadiusFlags& f) {
  auto* r = app->add_option("--radius", f.radius, "Fixed sampling radius in meters");
  auto* m = app->add_option("--model", f.model, "Calibration model JSON (adaptive radius)")
                ->check(CLI::ExistingFile);
  auto* p = app->add_option("--preset", f.preset,
                            "Built-in calibration (argoverse, interaction, nuscenes, shifts)");
  r->excludes(m)->excludes(p);
  m->excludes(p);
  app->add_option("--k", f.k, "Number of endpoints");
}

SamplingConfig apply_radius_flags(SamplingConfig cfg, const RadiusFlags& f) {
  if (f.radius) cfg.radius_mode = FixedRadius{*f.radius};
  if (!f.model.empty()) cfg.radius_mode = AdaptiveRadius{io::read_model(f.model)};
  if (!f.preset.empty()) cfg.radius_mode = AdaptiveRadius{builtin_preset(f.preset).model};
  if (f.k) cfg.k = *f.k;
  cfg.validate();
  return cfg;
}

void finish(const fs::path& out, const std::string& command, const Json& config) {
  harness::write_run_metadata(out, command, io::config_hash(config));
}

// Commands

int cmd_standardize(const std::string& input, const Common& c, std::optional<double> non_targets) {
  const RunConfig rc = load_config(c.config);
  rc.standardization.validate();
  const auto lines = io::read_jsonl(input);
  if (lines.empty()) {
    spdlog::error("{}: no samples", input);
    return harness::kTotalFailure;
  }
  auto outcome = harness::standardize_lines(lines, rc.standardization);
  for (const auto& f : outcome.failures) {
    spdlog::warn("{}:{} [{}] {}", input, f.line_no, f.sample_id.empty() ? "?" : f.sample_id, f.message);
  }
  std::vector<Sample> samples = std::move(outcome.samples);
  Json config{{"standardization", io::standardization_to_json(rc.standardization)}};
  if (non_targets) {
    const std::uint64_t seed = c.seed.value_or(0);
    samples = filter_slow_agents(samples, *non_targets, seed);
    config["include_non_targets"] = *non_targets;
    config["seed"] = seed;
  }
  const fs::path out(c.out);
  io::write_text_file(out / "samples.jsonl", harness::samples_jsonl(samples));
  Json failures = Json::array();
  for (const auto& f : outcome.failures) {
    failures.push_back({{"line", f.line_no}, {"sample_id", f.sample_id}, {"error", f.message}});
  }
  Json report{{"total", outcome.total},
              {"standardized", outcome.total - outcome.failures.size()},
              {"written", samples.size()},
              {"failures", failures},
              {"config", config},
              {"config_hash", io::config_hash(config)}};
  io::write_text_file(out / "standardize_report.json", report.dump(2) + "\n");
  finish(out, "standardize", config);
  spdlog::info("standardized {}/{} lines", outcome.total - outcome.failures.size(), outcome.total);
  return outcome.exit_code();
}

int cmd_synth(std::size_t n, bool planted, const Common& c) {
  RunConfig rc = load_config(c.config);
  const fs::path out(c.out);
  Json config;
  if (planted) {
    if (c.seed) rc.planted.seed = *c.seed;
    generate_planted_dataset(rc.planted, n, out, c.workers);
    config = io::planted_to_json(rc.planted);
  } else {
    if (c.seed) rc.scenario.seed = *c.seed;
    generate_dataset(rc.scenario, n, out, rc.write_min_prob, c.workers);
    config = io::scenario_to_json(rc.scenario);
  }
  finish(out, "synth", config);
  spdlog::info("wrote {} scenarios to {}", n, out.string());
  return harness::kSuccess;
}

int cmd_sample(const std::string& heatmaps, const RadiusFlags& rf, const Common& c) {
  const RunConfig rc = load_config(c.config);
  const SamplingConfig cfg = apply_radius_flags(rc.sampling, rf);
  auto records = io::read_heatmaps(heatmaps);
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
  std::vector<std::string> lines(records.size());
  std::vector<std::string> errors(records.size());
  parallel_for(records.size(), c.workers, [&](std::size_t i) {
    try {
      lines[i] = io::prediction_to_json(records[i].sample_id,
                                        sample_with_uncertainty(records[i].heatmap, cfg))
                     .dump();
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::string text;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!errors[i].empty()) {
      spdlog::warn("{}: {}", records[i].sample_id, errors[i]);
      ++failed;
      continue;
    }
    text += lines[i];
    text += '\n';
  }
  const fs::path out(c.out);
  io::write_text_file(out / "predictions.jsonl", text);
  const Json config{{"sampling", io::sampling_to_json(cfg)}};
  finish(out, "sample", config);
  return harness::exit_code_for(failed, records.size());
}

int cmd_calibrate(const std::string& heatmaps, const std::string& gts, std::optional<int> k,
                  const std::string& source, const Common& c) {
  const RunConfig rc = load_config(c.config);
  const auto dataset = harness::load_labeled(heatmaps, gts);
  CalibrationOptions opts;
  opts.k = k.value_or(rc.sampling.k);
  opts.sweep = rc.sweep;
  opts.bin_width = rc.bin_width;
  opts.min_count = rc.min_count;
  opts.workers = c.workers;
  const auto result = calibrate(dataset, opts, source);
  const Json config{{"k", opts.k},
                    {"sweep", io::sweep_to_json(opts.sweep)},
                    {"bin_width", opts.bin_width},
                    {"min_count", opts.min_count}};
  const fs::path out(c.out);
  harness::write_calibration(result, out, config, c.svg);
  finish(out, "calibrate", config);
  spdlog::info("fitted r = {} * U + {} over {} bins", result.model.a, result.model.b, result.bins.size());
  return harness::kSuccess;
}

int cmd_evaluate(const std::string& heatmaps, const std::string& gts, const RadiusFlags& rf,
                 const Common& c) {
  const RunConfig rc = load_config(c.config);
  const SamplingConfig cfg = apply_radius_flags(rc.sampling, rf);
  const auto dataset = harness::load_labeled(heatmaps, gts);
  const auto ev = harness::evaluate(dataset, cfg, c.workers);
  const Json config{{"sampling", io::sampling_to_json(cfg)}};
  const fs::path out(c.out);
  harness::write_evaluation(ev, out, config);
  finish(out, "evaluate", config);
  spdlog::info("{} samples, minFDE_{} = {}, MR_{} = {}", ev.report.count, cfg.k,
               ev.report.min_fde.back(), cfg.k, ev.report.miss_rate.back());
  return harness::kSuccess;
}

int cmd_cross_eval(const std::string& manifest_path, bool out_given, const Common& c) {
  const Json j = io::read_json_file(manifest_path);
  harness::RunManifest m =
      harness::manifest_from_json(j, fs::absolute(manifest_path).parent_path());
  if (c.seed) m.seed = *c.seed;
  if (out_given) m.output_dir = c.out;
  if (c.svg) m.svg = true;
  const auto matrix = harness::cross_eval(m, c.workers);
  harness::write_report_matrix(matrix, m.output_dir, m.svg);
  harness::write_run_metadata(m.output_dir, "cross-eval", matrix.config_hash);
  return matrix.exit_code();
}

int cmd_uncertainty_error(const std::string& heatmaps, const std::string& gts,
                          const RadiusFlags& rf, const Common& c) {
  const RunConfig rc = load_config(c.config);
  const SamplingConfig cfg = apply_radius_flags(rc.sampling, rf);
  const auto dataset = harness::load_labeled(heatmaps, gts);
  const auto a = harness::uncertainty_error(dataset, cfg, rc.bin_width, rc.min_count, c.workers);
  const Json config{{"sampling", io::sampling_to_json(cfg)},
                    {"bin_width", rc.bin_width},
                    {"min_count", rc.min_count}};
  const fs::path out(c.out);
  io::write_text_file(out / "uncertainty_error.csv", harness::uncertainty_bins_csv(a.bins));
  Json summary{{"samples", a.records.size()},
               {"bins", a.bins.size()},
               {"spearman", a.spearman ? Json(*a.spearman) : Json(nullptr)},
               {"config", config},
               {"config_hash", io::config_hash(config)}};
  io::write_text_file(out / "uncertainty_error.json", summary.dump(2) + "\n");
  if (c.svg) {
    std::vector<double> xs, ys;
    for (const auto& b : a.bins) {
      xs.push_back(b.lower);
      ys.push_back(b.mean_min_fde1);
    }
    io::write_text_file(out / "uncertainty_error.svg",
                        svg::line_chart("minFDE_1 vs uncertainty", "uncertainty bin (m^2)",
                                        "mean minFDE_1 (m)", xs, ys));
  }
  finish(out, "analysis uncertainty-error", config);
  return harness::kSuccess;
}

void write_histogram(const fs::path& out, const std::string& stem, const Histogram& h,
                     const Json& config, bool svg, const std::string& xlabel) {
  io::write_text_file(out / (stem + ".csv"), io::histogram_csv(h));
  Json j = io::histogram_to_json(h);
  j["config"] = config;
  j["config_hash"] = io::config_hash(config);
  io::write_text_file(out / (stem + ".json"), j.dump(2) + "\n");
  if (svg) {
    std::vector<double> xs, ys;
    for (const auto& b : h.bins) {
      xs.push_back(b.lower);
      ys.push_back(b.fraction);
    }
    io::write_text_file(out / (stem + ".svg"), svg::line_chart(stem, xlabel, "fraction", xs, ys));
  }
}

int cmd_noise_report(const std::string& samples_path, const Common& c) {
  const RunConfig rc = load_config(c.config);
  const auto samples = harness::read_samples(samples_path);
  const auto noise = sample_noise(samples, rc.kalman);
  std::string csv = "sample_id,noise_m\n";
  for (std::size_t i = 0; i < samples.size(); ++i) csv += fmt::format("{},{}\n", samples[i].id, noise[i]);
  const fs::path out(c.out);
  io::write_text_file(out / "noise.csv", csv);
  const Json config{{"kalman", io::kalman_to_json(rc.kalman)}, {"bin_width", rc.report_bin_width}};
  write_histogram(out, "noise_histogram", make_histogram(noise, rc.report_bin_width), config, c.svg,
                  "perception noise (m)");
  finish(out, "analysis noise-report", config);
  return harness::kSuccess;
}

int cmd_speed_report(const std::string& samples_path, const Common& c) {
  const RunConfig rc = load_config(c.config);
  const auto samples = harness::read_samples(samples_path);
  std::string csv = "sample_id,speed_mps\n";
  for (const auto& s : samples) csv += fmt::format("{},{}\n", s.id, average_speed(s));
  const fs::path out(c.out);
  io::write_text_file(out / "speed.csv", csv);
  const Json config{{"bin_width", rc.report_bin_width}};
  write_histogram(out, "speed_histogram", speed_histogram(samples, rc.report_bin_width), config,
                  c.svg, "average speed (m/s)");
  finish(out, "analysis speed-report", config);
  return harness::kSuccess;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Heatmap uncertainty and adaptive endpoint sampling toolkit", "hmtraj"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  Common c_std, c_syn, c_smp, c_cal, c_eval, c_cross, c_ue, c_noise, c_speed;
  RadiusFlags rf_smp, rf_eval, rf_ue;

  auto* std_cmd = app.add_subcommand("standardize", "Resample scenes to the common history/horizon/rate");
  std::string std_in;
  std::optional<double> non_targets;
  std_cmd->add_option("input", std_in, "Scene JSONL")->required();
  std_cmd->add_option("--include-non-targets", non_targets,
                      "Promote eligible non-target agents with this probability")
      ->check(CLI::Range(0.0, 1.0));
  add_common(std_cmd, c_std, false);

  auto* syn = app.add_subcommand("synth", "Generate synthetic heatmaps and ground truth");
  std::size_t n = 1000;
  bool planted = false;
  syn->add_option("-n,--count", n, "Number of scenarios")->check(CLI::PositiveNumber);
  syn->add_flag("--planted", planted, "Planted-radius calibration set");
  add_common(syn, c_syn, false);

  auto* smp = app.add_subcommand("sample", "Sample endpoints from heatmaps");
  std::string smp_heat;
  smp->add_option("--heatmaps", smp_heat, "Heatmap JSONL")->required()->check(CLI::ExistingFile);
  add_radius_flags(smp, rf_smp);
  add_common(smp, c_smp, false);

  auto* cal = app.add_subcommand("calibrate", "Fit the uncertainty-to-radius model");
  std::string cal_heat, cal_gt, cal_source;
  std::optional<int> cal_k;
  cal->add_option("--heatmaps", cal_heat, "Heatmap JSONL")->required()->check(CLI::ExistingFile);
  cal->add_option("--gts", cal_gt, "Ground-truth JSONL")->required()->check(CLI::ExistingFile);
  cal->add_option("--source", cal_source, "Dataset tag stored in the model");
  cal->add_option("--k", cal_k, "Endpoints sampled per sweep radius");
  add_common(cal, c_cal);

  auto* ev = app.add_subcommand("evaluate", "minFDE and miss rate over a labeled heatmap set");
  std::string ev_heat, ev_gt;
  ev->add_option("--heatmaps", ev_heat, "Heatmap JSONL")->required()->check(CLI::ExistingFile);
  ev->add_option("--gts", ev_gt, "Ground-truth JSONL")->required()->check(CLI::ExistingFile);
  add_radius_flags(ev, rf_eval);
  add_common(ev, c_eval, false);

  auto* cross = app.add_subcommand("cross-eval", "Train-by-test matrices from a run manifest");
  std::string manifest;
  cross->add_option("manifest", manifest, "Run manifest JSON")->required()->check(CLI::ExistingFile);
  cross->add_option("--seed", c_cross.seed, "Seed for mixed-dataset draws");
  cross->add_option("--workers", c_cross.workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* cross_out = cross->add_option("--out", c_cross.out, "Output directory (overrides manifest)");
  cross->add_flag("--svg", c_cross.svg, "Also write SVG matrices");

  auto* an = app.add_subcommand("analysis", "Binned analyses");
  an->require_subcommand(1);
  auto* ue = an->add_subcommand("uncertainty-error", "Mean minFDE_1 per integer uncertainty bin");
  std::string ue_heat, ue_gt;
  ue->add_option("--heatmaps", ue_heat, "Heatmap JSONL")->required()->check(CLI::ExistingFile);
  ue->add_option("--gts", ue_gt, "Ground-truth JSONL")->required()->check(CLI::ExistingFile);
  add_radius_flags(ue, rf_ue);
  add_common(ue, c_ue);
  auto* noise = an->add_subcommand("noise-report", "Kalman perception-noise distribution");
  std::string noise_in;
  noise->add_option("--samples", noise_in, "Standardized sample JSONL")->required()->check(CLI::ExistingFile);
  add_common(noise, c_noise);
  auto* speed = an->add_subcommand("speed-report", "Average-speed distribution");
  std::string speed_in;
  speed->add_option("--samples", speed_in, "Standardized sample JSONL")->required()->check(CLI::ExistingFile);
  add_common(speed, c_speed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? harness::kSuccess : harness::kTotalFailure;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*std_cmd) return cmd_standardize(std_in, c_std, non_targets);
    if (*syn) return cmd_synth(n, planted, c_syn);
    if (*smp) return cmd_sample(smp_heat, rf_smp, c_smp);
    if (*cal) return cmd_calibrate(cal_heat, cal_gt, cal_k, cal_source, c_cal);
    if (*ev) return cmd_evaluate(ev_heat, ev_gt, rf_eval, c_eval);
    if (*cross) return cmd_cross_eval(manifest, cross_out->count() > 0, c_cross);
    if (*ue) return cmd_uncertainty_error(ue_heat, ue_gt, rf_ue, c_ue);
    if (*noise) return cmd_noise_report(noise_in, c_noise);
    if (*speed) return cmd_speed_report(speed_in, c_speed);
  } catch (const Error& e) {
    spdlog::error("{}: {}", to_string(e.kind()), e.what());
    return harness::kTotalFailure;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return harness::kTotalFailure;
  }
  return harness::kTotalFailure;
}

}  // namespace hmtraj::cli
