#include "hmtraj/harness.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <random>
#include <set>
#include <string_view>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hmtraj/error.hpp"
#include "hmtraj/numeric.hpp"
#include "hmtraj/parallel.hpp"
#include "hmtraj/svg.hpp"

namespace hmtraj::harness {

ExitCode exit_code_for(std::size_t failed, std::size_t total) {
  if (total == 0 || failed == total) return kTotalFailure;
  return failed == 0 ? kSuccess : kPartialFailure;
}

ExitCode StandardizeOutcome::exit_code() const { return exit_code_for(failures.size(), total); }

StandardizeOutcome standardize_lines(std::span<const io::JsonLine> lines,
                                     const StandardizationConfig& cfg) {
  StandardizeOutcome out;
  out.total = lines.size();
  for (const auto& line : lines) {
    if (!line.value) {
      out.failures.push_back({line.line_no, "", line.error});
      continue;
    }
    std::string id;
    try {
      Sample s = io::sample_from_json(*line.value);
      id = s.id;
      out.samples.push_back(standardize_sample(s, cfg));
    } catch (const std::exception& e) {
      out.failures.push_back({line.line_no, id, e.what()});
    }
  }
  return out;
}

std::vector<Sample> read_samples(const fs::path& path) {
  std::vector<Sample> out;
  for (const auto& line : io::read_jsonl(path)) {
    if (!line.value) {
      throw Error(ErrorKind::Parse, fmt::format("{}:{}: {}", path.string(), line.line_no, line.error));
    }
    try {
      out.push_back(io::sample_from_json(*line.value));
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Parse, fmt::format("{}:{}: {}", path.string(), line.line_no, e.what()));
    }
  }
  return out;
}

std::string samples_jsonl(std::span<const Sample> samples) {
  std::string out;
  for (const auto& s : samples) {
    out += io::sample_to_json(s).dump();
    out += '\n';
  }
  return out;
}

std::vector<LabeledHeatmap> join_by_id(std::vector<io::HeatmapRecord> heatmaps,
                                       std::span<const io::GroundTruth> gts) {
  std::map<std::string, Point2> gt_by_id;
  std::vector<std::string> offenders;
  for (const auto& g : gts) {
    if (!gt_by_id.emplace(g.sample_id, g.gt).second) offenders.push_back(g.sample_id + " (duplicate gt)");
  }
  std::set<std::string> seen;
  std::vector<LabeledHeatmap> out;
  out.reserve(heatmaps.size());
  for (auto& h : heatmaps) {
    if (!seen.insert(h.sample_id).second) {
      offenders.push_back(h.sample_id + " (duplicate heatmap)");
      continue;
    }
    auto it = gt_by_id.find(h.sample_id);
    if (it == gt_by_id.end()) {
      offenders.push_back(h.sample_id + " (no gt)");
      continue;
    }
    out.push_back({h.sample_id, std::move(h.heatmap), it->second});
  }
  for (const auto& [id, _] : gt_by_id) {
    if (!seen.count(id)) offenders.push_back(id + " (no heatmap)");
  }
  if (!offenders.empty()) {
    std::sort(offenders.begin(), offenders.end());
    std::string list;
    for (std::size_t i = 0; i < std::min<std::size_t>(10, offenders.size()); ++i) {
      list += (i ? ", " : "") + offenders[i];
    }
    throw Error(ErrorKind::IdMismatch,
                fmt::format("{} sample ids do not match between heatmaps and ground truth: {}",
                            offenders.size(), list));
  }
  std::sort(out.begin(), out.end(),
            [](const LabeledHeatmap& a, const LabeledHeatmap& b) { return a.sample_id < b.sample_id; });
  return out;
}

std::vector<LabeledHeatmap> load_labeled(const fs::path& heatmaps, const fs::path& gts) {
  return join_by_id(io::read_heatmaps(heatmaps), io::read_ground_truth(gts));
}

Evaluation evaluate(std::span<const LabeledHeatmap> dataset, const SamplingConfig& cfg, int workers) {
  cfg.validate();
  if (dataset.empty()) throw Error(ErrorKind::EmptyInput, "nothing to evaluate");
  Evaluation ev;
  ev.records.resize(dataset.size());
  parallel_for(dataset.size(), workers, [&](std::size_t i) {
    const auto& s = dataset[i];
    ev.records[i] = make_record(s.sample_id, sample_with_uncertainty(s.heatmap, cfg), s.gt, cfg.k);
  });
  std::sort(ev.records.begin(), ev.records.end(),
            [](const EvalRecord& a, const EvalRecord& b) { return a.sample_id < b.sample_id; });
  ev.report = aggregate(ev.records);
  return ev;
}

void write_evaluation(const Evaluation& ev, const fs::path& out_dir, const io::Json& config) {
  io::write_text_file(out_dir / "records.csv", io::eval_records_csv(ev.records));
  io::Json report = io::aggregate_to_json(ev.report);
  report["config"] = config;
  report["config_hash"] = io::config_hash(config);
  io::write_text_file(out_dir / "report.json", report.dump(2) + "\n");
}

std::vector<double> fixed_radius_errors(std::span<const LabeledHeatmap> dataset, int k,
                                        const RadiusSweepConfig& sweep, int workers) {
  sweep.validate();
  if (dataset.empty()) throw Error(ErrorKind::EmptyInput, "empty dataset");
  std::vector<std::vector<double>> per_sample(dataset.size());
  parallel_for(dataset.size(), workers, [&](std::size_t i) {
    per_sample[i] = radius_sweep_errors(dataset[i].heatmap, dataset[i].gt, k, sweep);
  });
  std::vector<double> means;
  std::vector<double> column(dataset.size());
  for (std::size_t j = 0; j < sweep.r_values.size(); ++j) {
    for (std::size_t i = 0; i < dataset.size(); ++i) column[i] = per_sample[i][j];
    means.push_back(order_insensitive_mean(column));
  }
  return means;
}

double best_fixed_radius(std::span<const LabeledHeatmap> dataset, int k,
                         const RadiusSweepConfig& sweep, int workers) {
  const auto errors = fixed_radius_errors(dataset, k, sweep, workers);
  const auto best = std::min_element(errors.begin(), errors.end());
  return sweep.r_values[static_cast<std::size_t>(best - errors.begin())];
}

void write_calibration(const CalibrationResult& result, const fs::path& out_dir,
                       const io::Json& config, bool svg) {
  io::Json model = io::model_to_json(result.model);
  io::write_text_file(out_dir / "calibration.json", model.dump(2) + "\n");
  std::string csv = "x,y,count,fit\n";
  std::vector<double> xs, ys;
  for (const auto& b : result.bins) {
    csv += fmt::format("{},{},{},{}\n", b.center, b.mean_r_opt, b.count,
                       result.model.a * b.center + result.model.b);
    xs.push_back(b.center);
    ys.push_back(b.mean_r_opt);
  }
  io::write_text_file(out_dir / "binned_radius.csv", csv);
  io::Json meta{{"config", config}, {"config_hash", io::config_hash(config)},
                {"samples", result.observations.size()}};
  io::write_text_file(out_dir / "calibration_run.json", meta.dump(2) + "\n");
  if (svg) {
    io::write_text_file(out_dir / "binned_radius.svg",
                        svg::line_chart("Optimal radius vs uncertainty", "uncertainty (m^2)",
                                        "mean optimal radius (m)", xs, ys));
  }
}

UncertaintyErrorAnalysis uncertainty_error(std::span<const LabeledHeatmap> dataset,
                                           const SamplingConfig& cfg, double bin_width,
                                           std::size_t min_count, int workers) {
  UncertaintyErrorAnalysis out;
  out.records = evaluate(dataset, cfg, workers).records;
  out.bins = bin_by_uncertainty(out.records, bin_width, min_count);
  if (out.bins.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& b : out.bins) {
      xs.push_back(b.lower);
      ys.push_back(b.mean_min_fde1);
    }
    out.spearman = spearman_rho(xs, ys);
  }
  return out;
}

std::string uncertainty_bins_csv(std::span<const UncertaintyBin> bins) {
  std::string csv = "x,y,count\n";
  for (const auto& b : bins) csv += fmt::format("{},{},{}\n", b.lower, b.mean_min_fde1, b.count);
  return csv;
}

// Manifest

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void reject_unknown(const io::Json& j, std::initializer_list<std::string_view> allowed,
                    std::string_view what) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorKind::Parse, fmt::format("manifest {}: unknown key '{}'", what, key));
    }
  }
}

SourceSpec source_from_json(const io::Json& j, const fs::path& base) {
  reject_unknown(j, {"tag", "heatmaps", "gts", "weight"}, "source");
  SourceSpec s;
  s.tag = j.value("tag", std::string{});
  s.heatmaps = resolve(base, j.at("heatmaps").get<std::string>());
  s.gts = resolve(base, j.at("gts").get<std::string>());
  s.weight = j.value("weight", 1.0);
  return s;
}

io::Json source_to_json(const SourceSpec& s) {
  return {{"tag", s.tag}, {"heatmaps", s.heatmaps.string()}, {"gts", s.gts.string()},
          {"weight", s.weight}};
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("{}: '{}' does not exist", what, p.string()));
  }
}

}  // namespace

void RunManifest::validate() const {
  if (models.empty()) throw Error(ErrorKind::InvalidArgument, "manifest lists no models");
  if (test_sets.empty()) throw Error(ErrorKind::InvalidArgument, "manifest lists no test sets");
  std::set<std::string> tags;
  for (const auto& m : models) {
    if (m.tag.empty() || !tags.insert(m.tag).second) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("model tag '{}' is empty or repeated", m.tag));
    }
    if (m.source) {
      require_file(m.source->heatmaps, m.tag);
      require_file(m.source->gts, m.tag);
    }
    for (const auto& s : m.mixed) {
      require_file(s.heatmaps, m.tag);
      require_file(s.gts, m.tag);
      if (!(s.weight > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("{}: mixed weights must be > 0", m.tag));
      }
    }
    if (m.calibration) require_file(*m.calibration, m.tag);
    if (m.calibration && m.fixed_radius) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("{}: give either calibration or fixed_radius", m.tag));
    }
    if (!m.calibration && !m.fixed_radius && !m.source && m.mixed.empty()) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("{}: needs a calibration, a fixed_radius, or training data", m.tag));
    }
  }
  tags.clear();
  for (const auto& t : test_sets) {
    if (t.tag.empty() || !tags.insert(t.tag).second) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("test set tag '{}' is empty or repeated", t.tag));
    }
    require_file(t.heatmaps, t.tag);
    require_file(t.gts, t.tag);
  }
  sampling.validate();
  sweep.validate();
}

RunManifest manifest_from_json(const io::Json& j, const fs::path& base_dir) {
  RunManifest m;
  try {
    reject_unknown(j, {"models", "test_sets", "sampling", "sweep", "bin_width", "min_count",
                       "baseline_radius", "seed", "output_dir", "svg"},
                   "top level");
    for (const auto& mj : j.at("models")) {
      reject_unknown(mj, {"tag", "heatmaps", "gts", "weight", "mixed", "mixed_count", "calibration",
                          "fixed_radius", "baseline_radius"},
                     "model");
      ModelSpec spec;
      spec.tag = mj.at("tag").get<std::string>();
      if (mj.contains("heatmaps")) {
        spec.source = source_from_json(mj, base_dir);
        spec.source->tag = spec.tag;
      }
      if (mj.contains("mixed")) {
        for (const auto& s : mj["mixed"]) spec.mixed.push_back(source_from_json(s, base_dir));
      }
      spec.mixed_count = mj.value("mixed_count", std::size_t{0});
      if (mj.contains("calibration")) spec.calibration = resolve(base_dir, mj["calibration"].get<std::string>());
      if (mj.contains("fixed_radius")) spec.fixed_radius = mj["fixed_radius"].get<double>();
      if (mj.contains("baseline_radius")) spec.baseline_radius = mj["baseline_radius"].get<double>();
      m.models.push_back(std::move(spec));
    }
    for (const auto& tj : j.at("test_sets")) m.test_sets.push_back(source_from_json(tj, base_dir));
    if (j.contains("sampling")) m.sampling = io::sampling_from_json(j["sampling"]);
    if (j.contains("sweep")) m.sweep = io::sweep_from_json(j["sweep"]);
    m.bin_width = j.value("bin_width", m.bin_width);
    m.min_count = j.value("min_count", m.min_count);
    m.default_baseline_radius = j.value("baseline_radius", m.default_baseline_radius);
    m.seed = j.value("seed", m.seed);
    if (j.contains("output_dir")) m.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    m.svg = j.value("svg", false);
  } catch (const io::Json::exception& e) {
    throw Error(ErrorKind::Parse, fmt::format("manifest: {}", e.what()));
  }
  m.validate();
  return m;
}

io::Json manifest_to_json(const RunManifest& m) {
  io::Json models = io::Json::array();
  for (const auto& spec : m.models) {
    io::Json mj{{"tag", spec.tag}};
    if (spec.source) {
      mj["heatmaps"] = spec.source->heatmaps.string();
      mj["gts"] = spec.source->gts.string();
    }
    if (!spec.mixed.empty()) {
      io::Json mixed = io::Json::array();
      for (const auto& s : spec.mixed) mixed.push_back(source_to_json(s));
      mj["mixed"] = std::move(mixed);
      mj["mixed_count"] = spec.mixed_count;
    }
    if (spec.calibration) mj["calibration"] = spec.calibration->string();
    if (spec.fixed_radius) mj["fixed_radius"] = *spec.fixed_radius;
    if (spec.baseline_radius) mj["baseline_radius"] = *spec.baseline_radius;
    models.push_back(std::move(mj));
  }
  io::Json tests = io::Json::array();
  for (const auto& t : m.test_sets) tests.push_back(source_to_json(t));
  return {{"models", models},
          {"test_sets", tests},
          {"sampling", io::sampling_to_json(m.sampling)},
          {"sweep", io::sweep_to_json(m.sweep)},
          {"bin_width", m.bin_width},
          {"min_count", m.min_count},
          {"baseline_radius", m.default_baseline_radius},
          {"seed", m.seed}};
}

std::vector<LabeledHeatmap> training_set(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.mixed.empty()) {
    if (!spec.source) return {};
    return load_labeled(spec.source->heatmaps, spec.source->gts);
  }
  // Mixed mode: each draw picks a source by weight, then a sample uniformly.
  std::vector<std::vector<LabeledHeatmap>> sources;
  std::vector<double> weights;
  std::size_t total = 0;
  for (const auto& s : spec.mixed) {
    sources.push_back(load_labeled(s.heatmaps, s.gts));
    weights.push_back(s.weight);
    total += sources.back().size();
  }
  const std::size_t count = spec.mixed_count > 0 ? spec.mixed_count : total;
  std::mt19937_64 rng(mix64(seed ^ stable_hash(spec.tag)));
  std::discrete_distribution<std::size_t> pick_source(weights.begin(), weights.end());
  std::vector<LabeledHeatmap> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& src = sources[pick_source(rng)];
    const auto j = std::uniform_int_distribution<std::size_t>(0, src.size() - 1)(rng);
    out.push_back(src[j]);
    out.back().sample_id = fmt::format("{}#{}", src[j].sample_id, i);
  }
  return out;
}

ExitCode ReportMatrix::exit_code() const {
  std::size_t failed = 0, total = 0;
  for (const auto& row : cells) {
    for (const auto& c : row) {
      ++total;
      failed += c.ok ? 0 : 1;
    }
  }
  return exit_code_for(failed, total);
}

namespace {

ModelSummary resolve_model(const ModelSpec& spec, const RunManifest& m, int workers) {
  ModelSummary s;
  s.tag = spec.tag;
  const auto training = training_set(spec, m.seed);
  s.training_count = training.size();

  if (spec.fixed_radius) {
    s.mode = "fixed";
    s.radius = *spec.fixed_radius;
  } else {
    s.mode = "adaptive";
    if (spec.calibration) {
      s.model = io::read_model(*spec.calibration);
    } else {
      CalibrationOptions opts;
      opts.k = m.sampling.k;
      opts.sweep = m.sweep;
      opts.bin_width = m.bin_width;
      opts.min_count = m.min_count;
      opts.workers = workers;
      s.model = calibrate(training, opts, spec.tag).model;
    }
  }

  if (spec.baseline_radius) {
    s.baseline_radius = *spec.baseline_radius;
  } else if (!training.empty()) {
    s.baseline_radius = best_fixed_radius(training, m.sampling.k, m.sweep, workers);
  } else if (spec.fixed_radius) {
    s.baseline_radius = *spec.fixed_radius;
  } else {
    s.baseline_radius = m.default_baseline_radius;
  }
  s.ok = true;
  return s;
}

SamplingConfig row_sampling(const ModelSummary& s, const SamplingConfig& base) {
  SamplingConfig cfg = base;
  if (s.mode == "fixed") {
    cfg.radius_mode = FixedRadius{s.radius};
  } else {
    cfg.radius_mode = AdaptiveRadius{*s.model};
  }
  return cfg;
}

}  // namespace

ReportMatrix cross_eval(const RunManifest& manifest, int workers) {
  manifest.validate();
  ReportMatrix out;
  out.k = manifest.sampling.k;
  out.config_hash = io::config_hash(manifest_to_json(manifest));
  for (const auto& spec : manifest.models) out.rows.push_back(spec.tag);
  for (const auto& t : manifest.test_sets) out.cols.push_back(t.tag);

  for (const auto& spec : manifest.models) {
    try {
      out.models.push_back(resolve_model(spec, manifest, workers));
    } catch (const std::exception& e) {
      spdlog::error("model '{}' failed: {}", spec.tag, e.what());
      ModelSummary s;
      s.tag = spec.tag;
      s.error = e.what();
      out.models.push_back(std::move(s));
    }
  }

  out.cells.assign(out.rows.size(), std::vector<MatrixCell>(out.cols.size()));
  for (std::size_t c = 0; c < manifest.test_sets.size(); ++c) {
    const auto& t = manifest.test_sets[c];
    std::vector<LabeledHeatmap> test;
    std::string load_error;
    try {
      test = load_labeled(t.heatmaps, t.gts);
    } catch (const std::exception& e) {
      load_error = e.what();
      spdlog::error("test set '{}' failed to load: {}", t.tag, load_error);
    }
    for (std::size_t r = 0; r < out.rows.size(); ++r) {
      MatrixCell& cell = out.cells[r][c];
      const ModelSummary& model = out.models[r];
      if (!model.ok) {
        cell.error = "model failed: " + model.error;
        continue;
      }
      if (!load_error.empty()) {
        cell.error = "test set failed: " + load_error;
        continue;
      }
      try {
        const Evaluation ev = evaluate(test, row_sampling(model, manifest.sampling), workers);
        SamplingConfig base = manifest.sampling;
        base.radius_mode = FixedRadius{model.baseline_radius};
        const Evaluation baseline = evaluate(test, base, workers);
        const std::size_t l = static_cast<std::size_t>(out.k) - 1;
        cell.count = ev.report.count;
        cell.min_fde = ev.report.min_fde[l];
        cell.miss_rate = ev.report.miss_rate[l];
        cell.baseline_min_fde = baseline.report.min_fde[l];
        cell.baseline_miss_rate = baseline.report.miss_rate[l];
        cell.improvement = cell.baseline_min_fde > 0.0
                               ? (cell.baseline_min_fde - cell.min_fde) / cell.baseline_min_fde
                               : 0.0;
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
        spdlog::error("cell ({}, {}) failed: {}", model.tag, t.tag, cell.error);
      }
    }
  }
  return out;
}

namespace {

std::string matrix_csv(const ReportMatrix& m, double MatrixCell::*field) {
  std::string csv = "train";
  for (const auto& c : m.cols) csv += "," + c;
  csv += '\n';
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    csv += m.rows[r];
    for (const auto& cell : m.cells[r]) csv += cell.ok ? fmt::format(",{}", cell.*field) : ",failed";
    csv += '\n';
  }
  return csv;
}

std::string matrix_markdown(const ReportMatrix& m, const std::string& title,
                            double MatrixCell::*field, const char* spec, double scale = 1.0) {
  std::string md = fmt::format("### {}\n\n| train \\ test |", title);
  for (const auto& c : m.cols) md += fmt::format(" {} |", c);
  md += "\n|---|";
  for (std::size_t i = 0; i < m.cols.size(); ++i) md += "---|";
  md += '\n';
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    md += fmt::format("| {} |", m.rows[r]);
    for (const auto& cell : m.cells[r]) {
      md += cell.ok ? fmt::format(fmt::runtime(std::string(" ") + spec + " |"), cell.*field * scale)
                    : std::string(" failed |");
    }
    md += '\n';
  }
  return md + '\n';
}

std::vector<std::vector<std::optional<double>>> matrix_values(const ReportMatrix& m,
                                                              double MatrixCell::*field) {
  std::vector<std::vector<std::optional<double>>> v(m.rows.size());
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    for (const auto& cell : m.cells[r]) {
      v[r].push_back(cell.ok ? std::optional<double>(cell.*field) : std::nullopt);
    }
  }
  return v;
}

}  // namespace

void write_report_matrix(const ReportMatrix& m, const fs::path& out_dir, bool svg) {
  io::Json models = io::Json::array();
  for (const auto& s : m.models) {
    io::Json mj{{"tag", s.tag}, {"ok", s.ok}, {"mode", s.mode}, {"baseline_radius", s.baseline_radius},
                {"training_count", s.training_count}};
    if (s.model) mj["model"] = io::model_to_json(*s.model);
    if (s.mode == "fixed") mj["radius"] = s.radius;
    if (!s.ok) mj["error"] = s.error;
    models.push_back(std::move(mj));
  }
  io::Json cells = io::Json::array();
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    io::Json row = io::Json::array();
    for (const auto& c : m.cells[r]) {
      if (!c.ok) {
        row.push_back({{"status", "failed"}, {"error", c.error}});
        continue;
      }
      row.push_back({{"status", "ok"},
                     {"count", c.count},
                     {fmt::format("min_fde_{}", m.k), c.min_fde},
                     {fmt::format("mr_{}", m.k), c.miss_rate},
                     {fmt::format("baseline_min_fde_{}", m.k), c.baseline_min_fde},
                     {fmt::format("baseline_mr_{}", m.k), c.baseline_miss_rate},
                     {"improvement", c.improvement}});
    }
    cells.push_back(std::move(row));
  }
  io::Json doc{{"k", m.k}, {"rows", m.rows}, {"cols", m.cols}, {"models", models},
               {"cells", cells}, {"config_hash", m.config_hash}};
  io::write_text_file(out_dir / "cross_eval.json", doc.dump(2) + "\n");
  io::write_text_file(out_dir / "min_fde.csv", matrix_csv(m, &MatrixCell::min_fde));
  io::write_text_file(out_dir / "miss_rate.csv", matrix_csv(m, &MatrixCell::miss_rate));
  io::write_text_file(out_dir / "improvement.csv", matrix_csv(m, &MatrixCell::improvement));

  std::string md = fmt::format("# Cross-dataset evaluation (config {})\n\n", m.config_hash);
  md += matrix_markdown(m, fmt::format("minFDE_{}", m.k), &MatrixCell::min_fde, "{:.3f}");
  md += matrix_markdown(m, fmt::format("MR_{}", m.k), &MatrixCell::miss_rate, "{:.3f}");
  md += matrix_markdown(m, fmt::format("Baseline (fixed radius) minFDE_{}", m.k),
                        &MatrixCell::baseline_min_fde, "{:.3f}");
  md += matrix_markdown(m, "Relative improvement over fixed radius", &MatrixCell::improvement,
                        "{:+.2f}%", 100.0);
  io::write_text_file(out_dir / "report.md", md);

  if (svg) {
    io::write_text_file(out_dir / "min_fde.svg",
                        svg::matrix_chart(fmt::format("minFDE_{}", m.k), m.rows, m.cols,
                                          matrix_values(m, &MatrixCell::min_fde)));
    io::write_text_file(out_dir / "miss_rate.svg",
                        svg::matrix_chart(fmt::format("MR_{}", m.k), m.rows, m.cols,
                                          matrix_values(m, &MatrixCell::miss_rate)));
    io::write_text_file(out_dir / "improvement.svg",
                        svg::matrix_chart("Relative improvement", m.rows, m.cols,
                                          matrix_values(m, &MatrixCell::improvement)));
  }
}

void write_run_metadata(const fs::path& out_dir, const std::string& command,
                        const std::string& config_hash) {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  io::Json meta{{"command", command}, {"config_hash", config_hash}, {"unix_time", secs}};
  io::write_text_file(out_dir / "run_metadata.json", meta.dump(2) + "\n");
}

}  // namespace hmtraj::harness
