#include "hmtraj/io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include <fmt/format.h>

#include "hmtraj/error.hpp"
#include "hmtraj/numeric.hpp"

namespace hmtraj::io {

namespace fs = std::filesystem;

namespace {

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                std::string_view what) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, fmt::format("{} must be a JSON object", what));
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorKind::Parse, fmt::format("{}: unknown key '{}'", what, key));
    }
  }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

template <typename T>
T require(const Json& j, const char* key, std::string_view what) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw Error(ErrorKind::Parse, fmt::format("{}: missing '{}'", what, key));
  }
  return it->get<T>();
}

Json points_to_json(const Trajectory& t) {
  Json arr = Json::array();
  for (const auto& p : t.points()) arr.push_back({p.t, p.x, p.y});
  return arr;
}

Trajectory points_from_json(const Json& j, std::string_view what) {
  if (!j.is_array()) throw Error(ErrorKind::Parse, fmt::format("{} must be an array", what));
  std::vector<TimedPoint> pts;
  pts.reserve(j.size());
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 3) {
      throw Error(ErrorKind::Parse, fmt::format("{}: points must be [t, x, y]", what));
    }
    pts.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
  }
  return Trajectory(std::move(pts));
}

template <typename T, typename Parse>
std::vector<T> read_records(const fs::path& path, Parse parse) {
  std::vector<T> out;
  for (auto& line : read_jsonl(path)) {
    if (!line.value) {
      throw Error(ErrorKind::Parse, fmt::format("{}:{}: {}", path.string(), line.line_no, line.error));
    }
    try {
      out.push_back(parse(*line.value));
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("{}:{}: {}", path.string(), line.line_no, e.what()));
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::Parse, fmt::format("{}:{}: {}", path.string(), line.line_no, e.what()));
    }
  }
  return out;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error(ErrorKind::Io, fmt::format("cannot create directory '{}': {}",
                                             path.parent_path().string(), ec.message()));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  if (!out) throw Error(ErrorKind::Io, fmt::format("write to '{}' failed", path.string()));
}

Json read_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Parse, fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<JsonLine> read_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}' for reading", path.string()));
  std::vector<JsonLine> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    JsonLine jl;
    jl.line_no = line_no;
    try {
      jl.value = Json::parse(line);
    } catch (const Json::parse_error& e) {
      jl.error = e.what();
    }
    out.push_back(std::move(jl));
  }
  return out;
}

std::string format_number(double v) { return fmt::format("{}", v); }

std::string config_hash(const Json& config) {
  return fmt::format("{:016x}", stable_hash(config.dump()));
}

Json sample_to_json(const Sample& s) {
  Json j;
  j["id"] = s.id;
  j["dataset"] = s.dataset;
  j["past"] = points_to_json(s.past);
  j["future"] = points_to_json(s.future);
  Json neighbors = Json::array();
  for (const auto& n : s.neighbors) neighbors.push_back(points_to_json(n));
  j["neighbors"] = std::move(neighbors);
  j["is_predefined_target"] = s.is_predefined_target;
  return j;
}

Sample sample_from_json(const Json& j) {
  check_keys(j, {"id", "dataset", "past", "future", "neighbors", "is_predefined_target"}, "sample");
  Sample s;
  s.id = require<std::string>(j, "id", "sample");
  s.dataset = require<std::string>(j, "dataset", "sample");
  s.past = points_from_json(require<Json>(j, "past", "sample"), "past");
  s.future = points_from_json(require<Json>(j, "future", "sample"), "future");
  if (auto it = j.find("neighbors"); it != j.end() && !it->is_null()) {
    for (const auto& n : *it) s.neighbors.push_back(points_from_json(n, "neighbor"));
  }
  s.is_predefined_target = require<bool>(j, "is_predefined_target", "sample");
  return s;
}

Json grid_to_json(const GridSpec& g) {
  return {{"origin_x", g.origin_x}, {"origin_y", g.origin_y}, {"resolution", g.resolution},
          {"width", g.width},       {"height", g.height}};
}

GridSpec grid_from_json(const Json& j) {
  check_keys(j, {"origin_x", "origin_y", "resolution", "width", "height"}, "grid");
  GridSpec g;
  g.origin_x = require<double>(j, "origin_x", "grid");
  g.origin_y = require<double>(j, "origin_y", "grid");
  g.resolution = require<double>(j, "resolution", "grid");
  g.width = require<int>(j, "width", "grid");
  g.height = require<int>(j, "height", "grid");
  g.validate();
  return g;
}

Json heatmap_to_json(const std::string& sample_id, const Heatmap& h) {
  Json cells = Json::array();
  for (const Cell& c : h.cells()) cells.push_back({c.index, c.mass});
  return {{"sample_id", sample_id}, {"grid", grid_to_json(h.grid())}, {"cells", std::move(cells)}};
}

HeatmapRecord heatmap_from_json(const Json& j) {
  check_keys(j, {"sample_id", "grid", "cells"}, "heatmap");
  HeatmapRecord r;
  r.sample_id = require<std::string>(j, "sample_id", "heatmap");
  const GridSpec g = grid_from_json(require<Json>(j, "grid", "heatmap"));
  std::vector<Cell> cells;
  for (const auto& c : require<Json>(j, "cells", "heatmap")) {
    if (!c.is_array() || c.size() != 2) {
      throw Error(ErrorKind::Parse, "heatmap cells must be [index, probability]");
    }
    cells.push_back({c[0].get<std::int64_t>(), c[1].get<double>()});
  }
  r.heatmap = normalize(Heatmap(g, std::move(cells)));
  return r;
}

std::vector<HeatmapRecord> read_heatmaps(const fs::path& path) {
  return read_records<HeatmapRecord>(path, heatmap_from_json);
}

Json gt_to_json(const GroundTruth& g) {
  return {{"sample_id", g.sample_id}, {"gt", {g.gt.x, g.gt.y}}};
}

GroundTruth gt_from_json(const Json& j) {
  check_keys(j, {"sample_id", "gt"}, "ground truth");
  const Json p = require<Json>(j, "gt", "ground truth");
  if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::Parse, "gt must be [x, y]");
  return {require<std::string>(j, "sample_id", "ground truth"), {p[0].get<double>(), p[1].get<double>()}};
}

std::vector<GroundTruth> read_ground_truth(const fs::path& path) {
  return read_records<GroundTruth>(path, gt_from_json);
}

Json prediction_to_json(const std::string& sample_id, const PredictionSet& p) {
  Json endpoints = Json::array();
  for (const auto& e : p.endpoints) endpoints.push_back({e.position.x, e.position.y, e.score});
  Json j{{"sample_id", sample_id}, {"radius_used", p.radius_used}, {"endpoints", std::move(endpoints)}};
  j["uncertainty"] = p.uncertainty ? Json(p.uncertainty->spread) : Json(nullptr);
  return j;
}

PredictionSet prediction_from_json(const Json& j) {
  check_keys(j, {"sample_id", "radius_used", "uncertainty", "endpoints"}, "prediction");
  PredictionSet p;
  p.radius_used = require<double>(j, "radius_used", "prediction");
  if (auto it = j.find("uncertainty"); it != j.end() && !it->is_null()) {
    p.uncertainty = UncertaintyEstimate{it->get<double>(), {}};
  }
  for (const auto& e : require<Json>(j, "endpoints", "prediction")) {
    p.endpoints.push_back({{e.at(0).get<double>(), e.at(1).get<double>()}, e.at(2).get<double>()});
  }
  return p;
}

Json model_to_json(const CalibrationModel& m) {
  Json j{{"a", m.a}, {"b", m.b}, {"source_dataset", m.source_dataset}};
  j["bin_count"] = m.bin_count ? Json(*m.bin_count) : Json(nullptr);
  j["residual_rms"] = m.residual_rms ? Json(*m.residual_rms) : Json(nullptr);
  return j;
}

CalibrationModel model_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "calibration model must be a JSON object");
  CalibrationModel m;
  m.a = require<double>(j, "a", "calibration model");
  m.b = require<double>(j, "b", "calibration model");
  read_opt(j, "source_dataset", m.source_dataset);
  if (auto it = j.find("bin_count"); it != j.end() && !it->is_null()) m.bin_count = it->get<int>();
  if (auto it = j.find("residual_rms"); it != j.end() && !it->is_null()) {
    m.residual_rms = it->get<double>();
  }
  m.validate();
  return m;
}

CalibrationModel read_model(const fs::path& path) {
  try {
    return model_from_json(read_json_file(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Parse, fmt::format("{}: {}", path.string(), e.what()));
  }
}

CalibrationPreset read_preset(const fs::path& path) {
  const Json j = read_json_file(path);
  CalibrationPreset p;
  p.model = model_from_json(j);
  p.fixed_radius = require<double>(j, "fixed_radius", path.string());
  return p;
}

std::string eval_records_csv(const std::vector<EvalRecord>& records) {
  const std::size_t k = records.empty() ? 0 : records.front().fde_per_l.size();
  std::string out = "sample_id,uncertainty,radius_used";
  for (std::size_t l = 1; l <= k; ++l) out += fmt::format(",fde_{}", l);
  for (std::size_t l = 1; l <= k; ++l) out += fmt::format(",miss_{}", l);
  out += '\n';
  for (const auto& r : records) {
    out += fmt::format("{},{},{}", r.sample_id, r.uncertainty, r.radius_used);
    for (double d : r.fde_per_l) out += fmt::format(",{}", d);
    for (bool m : r.miss_per_l) out += m ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

std::vector<EvalRecord> eval_records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty records CSV");
  const auto header = split(line, ',');
  if (header.size() < 3 || (header.size() - 3) % 2 != 0 || header[0] != "sample_id") {
    throw Error(ErrorKind::Parse, "unexpected records CSV header");
  }
  const std::size_t k = (header.size() - 3) / 2;
  std::vector<EvalRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw Error(ErrorKind::Parse, "records CSV row has wrong width");
    EvalRecord r;
    r.sample_id = f[0];
    r.uncertainty = std::stod(f[1]);
    r.radius_used = std::stod(f[2]);
    for (std::size_t l = 0; l < k; ++l) r.fde_per_l.push_back(std::stod(f[3 + l]));
    for (std::size_t l = 0; l < k; ++l) r.miss_per_l.push_back(f[3 + k + l] == "1");
    out.push_back(std::move(r));
  }
  return out;
}

Json aggregate_to_json(const AggregateReport& r) {
  Json j{{"count", r.count}, {"min_fde", r.min_fde}, {"miss_rate", r.miss_rate}};
  for (std::size_t l = 0; l < r.min_fde.size(); ++l) {
    j[fmt::format("min_fde_{}", l + 1)] = r.min_fde[l];
    j[fmt::format("mr_{}", l + 1)] = r.miss_rate[l];
  }
  return j;
}

Json histogram_to_json(const Histogram& h) {
  Json bins = Json::array();
  for (const auto& b : h.bins) {
    bins.push_back({{"lower", b.lower}, {"count", b.count}, {"fraction", b.fraction}});
  }
  return {{"bin_width", h.bin_width}, {"total", h.total}, {"bins", std::move(bins)}};
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "x,y,count\n";
  for (const auto& b : h.bins) out += fmt::format("{},{},{}\n", b.lower, b.fraction, b.count);
  return out;
}

StandardizationConfig standardization_from_json(const Json& j) {
  check_keys(j, {"history_s", "horizon_s", "rate_hz"}, "standardization config");
  StandardizationConfig c;
  read_opt(j, "history_s", c.history_s);
  read_opt(j, "horizon_s", c.horizon_s);
  read_opt(j, "rate_hz", c.rate_hz);
  c.validate();
  return c;
}

Json standardization_to_json(const StandardizationConfig& c) {
  return {{"history_s", c.history_s}, {"horizon_s", c.horizon_s}, {"rate_hz", c.rate_hz}};
}

SamplingConfig sampling_from_json(const Json& j) {
  check_keys(j, {"k", "r_min", "r_max", "fixed_radius", "adaptive"}, "sampling config");
  SamplingConfig c;
  read_opt(j, "k", c.k);
  read_opt(j, "r_min", c.r_min);
  read_opt(j, "r_max", c.r_max);
  const bool has_fixed = j.contains("fixed_radius") && !j["fixed_radius"].is_null();
  const bool has_adaptive = j.contains("adaptive") && !j["adaptive"].is_null();
  if (has_fixed && has_adaptive) {
    throw Error(ErrorKind::Parse, "sampling config: give either fixed_radius or adaptive");
  }
  if (has_fixed) c.radius_mode = FixedRadius{j["fixed_radius"].get<double>()};
  if (has_adaptive) c.radius_mode = AdaptiveRadius{model_from_json(j["adaptive"])};
  c.validate();
  return c;
}

Json sampling_to_json(const SamplingConfig& c) {
  Json j{{"k", c.k}, {"r_min", c.r_min}, {"r_max", c.r_max}};
  if (const auto* f = std::get_if<FixedRadius>(&c.radius_mode)) {
    j["fixed_radius"] = f->r;
  } else {
    j["adaptive"] = model_to_json(std::get<AdaptiveRadius>(c.radius_mode).model);
  }
  return j;
}

RadiusSweepConfig sweep_from_json(const Json& j) {
  check_keys(j, {"r_values", "r_start", "r_stop", "r_step", "l_for_objective"}, "sweep config");
  RadiusSweepConfig c;
  read_opt(j, "r_values", c.r_values);
  if (j.contains("r_start") || j.contains("r_stop") || j.contains("r_step")) {
    if (j.contains("r_values")) {
      throw Error(ErrorKind::Parse, "sweep config: give r_values or r_start/r_stop/r_step");
    }
    const double start = require<double>(j, "r_start", "sweep config");
    const double stop = require<double>(j, "r_stop", "sweep config");
    const double step = require<double>(j, "r_step", "sweep config");
    if (!(step > 0.0)) throw Error(ErrorKind::Parse, "sweep config: r_step must be > 0");
    c.r_values.clear();
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) c.r_values.push_back(start + static_cast<double>(i) * step);
  }
  read_opt(j, "l_for_objective", c.l_for_objective);
  c.validate();
  return c;
}

Json sweep_to_json(const RadiusSweepConfig& c) {
  return {{"r_values", c.r_values}, {"l_for_objective", c.l_for_objective}};
}

KalmanConfig kalman_from_json(const Json& j) {
  check_keys(j, {"process_accel_std", "obs_std"}, "kalman config");
  KalmanConfig c;
  read_opt(j, "process_accel_std", c.process_accel_std);
  read_opt(j, "obs_std", c.obs_std);
  c.validate();
  return c;
}

Json kalman_to_json(const KalmanConfig& c) {
  return {{"process_accel_std", c.process_accel_std}, {"obs_std", c.obs_std}};
}

ScenarioConfig scenario_from_json(const Json& j) {
  check_keys(j,
             {"min_modes", "max_modes", "x_min", "x_max", "y_min", "y_max", "sigma_min",
              "sigma_max", "weight_floor", "truncate_sigmas", "grid", "seed"},
             "scenario config");
  ScenarioConfig c;
  read_opt(j, "min_modes", c.min_modes);
  read_opt(j, "max_modes", c.max_modes);
  read_opt(j, "x_min", c.x_min);
  read_opt(j, "x_max", c.x_max);
  read_opt(j, "y_min", c.y_min);
  read_opt(j, "y_max", c.y_max);
  read_opt(j, "sigma_min", c.sigma_min);
  read_opt(j, "sigma_max", c.sigma_max);
  read_opt(j, "weight_floor", c.weight_floor);
  read_opt(j, "truncate_sigmas", c.truncate_sigmas);
  if (auto it = j.find("grid"); it != j.end()) c.grid = grid_from_json(*it);
  read_opt(j, "seed", c.seed);
  c.validate();
  return c;
}

Json scenario_to_json(const ScenarioConfig& c) {
  return {{"min_modes", c.min_modes},       {"max_modes", c.max_modes},
          {"x_min", c.x_min},               {"x_max", c.x_max},
          {"y_min", c.y_min},               {"y_max", c.y_max},
          {"sigma_min", c.sigma_min},       {"sigma_max", c.sigma_max},
          {"weight_floor", c.weight_floor}, {"truncate_sigmas", c.truncate_sigmas},
          {"grid", grid_to_json(c.grid)},   {"seed", c.seed}};
}

PlantedRadiusConfig planted_from_json(const Json& j) {
  check_keys(j, {"slope", "intercept", "u_min", "u_max", "seed"}, "planted config");
  PlantedRadiusConfig c;
  read_opt(j, "slope", c.slope);
  read_opt(j, "intercept", c.intercept);
  read_opt(j, "u_min", c.u_min);
  read_opt(j, "u_max", c.u_max);
  read_opt(j, "seed", c.seed);
  c.validate();
  return c;
}

Json planted_to_json(const PlantedRadiusConfig& c) {
  return {{"slope", c.slope}, {"intercept", c.intercept}, {"u_min", c.u_min},
          {"u_max", c.u_max}, {"seed", c.seed}};
}

}  // namespace hmtraj::io
