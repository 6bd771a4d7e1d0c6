#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "hmtraj/error.hpp"
#include "hmtraj/harness.hpp"

using namespace hmtraj;
using fixture::run_cli;
using fixture::fresh_dir;
using fixture::slurp;
using fixture::write_dataset;
using io::Json;
namespace fs = std::filesystem;

namespace {

// Raw scene sampled at `hz` over [-1, 3] s, moving at a constant velocity.
Json raw_scene(const std::string& id, double hz) {
  Json past = Json::array(), future = Json::array();
  const int steps = static_cast<int>(std::lround(4.0 * hz));
  for (int i = 0; i <= steps; ++i) {
    const double t = -1.0 + i / hz;
    const Json p = {t, 2.0 * t + 1.0, -0.5 * t};
    (t <= 1e-12 ? past : future).push_back(p);
  }
  return {{"id", id}, {"dataset", "demo"}, {"past", past}, {"future", future},
          {"neighbors", Json::array()}, {"is_predefined_target", true}};
}

void write_lines(const fs::path& p, const std::vector<Json>& lines) {
  std::string text;
  for (const auto& j : lines) text += j.dump() + "\n";
  io::write_text_file(p, text);
}

Json load(const fs::path& p) { return io::read_json_file(p); }

}  // namespace

TEST_CASE("exit codes") {
  CHECK(harness::exit_code_for(0, 5) == 0);
  CHECK(harness::exit_code_for(2, 5) == 2);
  CHECK(harness::exit_code_for(5, 5) == 1);
  CHECK(harness::exit_code_for(0, 0) == 1);
}

TEST_CASE("standardize command") {
  const fs::path dir = fresh_dir("std");

  io::write_text_file(dir / "empty.jsonl", "");
  CHECK(run_cli({"standardize", (dir / "empty.jsonl").string(), "--out", (dir / "o0").string()}) == 1);

  // Mixed rates come out at 10 Hz with 11 past and 30 future points.
  write_lines(dir / "mixed.jsonl", {raw_scene("a", 2.0), raw_scene("b", 5.0), raw_scene("c", 10.0)});
  CHECK(run_cli({"standardize", (dir / "mixed.jsonl").string(), "--out", (dir / "o1").string()}) == 0);
  const auto samples = harness::read_samples(dir / "o1" / "samples.jsonl");
  REQUIRE(samples.size() == 3);
  for (const auto& s : samples) {
    CHECK(s.past.size() == 11);
    CHECK(s.future.size() == 30);
    for (std::size_t i = 1; i < s.future.size(); ++i) {
      CHECK(std::abs(s.future[i].t - s.future[i - 1].t - 0.1) <= 1e-9);
    }
    CHECK(std::abs(s.future.back().x - 7.0) <= 1e-9);
  }
  CHECK(fs::exists(dir / "o1" / "run_metadata.json"));

  // Already standard input passes through unchanged.
  CHECK(run_cli({"standardize", (dir / "o1" / "samples.jsonl").string(), "--out", (dir / "o2").string()}) == 0);
  const auto again = harness::read_samples(dir / "o2" / "samples.jsonl");
  REQUIRE(again.size() == samples.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    REQUIRE(again[i].future.size() == samples[i].future.size());
    for (std::size_t j = 0; j < again[i].future.size(); ++j) {
      CHECK(distance(again[i].future[j].position(), samples[i].future[j].position()) <= 1e-9);
    }
    for (std::size_t j = 0; j < again[i].past.size(); ++j) {
      CHECK(distance(again[i].past[j].position(), samples[i].past[j].position()) <= 1e-9);
    }
  }

  // One bad line among good ones is a partial failure naming the sample.
  Json short_scene = raw_scene("short", 10.0);
  short_scene["future"] = Json::array({{0.1, 1.2, 0.0}, {0.2, 1.4, 0.0}});
  write_lines(dir / "partial.jsonl", {raw_scene("ok", 10.0), short_scene});
  io::write_text_file(dir / "partial.jsonl", slurp(dir / "partial.jsonl") + "{broken\n");
  CHECK(run_cli({"standardize", (dir / "partial.jsonl").string(), "--out", (dir / "o3").string()}) == 2);
  const Json report = load(dir / "o3" / "standardize_report.json");
  CHECK(report["total"] == 3);
  CHECK(report["standardized"] == 1);
  REQUIRE(report["failures"].size() == 2);
  CHECK(report["failures"][0]["sample_id"] == "short");
  CHECK(report["failures"][1]["line"] == 3);

  write_lines(dir / "bad.jsonl", {short_scene});
  CHECK(run_cli({"standardize", (dir / "bad.jsonl").string(), "--out", (dir / "o4").string()}) == 1);
  fs::remove_all(dir);
}

TEST_CASE("evaluate command") {
  const fs::path dir = fresh_dir("eval");

  // Point masses at the ground truth.
  GridSpec g{0, 0, 0.5, 20, 20};
  std::vector<LabeledHeatmap> exact;
  for (int i = 0; i < 8; ++i) {
    const std::int64_t idx = g.index(i, 2 * i);
    exact.push_back({"p" + std::to_string(i), Heatmap(g, {{idx, 1.0}}), g.cell_center(idx)});
  }
  write_dataset(dir / "exact", exact);
  CHECK(run_cli({"evaluate", "--heatmaps", (dir / "exact" / "heatmaps.jsonl").string(), "--gts",
             (dir / "exact" / "gt.jsonl").string(), "--radius", "1.5", "--out", (dir / "e0").string()}) == 0);
  const Json rep = load(dir / "e0" / "report.json");
  CHECK(rep["min_fde_6"] == 0.0);
  CHECK(rep["mr_6"] == 0.0);
  CHECK(rep.contains("config_hash"));

  // Shuffled input order gives byte-identical reports.
  auto data = fixture::labeled(fixture::compact(4), 60);
  write_dataset(dir / "a", data);
  std::mt19937_64 rng(7);
  std::shuffle(data.begin(), data.end(), rng);
  write_dataset(dir / "b", data);
  for (const char* which : {"a", "b"}) {
    CHECK(run_cli({"evaluate", "--heatmaps", (dir / which / "heatmaps.jsonl").string(), "--gts",
               (dir / which / "gt.jsonl").string(), "--preset", "argoverse", "--workers", "3", "--out",
               (dir / (std::string("r") + which)).string()}) == 0);
  }
  CHECK(slurp(dir / "ra" / "records.csv") == slurp(dir / "rb" / "records.csv"));
  CHECK(slurp(dir / "ra" / "report.json") == slurp(dir / "rb" / "report.json"));

  // Mismatched ids fail and name the offenders.
  std::vector<io::GroundTruth> gts;
  for (const auto& d : exact) gts.push_back({d.sample_id, d.gt});
  gts.pop_back();
  gts.push_back({"stray", {0, 0}});
  std::vector<io::HeatmapRecord> heat;
  for (const auto& d : exact) heat.push_back({d.sample_id, d.heatmap});
  try {
    harness::join_by_id(heat, gts);
    FAIL("expected id mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IdMismatch);
    CHECK(std::string(e.what()).find("p7") != std::string::npos);
    CHECK(std::string(e.what()).find("stray") != std::string::npos);
  }
  io::write_text_file(dir / "short_gt.jsonl", io::gt_to_json(gts.front()).dump() + "\n");
  CHECK(run_cli({"evaluate", "--heatmaps", (dir / "exact" / "heatmaps.jsonl").string(), "--gts",
             (dir / "short_gt.jsonl").string(), "--out", (dir / "e1").string()}) == 1);
  fs::remove_all(dir);
}

TEST_CASE("calibrated adaptive radius beats r = 1.5 on the default generator") {
  ScenarioConfig train_cfg;
  train_cfg.seed = 11;
  ScenarioConfig test_cfg = train_cfg;
  test_cfg.seed = 12;
  const auto train = fixture::labeled(train_cfg, 1500);
  const auto test = fixture::labeled(test_cfg, 500);
  CalibrationOptions opts;
  opts.bin_width = 5.0;
  opts.min_count = 20;
  const CalibrationModel model = calibrate(train, opts, "default").model;

  SamplingConfig fixed;
  fixed.radius_mode = FixedRadius{1.5};
  SamplingConfig adaptive;
  adaptive.radius_mode = AdaptiveRadius{model};
  const double f = harness::evaluate(test, fixed).report.min_fde[5];
  const double a = harness::evaluate(test, adaptive).report.min_fde[5];
  CHECK(a < f);
}

TEST_CASE("calibrate command") {
  const fs::path dir = fresh_dir("cal");
  const Json cfg{{"sweep", io::sweep_to_json(planted_sweep())}, {"bin_width", 2.0}, {"min_count", 20}};
  io::write_text_file(dir / "cfg.json", cfg.dump());
  REQUIRE(run_cli({"synth", "--planted", "-n", "1200", "--seed", "5", "--out", (dir / "data").string()}) == 0);
  REQUIRE(run_cli({"calibrate", "--heatmaps", (dir / "data" / "heatmaps.jsonl").string(), "--gts",
               (dir / "data" / "gt.jsonl").string(), "--k", "2", "--source", "planted", "--config",
               (dir / "cfg.json").string(), "--workers", "2", "--out", (dir / "fit").string()}) == 0);
  const CalibrationModel m = io::read_model(dir / "fit" / "calibration.json");
  CHECK(std::abs(m.a - 0.02) <= 0.05 * 0.02);
  CHECK(std::abs(m.b - 0.9) <= 0.05 * 0.9);
  CHECK(m.source_dataset == "planted");
  const std::string binned = slurp(dir / "fit" / "binned_radius.csv");
  CHECK(binned.rfind("x,y,count", 0) == 0);

  // Reloaded model gives the same radii as the in-memory fit.
  const auto data = harness::load_labeled(dir / "data" / "heatmaps.jsonl", dir / "data" / "gt.jsonl");
  CalibrationOptions opts;
  opts.k = kPlantedK;
  opts.sweep = planted_sweep();
  opts.bin_width = 2.0;
  opts.min_count = 20;
  const CalibrationModel mem = calibrate(data, opts, "planted").model;
  CHECK(mem.a == m.a);
  CHECK(mem.b == m.b);
  REQUIRE(run_cli({"sample", "--heatmaps", (dir / "data" / "heatmaps.jsonl").string(), "--model",
               (dir / "fit" / "calibration.json").string(), "--out", (dir / "pred").string()}) == 0);
  std::size_t n = 0;
  for (const auto& line : io::read_jsonl(dir / "pred" / "predictions.jsonl")) {
    const PredictionSet p = io::prediction_from_json(*line.value);
    REQUIRE(p.uncertainty);
    CHECK(p.radius_used == adaptive_radius(p.uncertainty->spread, mem, 0.1, 10.0));
    ++n;
  }
  CHECK(n == data.size());

  // Constant uncertainty cannot be fitted; the error names the bin count.
  GridSpec g{0, 0, 0.5, 9, 9};
  std::vector<LabeledHeatmap> flat;
  for (int i = 0; i < 150; ++i) flat.push_back({"f" + std::to_string(i), Heatmap(g, {{40, 1.0}}), {2.0, 2.0}});
  write_dataset(dir / "flat", flat);
  CHECK(run_cli({"calibrate", "--heatmaps", (dir / "flat" / "heatmaps.jsonl").string(), "--gts",
             (dir / "flat" / "gt.jsonl").string(), "--out", (dir / "flatfit").string()}) == 1);
  try {
    calibrate(flat, CalibrationOptions{}, "flat");
    FAIL("expected insufficient bins");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientBins);
    CHECK(std::string(e.what()).find("got 1") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("cross-eval") {
  const fs::path dir = fresh_dir("cross");
  const Json manifest = fixture::regime_manifest(dir);
  const harness::RunManifest m = harness::manifest_from_json(manifest, dir);
  const harness::ReportMatrix r = harness::cross_eval(m, 1);
  REQUIRE(r.rows.size() == 2);
  REQUIRE(r.cols.size() == 2);
  for (const auto& row : r.cells) {
    for (const auto& cell : row) REQUIRE(cell.ok);
  }
  // The model calibrated on each regime is best on that regime's test set.
  CHECK(r.cells[0][0].min_fde <= r.cells[1][0].min_fde);
  CHECK(r.cells[1][1].min_fde <= r.cells[0][1].min_fde);
  // Adaptive sampling never loses to the row's fixed-radius baseline.
  for (const auto& row : r.cells) {
    for (const auto& cell : row) CHECK(cell.improvement >= 0.0);
  }
  CHECK(r.models[0].mode == "adaptive");

  CHECK(run_cli({"cross-eval", (dir / "manifest.json").string()}) == 0);
  for (const char* f : {"cross_eval.json", "min_fde.csv", "miss_rate.csv", "improvement.csv", "report.md",
                        "run_metadata.json"}) {
    CHECK(fs::exists(dir / "out" / f));
  }
  CHECK(slurp(dir / "out" / "min_fde.csv").rfind("train,sharp,diffuse\n", 0) == 0);

  // 1 x 1 with a saved model equals a direct evaluation.
  io::write_text_file(dir / "sharp.json", io::model_to_json(*r.models[0].model).dump());
  const Json one{{"models", {{{"tag", "sharp"}, {"calibration", "sharp.json"}}}},
                 {"test_sets", {manifest["test_sets"][0]}},
                 {"baseline_radius", 1.5}};
  const harness::ReportMatrix r1 = harness::cross_eval(harness::manifest_from_json(one, dir), 2);
  SamplingConfig sc;
  sc.radius_mode = AdaptiveRadius{*r.models[0].model};
  const auto test = harness::load_labeled(dir / "sharp_test" / "heatmaps.jsonl", dir / "sharp_test" / "gt.jsonl");
  const auto ev = harness::evaluate(test, sc);
  CHECK(r1.cells[0][0].min_fde == ev.report.min_fde[5]);
  CHECK(r1.cells[0][0].miss_rate == ev.report.miss_rate[5]);
  CHECK(r1.cells[0][0].count == test.size());
  CHECK(r1.models[0].baseline_radius == 1.5);

  // A broken test set fails its column only.
  Json partial = one;
  partial["test_sets"].push_back({{"tag", "missing"}, {"heatmaps", "sharp.json"}, {"gts", "sharp.json"}});
  const harness::ReportMatrix r2 = harness::cross_eval(harness::manifest_from_json(partial, dir), 1);
  CHECK(r2.cells[0][0].ok);
  CHECK_FALSE(r2.cells[0][1].ok);
  CHECK(r2.exit_code() == harness::kPartialFailure);

  Json bad = one;
  bad["models"][0]["radius"] = 2.0;
  CHECK_THROWS_AS(harness::manifest_from_json(bad, dir), Error);
  Json dup = one;
  dup["test_sets"].push_back(one["test_sets"][0]);
  CHECK_THROWS_AS(harness::manifest_from_json(dup, dir), Error);
  fs::remove_all(dir);
}

TEST_CASE("mixed-dataset training draws") {
  const fs::path dir = fresh_dir("mixed");
  write_dataset(dir / "s", fixture::labeled(fixture::sharp(1), 40));
  write_dataset(dir / "d", fixture::labeled(fixture::diffuse(2), 40));
  harness::ModelSpec spec;
  spec.tag = "mix";
  spec.mixed = {{"s", dir / "s" / "heatmaps.jsonl", dir / "s" / "gt.jsonl", 1.0},
                {"d", dir / "d" / "heatmaps.jsonl", dir / "d" / "gt.jsonl", 3.0}};
  spec.mixed_count = 400;
  const auto a = harness::training_set(spec, 9);
  const auto b = harness::training_set(spec, 9);
  REQUIRE(a.size() == 400);
  std::size_t from_s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].sample_id == b[i].sample_id);
    // Sharp ids come from the first source; diffuse draws have larger spread.
    if (uncertainty(a[i].heatmap).spread < 2 * 1.5 * 1.5) ++from_s;
  }
  // Weight 1:3 gives about 100 sharp draws (binomial sd ~8.7).
  CHECK(from_s >= 70);
  CHECK(from_s <= 130);
  fs::remove_all(dir);
}

TEST_CASE("analysis commands") {
  const fs::path dir = fresh_dir("analysis");
  std::vector<Json> still;
  for (int i = 0; i < 5; ++i) {
    Json s = raw_scene("s" + std::to_string(i), 10.0);
    for (auto* part : {&s["past"], &s["future"]}) {
      for (auto& p : *part) {
        p[1] = 3.0 * i;
        p[2] = -1.0;
      }
    }
    still.push_back(s);
  }
  write_lines(dir / "raw.jsonl", still);
  REQUIRE(run_cli({"standardize", (dir / "raw.jsonl").string(), "--out", (dir / "std").string()}) == 0);
  const std::string samples = (dir / "std" / "samples.jsonl").string();

  REQUIRE(run_cli({"analysis", "speed-report", "--samples", samples, "--out", (dir / "speed").string()}) == 0);
  Json h = load(dir / "speed" / "speed_histogram.json");
  REQUIRE(h["bins"].size() == 1);
  CHECK(h["bins"][0]["lower"] == 0.0);
  CHECK(h["bins"][0]["fraction"] == 1.0);
  CHECK(slurp(dir / "speed" / "speed_histogram.csv").rfind("x,y,count\n", 0) == 0);

  REQUIRE(run_cli({"analysis", "noise-report", "--samples", samples, "--svg", "--out", (dir / "noise").string()}) == 0);
  h = load(dir / "noise" / "noise_histogram.json");
  REQUIRE(h["bins"].size() == 1);
  CHECK(h["bins"][0]["fraction"] == 1.0);
  CHECK(slurp(dir / "noise" / "noise.csv").rfind("sample_id,noise_m\n", 0) == 0);
  CHECK(fs::exists(dir / "noise" / "noise_histogram.svg"));

  write_dataset(dir / "u", fixture::labeled(fixture::compact(3), 300));
  const Json cfg{{"min_count", 10}};
  io::write_text_file(dir / "cfg.json", cfg.dump());
  REQUIRE(run_cli({"analysis", "uncertainty-error", "--heatmaps", (dir / "u" / "heatmaps.jsonl").string(), "--gts",
               (dir / "u" / "gt.jsonl").string(), "--config", (dir / "cfg.json").string(), "--out",
               (dir / "ue").string()}) == 0);
  CHECK(slurp(dir / "ue" / "uncertainty_error.csv").rfind("x,y,count\n", 0) == 0);
  const Json ue = load(dir / "ue" / "uncertainty_error.json");
  CHECK(ue["samples"] == 300);
  CHECK(ue["bins"].get<int>() >= 2);

  io::write_text_file(dir / "typo.json", R"({"min_cnt": 10})");
  CHECK(run_cli({"analysis", "speed-report", "--samples", samples, "--config", (dir / "typo.json").string(),
             "--out", (dir / "x").string()}) == 1);
  fs::remove_all(dir);
}
