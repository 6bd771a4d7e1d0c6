#pragma once

// Shared synthetic setups and CLI plumbing for the harness and acceptance
// tests.

#include <algorithm>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "cli.hpp"
#include "hmtraj/calibration.hpp"
#include "hmtraj/io.hpp"
#include "hmtraj/synth.hpp"

namespace fixture {

namespace fs = std::filesystem;
using hmtraj::GridSpec;
using hmtraj::ScenarioConfig;

// Single Gaussian scenarios centred near the origin. The grid leaves room
// for the 4 sigma truncation of a sigma = 5 mode.
inline ScenarioConfig single_mode(double sigma_min, double sigma_max, std::uint64_t seed) {
  ScenarioConfig c;
  c.min_modes = c.max_modes = 1;
  c.x_min = 0.0;
  c.x_max = 4.0;
  c.y_min = -2.0;
  c.y_max = 2.0;
  c.sigma_min = sigma_min;
  c.sigma_max = sigma_max;
  c.grid = GridSpec{-24.0, -24.0, 0.5, 97, 97};
  c.seed = seed;
  return c;
}

// Two uncertainty regimes whose best radius follows different lines in U:
// sharp heatmaps (sigma 0.5 to 1.5) and diffuse ones (sigma 1.5 to 5).
inline ScenarioConfig sharp(std::uint64_t seed) { return single_mode(0.5, 1.5, seed); }
inline ScenarioConfig diffuse(std::uint64_t seed) { return single_mode(1.5, 5.0, seed); }

// Compact single-mode mix used for the adaptive-versus-fixed comparison.
inline ScenarioConfig compact(std::uint64_t seed) {
  ScenarioConfig c = single_mode(0.5, 4.0, seed);
  c.grid = GridSpec{-20.0, -20.0, 0.5, 89, 89};
  return c;
}

inline std::vector<hmtraj::LabeledHeatmap> labeled(const ScenarioConfig& cfg, std::size_t n) {
  std::vector<hmtraj::LabeledHeatmap> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    hmtraj::Scenario s = hmtraj::sample_scenario(cfg, i);
    out.push_back({s.sample_id, std::move(s.heatmap), s.gt});
  }
  return out;
}

// Writes heatmaps.jsonl and gt.jsonl for a labeled dataset.
inline void write_dataset(const fs::path& dir, const std::vector<hmtraj::LabeledHeatmap>& data) {
  std::string heat, gts;
  for (const auto& d : data) {
    heat += hmtraj::io::heatmap_to_json(d.sample_id, d.heatmap).dump() + "\n";
    gts += hmtraj::io::gt_to_json({d.sample_id, d.gt}).dump() + "\n";
  }
  hmtraj::io::write_text_file(dir / "heatmaps.jsonl", heat);
  hmtraj::io::write_text_file(dir / "gt.jsonl", gts);
}

inline fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hmtraj_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Two-regime cross-evaluation setup under dir: sharp and diffuse training
// sets of 1000 and test sets of 500 drawn with different seeds. Returns the
// manifest, also written to dir/manifest.json with output under dir/out.
inline hmtraj::io::Json regime_manifest(const fs::path& dir) {
  write_dataset(dir / "sharp_train", labeled(sharp(21), 1000));
  write_dataset(dir / "sharp_test", labeled(sharp(1021), 500));
  write_dataset(dir / "diffuse_train", labeled(diffuse(22), 1000));
  write_dataset(dir / "diffuse_test", labeled(diffuse(1022), 500));
  auto source = [](const std::string& tag, const std::string& sub) {
    return hmtraj::io::Json{{"tag", tag}, {"heatmaps", sub + "/heatmaps.jsonl"}, {"gts", sub + "/gt.jsonl"}};
  };
  const hmtraj::io::Json m{
      {"models", {source("sharp", "sharp_train"), source("diffuse", "diffuse_train")}},
      {"test_sets", {source("sharp", "sharp_test"), source("diffuse", "diffuse_test")}},
      {"min_count", 20},
      {"output_dir", "out"}};
  hmtraj::io::write_text_file(dir / "manifest.json", m.dump(2));
  return m;
}

// Runs the command-line entry point in-process with logging silenced.
inline int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> words = {"hmtraj", "--log-level", "off"};
  words.insert(words.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& w : words) argv.push_back(w.data());
  return hmtraj::cli::run(static_cast<int>(argv.size()), argv.data());
}

inline std::string slurp(const fs::path& p) { return hmtraj::io::read_text_file(p); }

// Every regular file under dir, keyed by relative path, except the
// timestamped run metadata.
inline std::vector<std::pair<std::string, std::string>> tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "run_metadata.json") continue;
    out.emplace_back(fs::relative(e.path(), dir).string(), slurp(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fixture
