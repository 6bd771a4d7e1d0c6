#include "hmtraj/synth.hpp"

#include <cmath>
#include <functional>
#include <random>

#include <fmt/format.h>

#include "hmtraj/error.hpp"
#include "hmtraj/io.hpp"
#include "hmtraj/numeric.hpp"
#include "hmtraj/parallel.hpp"

namespace hmtraj {

namespace {

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(mix64(mix64(seed) + index));
}

// Planted layout, all in cells of kPlantedRes meters.
constexpr double kPlantedRes = 0.02;
constexpr int kLineCells = 120;       // 2.4 m of line along +x
constexpr int kClusterSide = 10;      // 10 x 10 far cluster
constexpr int kClusterOffset = 750;   // 15 m behind the peak
constexpr double kPeakMass = 0.3;
constexpr double kMaxClusterMass = 17.5;

double line_mass(int i) { return 0.2 * (1.0 - i / 1000.0); }

struct PlantedLayout {
  GridSpec grid;
  int peak_row;
  int peak_col;
};

PlantedLayout planted_layout() {
  PlantedLayout l;
  l.peak_row = kClusterSide / 2;
  l.peak_col = kClusterOffset + kClusterSide / 2;
  l.grid.resolution = kPlantedRes;
  l.grid.origin_x = -l.peak_col * kPlantedRes;
  l.grid.origin_y = -l.peak_row * kPlantedRes;
  l.grid.width = l.peak_col + kLineCells + 1;
  l.grid.height = kClusterSide;
  return l;
}

Heatmap planted_heatmap(const PlantedLayout& l, double cluster_mass) {
  std::vector<Cell> cells;
  cells.push_back({l.grid.index(l.peak_row, l.peak_col), kPeakMass});
  for (int i = 1; i <= kLineCells; ++i) {
    cells.push_back({l.grid.index(l.peak_row, l.peak_col + i), line_mass(i)});
  }
  const double per_cell = cluster_mass / (kClusterSide * kClusterSide);
  if (per_cell > 0.0) {
    for (int r = 0; r < kClusterSide; ++r) {
      for (int c = 0; c < kClusterSide; ++c) cells.push_back({l.grid.index(r, c), per_cell});
    }
  }
  return normalize(Heatmap(l.grid, std::move(cells)));
}

void write_dataset(const std::filesystem::path& out_dir, std::size_t n, int workers,
                   const io::Json& manifest,
                   const std::function<Scenario(std::uint64_t)>& make, double write_min_prob) {
  std::vector<std::string> heat_lines(n);
  std::vector<std::string> gt_lines(n);
  parallel_for(n, workers, [&](std::size_t i) {
    Scenario s = make(i);
    Heatmap h = write_min_prob > 0.0 ? threshold_sparsify(s.heatmap, write_min_prob).heatmap
                                     : std::move(s.heatmap);
    heat_lines[i] = io::heatmap_to_json(s.sample_id, h).dump();
    gt_lines[i] = io::gt_to_json({s.sample_id, s.gt}).dump();
  });
  std::string heat;
  std::string gts;
  for (std::size_t i = 0; i < n; ++i) {
    heat += heat_lines[i];
    heat += '\n';
    gts += gt_lines[i];
    gts += '\n';
  }
  io::write_text_file(out_dir / "heatmaps.jsonl", heat);
  io::write_text_file(out_dir / "gt.jsonl", gts);
  io::write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

void ScenarioConfig::validate() const {
  if (min_modes < 1 || max_modes < min_modes) {
    throw Error(ErrorKind::InvalidArgument, "need 1 <= min_modes <= max_modes");
  }
  if (!(x_max >= x_min) || !(y_max >= y_min)) {
    throw Error(ErrorKind::InvalidArgument, "mean region is empty");
  }
  if (!(sigma_min > 0.0) || !(sigma_max >= sigma_min)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 < sigma_min <= sigma_max");
  }
  if (!(weight_floor >= 0.0) || weight_floor * max_modes > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "weight_floor * max_modes must not exceed 1");
  }
  if (!(truncate_sigmas >= 3.0)) throw Error(ErrorKind::InvalidArgument, "truncate_sigmas must be >= 3");
  grid.validate();
}

std::string scenario_id(std::uint64_t index) { return fmt::format("synth-{:07d}", index); }

Scenario sample_scenario(const ScenarioConfig& cfg, std::uint64_t index) {
  cfg.validate();
  auto rng = substream(cfg.seed, index);

  const int n = std::uniform_int_distribution<int>(cfg.min_modes, cfg.max_modes)(rng);
  std::exponential_distribution<double> gamma1(1.0);
  std::uniform_real_distribution<double> ux(cfg.x_min, cfg.x_max);
  std::uniform_real_distribution<double> uy(cfg.y_min, cfg.y_max);
  std::uniform_real_distribution<double> usigma(cfg.sigma_min, cfg.sigma_max);

  Scenario s;
  s.sample_id = scenario_id(index);
  std::vector<double> raw(static_cast<std::size_t>(n));
  double raw_total = 0.0;
  for (int m = 0; m < n; ++m) {
    raw[m] = gamma1(rng);
    raw_total += raw[m];
    MixtureMode mode;
    mode.mean = {ux(rng), uy(rng)};
    mode.sigma = usigma(rng);
    s.mixture.modes.push_back(mode);
  }
  // Dirichlet(1, ..., 1) weights lifted onto the floor.
  const double free_mass = 1.0 - n * cfg.weight_floor;
  CompensatedSum total;
  for (int m = 0; m < n; ++m) {
    s.mixture.modes[m].weight = cfg.weight_floor + free_mass * raw[m] / raw_total;
    total.add(s.mixture.modes[m].weight);
  }
  for (auto& mode : s.mixture.modes) mode.weight /= total.value();

  s.heatmap = render_mixture(s.mixture, cfg.grid, cfg.truncate_sigmas);

  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  const MixtureMode* chosen = &s.mixture.modes.back();
  for (const auto& mode : s.mixture.modes) {
    cumulative += mode.weight;
    if (u < cumulative) {
      chosen = &mode;
      break;
    }
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const double gx = normal(rng);
  const double gy = normal(rng);
  s.gt = {chosen->mean.x + chosen->sigma * gx, chosen->mean.y + chosen->sigma * gy};
  return s;
}

void PlantedRadiusConfig::validate() const {
  if (!(u_min >= 0.0) || !(u_max > u_min)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 <= u_min < u_max");
  }
  const double r_lo = slope * u_min + intercept;
  const double r_hi = slope * u_max + intercept;
  const double line_len = (kLineCells - 2) * kPlantedRes;
  if (!(std::min(r_lo, r_hi) > 0.05) || !(std::max(r_lo, r_hi) < line_len)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("planted radii must stay within (0.05, {}) m", line_len));
  }
}

RadiusSweepConfig planted_sweep() {
  RadiusSweepConfig sweep;
  sweep.r_values.clear();
  for (int j = 0; j < 250; ++j) sweep.r_values.push_back(0.01 + 0.02 * j);
  sweep.l_for_objective = kPlantedK;
  return sweep;
}

Scenario sample_planted_scenario(const PlantedRadiusConfig& cfg, std::uint64_t index) {
  cfg.validate();
  auto rng = substream(cfg.seed ^ 0x706c616e74656400ULL, index);
  const double target = std::uniform_real_distribution<double>(cfg.u_min, cfg.u_max)(rng);

  const PlantedLayout layout = planted_layout();
  double lo = 0.0;
  double hi = kMaxClusterMass;
  if (uncertainty(planted_heatmap(layout, lo)).spread > target ||
      uncertainty(planted_heatmap(layout, hi)).spread < target) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("planted uncertainty {} is out of the reachable range", target));
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (uncertainty(planted_heatmap(layout, mid)).spread < target ? lo : hi) = mid;
  }

  Scenario s;
  s.sample_id = fmt::format("planted-{:07d}", index);
  s.heatmap = planted_heatmap(layout, 0.5 * (lo + hi));
  const double u = uncertainty(s.heatmap).spread;
  const double r_star = cfg.slope * u + cfg.intercept;
  // The line cell just beyond sweep radius r sits r + res/2 from the peak.
  const Point2 peak = layout.grid.cell_center(layout.grid.index(layout.peak_row, layout.peak_col));
  s.gt = {peak.x + r_star + kPlantedRes / 2.0, peak.y};
  return s;
}

void generate_dataset(const ScenarioConfig& cfg, std::size_t n, const std::filesystem::path& out_dir,
                      double write_min_prob, int workers) {
  cfg.validate();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "dataset size must be >= 1");
  io::Json config = io::scenario_to_json(cfg);
  io::Json manifest{{"generator", "mixture"},
                    {"config", config},
                    {"config_hash", io::config_hash(config)},
                    {"seed", cfg.seed},
                    {"count", n},
                    {"write_min_prob", write_min_prob}};
  write_dataset(out_dir, n, workers, manifest,
                [&](std::uint64_t i) { return sample_scenario(cfg, i); }, write_min_prob);
}

void generate_planted_dataset(const PlantedRadiusConfig& cfg, std::size_t n,
                              const std::filesystem::path& out_dir, int workers) {
  cfg.validate();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "dataset size must be >= 1");
  io::Json config = io::planted_to_json(cfg);
  io::Json manifest{{"generator", "planted-radius"},
                    {"config", config},
                    {"config_hash", io::config_hash(config)},
                    {"seed", cfg.seed},
                    {"count", n},
                    {"sweep", io::sweep_to_json(planted_sweep())},
                    {"k", kPlantedK}};
  write_dataset(out_dir, n, workers, manifest,
                [&](std::uint64_t i) { return sample_planted_scenario(cfg, i); }, 0.0);
}

}  // namespace hmtraj
