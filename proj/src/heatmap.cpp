#include "hmtraj/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hmtraj/error.hpp"
#include "hmtraj/numeric.hpp"

namespace hmtraj {

namespace {

// Dense accumulation buffer limit for render_mixture.
constexpr std::int64_t kMaxRenderCells = std::int64_t{1} << 26;

}  // namespace

void GridSpec::validate() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw Error(ErrorKind::InvalidArgument, "grid resolution must be positive");
  }
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::InvalidArgument, "grid width and height must be >= 1");
  }
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) {
    throw Error(ErrorKind::InvalidArgument, "grid origin must be finite");
  }
}

GridSpec centered_grid(Point2 center, double resolution, int width, int height) {
  GridSpec g;
  g.resolution = resolution;
  g.width = width;
  g.height = height;
  g.origin_x = center.x - resolution * (width - 1) / 2.0;
  g.origin_y = center.y - resolution * (height - 1) / 2.0;
  return g;
}

Heatmap::Heatmap(GridSpec grid, std::vector<Cell> cells)
    : grid_(grid), cells_(std::move(cells)) {
  grid_.validate();
  std::sort(cells_.begin(), cells_.end(),
            [](const Cell& a, const Cell& b) { return a.index < b.index; });
  const std::int64_t n = grid_.cell_count();
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    if (c.index < 0 || c.index >= n) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("cell index {} outside grid of {} cells", c.index, n));
    }
    if (!std::isfinite(c.mass) || c.mass < 0.0) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("cell {} has invalid mass {}", c.index, c.mass));
    }
    if (i > 0 && cells_[i - 1].index == c.index) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("duplicate cell index {}", c.index));
    }
  }
}

double Heatmap::total_mass() const {
  CompensatedSum s;
  for (const Cell& c : cells_) s.add(c.mass);
  return s.value();
}

void MixtureSpec::validate() const {
  if (modes.empty()) throw Error(ErrorKind::InvalidArgument, "mixture has no modes");
  CompensatedSum total;
  for (const auto& m : modes) {
    if (!(m.weight > 0.0)) throw Error(ErrorKind::InvalidArgument, "mode weight must be > 0");
    if (!(m.sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "mode sigma must be > 0");
    if (!std::isfinite(m.mean.x) || !std::isfinite(m.mean.y)) {
      throw Error(ErrorKind::InvalidArgument, "mode mean must be finite");
    }
    total.add(m.weight);
  }
  if (std::abs(total.value() - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("mode weights sum to {}, expected 1", total.value()));
  }
}

Heatmap normalize(const Heatmap& h) {
  const double total = h.total_mass();
  if (!(total > 0.0)) throw Error(ErrorKind::ZeroMass, "heatmap has no probability mass");
  std::vector<Cell> cells;
  cells.reserve(h.size());
  for (const Cell& c : h.cells()) {
    if (c.mass > 0.0) cells.push_back({c.index, c.mass / total});
  }
  return Heatmap(h.grid(), std::move(cells));
}

Point2 expectation(const Heatmap& h) {
  const GridSpec& g = h.grid();
  CompensatedSum w;
  CompensatedSum sx;
  CompensatedSum sy;
  for (const Cell& c : h.cells()) {
    w.add(c.mass);
    sx.add(c.mass * (g.col_of(c.index) * g.resolution));
    sy.add(c.mass * (g.row_of(c.index) * g.resolution));
  }
  if (!(w.value() > 0.0)) throw Error(ErrorKind::ZeroMass, "heatmap has no probability mass");
  return {g.origin_x + sx.value() / w.value(), g.origin_y + sy.value() / w.value()};
}

namespace {

// West (1979) weighted incremental mean/variance.
struct SpreadAccumulator {
  double weight = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  CompensatedSum m2;

  void add(double x, double y, double w) {
    if (!(w > 0.0)) return;
    weight += w;
    const double dx = x - mean_x;
    const double dy = y - mean_y;
    const double r = w / weight;
    mean_x += r * dx;
    mean_y += r * dy;
    m2.add(w * (dx * (x - mean_x) + dy * (y - mean_y)));
  }

  double spread() const { return std::max(0.0, m2.value() / weight); }
};

}  // namespace

UncertaintyEstimate uncertainty(const Heatmap& h) {
  const GridSpec& g = h.grid();
  SpreadAccumulator acc;
  for (const Cell& c : h.cells()) {
    acc.add(g.col_of(c.index) * g.resolution, g.row_of(c.index) * g.resolution, c.mass);
  }
  if (!(acc.weight > 0.0)) throw Error(ErrorKind::ZeroMass, "heatmap has no probability mass");
  return {acc.spread(), {g.origin_x + acc.mean_x, g.origin_y + acc.mean_y}};
}

UncertaintyEstimate weighted_spread(std::span<const WeightedPoint> points) {
  if (points.empty()) throw Error(ErrorKind::EmptyInput, "no weighted points");
  // Relative to the first point, for the same reason the grid version uses
  // origin-relative coordinates.
  const Point2 ref = points.front().position;
  SpreadAccumulator acc;
  for (const auto& p : points) {
    if (p.weight < 0.0 || !std::isfinite(p.weight)) {
      throw Error(ErrorKind::InvalidArgument, "weights must be finite and non-negative");
    }
    acc.add(p.position.x - ref.x, p.position.y - ref.y, p.weight);
  }
  if (!(acc.weight > 0.0)) throw Error(ErrorKind::ZeroMass, "all weights are zero");
  return {acc.spread(), {ref.x + acc.mean_x, ref.y + acc.mean_y}};
}

Heatmap render_mixture(const MixtureSpec& m, const GridSpec& g, double truncate_sigmas) {
  m.validate();
  g.validate();
  if (!(truncate_sigmas >= 3.0)) {
    throw Error(ErrorKind::InvalidArgument, "truncate_sigmas must be >= 3");
  }
  if (g.cell_count() > kMaxRenderCells) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("grid of {} cells is too large to render", g.cell_count()));
  }

  std::vector<double> dense(static_cast<std::size_t>(g.cell_count()), 0.0);
  const double cell_area = g.resolution * g.resolution;
  const double x_max = g.origin_x + (g.width - 1) * g.resolution;
  const double y_max = g.origin_y + (g.height - 1) * g.resolution;

  for (const auto& mode : m.modes) {
    const double reach = truncate_sigmas * mode.sigma;
    if (mode.mean.x - reach < g.origin_x || mode.mean.x + reach > x_max ||
        mode.mean.y - reach < g.origin_y || mode.mean.y + reach > y_max) {
      spdlog::warn("grid clips mixture mode at ({}, {}) sigma {}", mode.mean.x, mode.mean.y,
                   mode.sigma);
    }
    const double norm = mode.weight * cell_area / (2.0 * std::numbers::pi * mode.sigma * mode.sigma);
    const double inv_two_var = 1.0 / (2.0 * mode.sigma * mode.sigma);
    const int c0 = std::max(0, static_cast<int>(std::floor((mode.mean.x - reach - g.origin_x) / g.resolution)));
    const int c1 = std::min(g.width - 1, static_cast<int>(std::ceil((mode.mean.x + reach - g.origin_x) / g.resolution)));
    const int r0 = std::max(0, static_cast<int>(std::floor((mode.mean.y - reach - g.origin_y) / g.resolution)));
    const int r1 = std::min(g.height - 1, static_cast<int>(std::ceil((mode.mean.y + reach - g.origin_y) / g.resolution)));
    for (int row = r0; row <= r1; ++row) {
      const double dy = g.origin_y + row * g.resolution - mode.mean.y;
      for (int col = c0; col <= c1; ++col) {
        const double dx = g.origin_x + col * g.resolution - mode.mean.x;
        const double d2 = dx * dx + dy * dy;
        if (d2 > reach * reach) continue;
        dense[static_cast<std::size_t>(g.index(row, col))] += norm * std::exp(-d2 * inv_two_var);
      }
    }
  }

  std::vector<Cell> cells;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] > 0.0) cells.push_back({static_cast<std::int64_t>(i), dense[i]});
  }
  if (cells.empty()) {
    throw Error(ErrorKind::ZeroMass, "no grid cell received mixture mass");
  }
  return normalize(Heatmap(g, std::move(cells)));
}

SparsifyResult threshold_sparsify(const Heatmap& h, double min_prob) {
  const Heatmap n = normalize(h);
  double max_prob = 0.0;
  for (const Cell& c : n.cells()) max_prob = std::max(max_prob, c.mass);
  if (!(min_prob >= 0.0) || !(min_prob < max_prob)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("min_prob {} must lie in [0, {})", min_prob, max_prob));
  }
  std::vector<Cell> kept;
  CompensatedSum dropped;
  for (const Cell& c : n.cells()) {
    if (c.mass < min_prob) {
      dropped.add(c.mass);
    } else {
      kept.push_back(c);
    }
  }
  if (dropped.value() == 0.0) return {n, 0.0};
  return {normalize(Heatmap(n.grid(), std::move(kept))), dropped.value()};
}

}  // namespace hmtraj
