#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hmtraj/geometry.hpp"

namespace hmtraj {

/// Regular grid geometry. Cell (row, col) has its center at
/// (origin_x + col * resolution, origin_y + row * resolution); cells are
/// indexed row-major, index = row * width + col.
struct GridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double resolution = 0.5;
  int width = 192;
  int height = 192;

  void validate() const;

  std::int64_t cell_count() const { return std::int64_t{width} * height; }
  std::int64_t index(int row, int col) const { return std::int64_t{row} * width + col; }
  int row_of(std::int64_t index) const { return static_cast<int>(index / width); }
  int col_of(std::int64_t index) const { return static_cast<int>(index % width); }
  Point2 cell_center(std::int64_t index) const {
    return {origin_x + col_of(index) * resolution, origin_y + row_of(index) * resolution};
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Default 192 x 192 grid at 0.5 m centered on `center`.
GridSpec centered_grid(Point2 center, double resolution = 0.5, int width = 192, int height = 192);

struct Cell {
  std::int64_t index = 0;
  double mass = 0.0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Sparse probability grid over the endpoint position at the horizon.
/// Cells are kept sorted by index whatever order they were supplied in.
/// Masses need not sum to one; see normalize().
class Heatmap {
 public:
  Heatmap() = default;
  /// Throws InvalidArgument on duplicate or out-of-range indices and on
  /// negative or non-finite masses.
  Heatmap(GridSpec grid, std::vector<Cell> cells);

  const GridSpec& grid() const { return grid_; }
  std::span<const Cell> cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  Point2 center(const Cell& c) const { return grid_.cell_center(c.index); }
  double total_mass() const;

  friend bool operator==(const Heatmap&, const Heatmap&) = default;

 private:
  GridSpec grid_;
  std::vector<Cell> cells_;
};

/// Spread of a heatmap: the summed variance U (m^2) and the mean position E.
struct UncertaintyEstimate {
  double spread = 0.0;
  Point2 expectation;
};

struct MixtureMode {
  double weight = 1.0;
  Point2 mean;
  double sigma = 1.0;  // isotropic std, meters
};

struct MixtureSpec {
  std::vector<MixtureMode> modes;

  void validate() const;
};

/// Divides masses by their sum and drops zero-mass cells. Throws ZeroMass
/// when nothing carries mass.
Heatmap normalize(const Heatmap& h);

/// E = sum_p H(p) * p over cell centers.
Point2 expectation(const Heatmap& h);

/// U = sum_p H(p) * |p - E|^2, returned together with E.
///
/// Single weighted pass (West's update) over coordinates taken relative to
/// the grid origin, so U does not depend on where the grid sits. Weights are
/// divided by their total, so unnormalized input gives the normalized answer.
UncertaintyEstimate uncertainty(const Heatmap& h);

struct WeightedPoint {
  Point2 position;
  double weight = 0.0;
};

/// Same estimator over arbitrary weighted positions.
UncertaintyEstimate weighted_spread(std::span<const WeightedPoint> points);

/// Discretizes a Gaussian mixture: each cell receives weight * density at its
/// center * resolution^2, counting only modes whose mean lies within
/// truncate_sigmas * sigma of the cell center. The result is normalized.
/// Logs a warning when the grid clips a mode's truncation disk.
Heatmap render_mixture(const MixtureSpec& m, const GridSpec& g, double truncate_sigmas = 4.0);

struct SparsifyResult {
  Heatmap heatmap;
  double dropped_mass = 0.0;  // fraction of the normalized input removed
};

/// Drops cells below `min_prob` (after normalizing) and renormalizes.
SparsifyResult threshold_sparsify(const Heatmap& h, double min_prob);

}  // namespace hmtraj
