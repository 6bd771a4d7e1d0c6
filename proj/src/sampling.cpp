#include "hmtraj/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "hmtraj/error.hpp"

namespace hmtraj {

void SamplingConfig::validate() const {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (!(r_min > 0.0) || !(r_min <= r_max)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 < r_min <= r_max");
  }
  if (const auto* f = std::get_if<FixedRadius>(&radius_mode); f && !(f->r > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "fixed radius must be positive");
  }
  if (const auto* a = std::get_if<AdaptiveRadius>(&radius_mode)) a->model.validate();
}

NmsSampler::NmsSampler(const Heatmap& h) : heatmap_(h) {
  const auto cells = heatmap_.cells();
  order_.reserve(cells.size());
  for (std::uint32_t i = 0; i < cells.size(); ++i) {
    if (cells[i].mass > 0.0) order_.push_back(i);
  }
  if (order_.empty()) throw Error(ErrorKind::ZeroMass, "cannot sample an empty heatmap");
  // cells() is sorted by index, so equal masses keep ascending index order.
  std::stable_sort(order_.begin(), order_.end(), [&](std::uint32_t a, std::uint32_t b) {
    return cells[a].mass > cells[b].mass;
  });
}

PredictionSet NmsSampler::sample(int k, double r) const {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");

  const GridSpec& g = heatmap_.grid();
  const auto cells = heatmap_.cells();
  std::vector<char> live(cells.size(), 1);
  const int reach = static_cast<int>(std::floor(r / g.resolution)) + 1;

  PredictionSet out;
  out.radius_used = r;
  std::size_t cursor = 0;
  while (static_cast<int>(out.endpoints.size()) < k) {
    while (cursor < order_.size() && !live[order_[cursor]]) ++cursor;
    if (cursor == order_.size()) break;

    const Cell& peak = cells[order_[cursor]];
    const Point2 center = g.cell_center(peak.index);
    const int row = g.row_of(peak.index);
    const int col = g.col_of(peak.index);
    const int c0 = std::max(0, col - reach);
    const int c1 = std::min(g.width - 1, col + reach);

    double score = 0.0;
    for (int rr = std::max(0, row - reach); rr <= std::min(g.height - 1, row + reach); ++rr) {
      const std::int64_t lo = g.index(rr, c0);
      const std::int64_t hi = g.index(rr, c1);
      auto it = std::lower_bound(cells.begin(), cells.end(), lo,
                                 [](const Cell& c, std::int64_t v) { return c.index < v; });
      for (; it != cells.end() && it->index <= hi; ++it) {
        const auto pos = static_cast<std::size_t>(it - cells.begin());
        if (!live[pos]) continue;
        if (distance(g.cell_center(it->index), center) <= r) {
          score += it->mass;
          live[pos] = 0;
        }
      }
    }
    out.endpoints.push_back({center, score});
  }
  // Suppressed mass need not follow peak order; ties keep emission order.
  std::stable_sort(out.endpoints.begin(), out.endpoints.end(),
                   [](const Endpoint& a, const Endpoint& b) { return a.score > b.score; });
  return out;
}

PredictionSet nms_sample(const Heatmap& h, int k, double r) { return NmsSampler(h).sample(k, r); }

double adaptive_radius(double uncertainty, const CalibrationModel& model, double r_min,
                       double r_max) {
  if (!(uncertainty >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("uncertainty {} is negative", uncertainty));
  }
  return std::clamp(model.a * uncertainty + model.b, r_min, r_max);
}

double resolve_radius(const SamplingConfig& cfg, double uncertainty) {
  if (const auto* f = std::get_if<FixedRadius>(&cfg.radius_mode)) return f->r;
  const auto& adaptive = std::get<AdaptiveRadius>(cfg.radius_mode);
  return adaptive_radius(uncertainty, adaptive.model, cfg.r_min, cfg.r_max);
}

PredictionSet sample_with_uncertainty(const Heatmap& h, const SamplingConfig& cfg) {
  cfg.validate();
  const UncertaintyEstimate u = uncertainty(h);
  PredictionSet out = nms_sample(h, cfg.k, resolve_radius(cfg, u.spread));
  out.uncertainty = u;
  return out;
}

}  // namespace hmtraj
