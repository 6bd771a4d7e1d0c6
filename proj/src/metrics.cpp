#include "hmtraj/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "hmtraj/error.hpp"
#include "hmtraj/numeric.hpp"

namespace hmtraj {

double min_fde(const PredictionSet& p, Point2 gt, int l) {
  if (p.endpoints.empty()) throw Error(ErrorKind::EmptyInput, "prediction set has no endpoints");
  if (l < 1) throw Error(ErrorKind::InvalidArgument, "l must be >= 1");
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(l), p.endpoints.size());
  double best = distance(p.endpoints[0].position, gt);
  for (std::size_t i = 1; i < n; ++i) best = std::min(best, distance(p.endpoints[i].position, gt));
  return best;
}

bool is_miss(const PredictionSet& p, Point2 gt, int l, double threshold) {
  return min_fde(p, gt, l) > threshold;
}

EvalRecord make_record(std::string sample_id, const PredictionSet& p, Point2 gt, int k,
                       double threshold) {
  EvalRecord r;
  r.sample_id = std::move(sample_id);
  r.uncertainty = p.uncertainty ? p.uncertainty->spread : 0.0;
  r.radius_used = p.radius_used;
  r.fde_per_l.reserve(static_cast<std::size_t>(k));
  for (int l = 1; l <= k; ++l) {
    const double d = min_fde(p, gt, l);
    r.fde_per_l.push_back(d);
    r.miss_per_l.push_back(d > threshold);
  }
  return r;
}

AggregateReport aggregate(std::span<const EvalRecord> records) {
  if (records.empty()) throw Error(ErrorKind::EmptyInput, "no records to aggregate");
  const std::size_t k = records.front().fde_per_l.size();
  for (const auto& r : records) {
    if (r.fde_per_l.size() != k || r.miss_per_l.size() != k) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("record '{}' has {} entries, expected {}", r.sample_id,
                              r.fde_per_l.size(), k));
    }
  }
  AggregateReport rep;
  rep.count = records.size();
  std::vector<double> column(records.size());
  for (std::size_t l = 0; l < k; ++l) {
    std::size_t misses = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      column[i] = records[i].fde_per_l[l];
      misses += records[i].miss_per_l[l] ? 1 : 0;
    }
    rep.min_fde.push_back(order_insensitive_mean(column));
    rep.miss_rate.push_back(static_cast<double>(misses) / static_cast<double>(records.size()));
  }
  return rep;
}

std::vector<UncertaintyBin> bin_by_uncertainty(std::span<const EvalRecord> records,
                                               double bin_width, std::size_t min_count) {
  if (!(bin_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "bin_width must be positive");
  std::map<std::int64_t, std::vector<double>> bins;
  for (const auto& r : records) {
    if (r.fde_per_l.empty()) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("record '{}' has no minFDE", r.sample_id));
    }
    bins[floor_bin(r.uncertainty, bin_width)].push_back(r.fde_per_l.front());
  }
  std::vector<UncertaintyBin> out;
  for (auto& [key, errors] : bins) {
    if (errors.size() < min_count) continue;
    const std::size_t n = errors.size();
    out.push_back({static_cast<double>(key) * bin_width, order_insensitive_mean(std::move(errors)), n});
  }
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[idx[m]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorKind::InvalidArgument, "length mismatch");
  if (xs.size() < 2) throw Error(ErrorKind::EmptyInput, "need at least 2 pairs");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace hmtraj
