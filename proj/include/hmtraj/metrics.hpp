#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hmtraj/sampling.hpp"

namespace hmtraj {

inline constexpr double kMissThreshold = 2.0;

/// Smallest distance from gt to the first l endpoints; l clamps to the
/// available count. Throws EmptyInput when there are no endpoints.
double min_fde(const PredictionSet& p, Point2 gt, int l);

/// True iff min_fde(p, gt, l) > threshold; exactly at the threshold is a hit.
bool is_miss(const PredictionSet& p, Point2 gt, int l, double threshold = kMissThreshold);

struct EvalRecord {
  std::string sample_id;
  double uncertainty = 0.0;
  double radius_used = 0.0;
  std::vector<double> fde_per_l;   // minFDE_1 .. minFDE_k
  std::vector<bool> miss_per_l;    // MR indicator per l
};

EvalRecord make_record(std::string sample_id, const PredictionSet& p, Point2 gt, int k,
                       double threshold = kMissThreshold);

struct AggregateReport {
  std::size_t count = 0;
  std::vector<double> min_fde;    // mean minFDE_l, l = 1..k
  std::vector<double> miss_rate;  // MR_l
};

/// Per-l means. Values are sorted before the compensated sum, so the result
/// is bit-identical for any permutation of the input.
AggregateReport aggregate(std::span<const EvalRecord> records);

struct UncertaintyBin {
  double lower = 0.0;
  double mean_min_fde1 = 0.0;
  std::size_t count = 0;
};

/// Buckets records by floor(U / bin_width), drops bins with fewer than
/// min_count records, reports mean minFDE_1 per surviving bin.
std::vector<UncertaintyBin> bin_by_uncertainty(std::span<const EvalRecord> records,
                                               double bin_width = 1.0,
                                               std::size_t min_count = 100);

/// Spearman rank correlation with average ranks for ties.
double spearman_rho(std::span<const double> xs, std::span<const double> ys);

}  // namespace hmtraj
