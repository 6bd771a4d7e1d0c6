#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hmtraj {

struct HistogramBin {
  double lower = 0.0;
  std::size_t count = 0;
  double fraction = 0.0;
};

/// Floor-binned histogram; only populated bins are stored, ascending.
struct Histogram {
  double bin_width = 1.0;
  std::size_t total = 0;
  std::vector<HistogramBin> bins;
};

/// Throws EmptyInput on no values, InvalidArgument on bin_width <= 0.
Histogram make_histogram(std::span<const double> values, double bin_width);

}  // namespace hmtraj
