#include "hmtraj/histogram.hpp"

#include <cstdint>
#include <map>

#include "hmtraj/error.hpp"
#include "hmtraj/numeric.hpp"

namespace hmtraj {

Histogram make_histogram(std::span<const double> values, double bin_width) {
  if (!(bin_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "bin_width must be positive");
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "histogram of an empty set");

  std::map<std::int64_t, std::size_t> counts;
  for (double v : values) ++counts[floor_bin(v, bin_width)];

  Histogram h;
  h.bin_width = bin_width;
  h.total = values.size();
  const auto n = static_cast<double>(values.size());
  for (const auto& [key, count] : counts) {
    h.bins.push_back({static_cast<double>(key) * bin_width, count, static_cast<double>(count) / n});
  }
  return h;
}

}  // namespace hmtraj
