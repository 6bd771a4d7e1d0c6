#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hmtraj::svg {

/// Polyline with markers, axes scaled to the data.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, std::span<const double> xs,
                       std::span<const double> ys);

/// Labeled matrix; empty cells are drawn grey and marked "failed".
std::string matrix_chart(const std::string& title, const std::vector<std::string>& rows,
                         const std::vector<std::string>& cols,
                         const std::vector<std::vector<std::optional<double>>>& values);

}  // namespace hmtraj::svg
