#include "hmtraj/svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace hmtraj::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMargin = 60.0;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, std::span<const double> xs,
                       std::span<const double> ys) {
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
      kWidth, kHeight, kWidth / 2, escape(title));
  const double x0 = kMargin, x1 = kWidth - kMargin / 2, y0 = kHeight - kMargin, y1 = kMargin;
  out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", x0, y0, x1, y0);
  out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", x0, y0, x0, y1);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
                     (x0 + x1) / 2, kHeight - 20, escape(x_label));
  out += fmt::format(
      "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 {})\">{}</text>\n",
      (y0 + y1) / 2, (y0 + y1) / 2, escape(y_label));

  const std::size_t n = std::min(xs.size(), ys.size());
  if (n == 0) return out + "</svg>\n";
  const auto [xmin_it, xmax_it] = std::minmax_element(xs.begin(), xs.begin() + n);
  const auto [ymin_it, ymax_it] = std::minmax_element(ys.begin(), ys.begin() + n);
  const double xmin = *xmin_it, xmax = *xmax_it > *xmin_it ? *xmax_it : *xmin_it + 1.0;
  const double ymin = std::min(0.0, *ymin_it), ymax = *ymax_it > ymin ? *ymax_it : ymin + 1.0;
  auto px = [&](double x) { return x0 + (x - xmin) / (xmax - xmin) * (x1 - x0); };
  auto py = [&](double y) { return y0 - (y - ymin) / (ymax - ymin) * (y0 - y1); };

  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\">{:.3g}</text>\n", x0, y0 + 14, xmin);
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.3g}</text>\n", x1, y0 + 14, xmax);
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.3g}</text>\n", x0 - 4, y1 + 4, ymax);
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.3g}</text>\n", x0 - 4, y0, ymin);

  std::string pts;
  for (std::size_t i = 0; i < n; ++i) pts += fmt::format("{:.2f},{:.2f} ", px(xs[i]), py(ys[i]));
  out += fmt::format("<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"{}\"/>\n", pts);
  for (std::size_t i = 0; i < n; ++i) {
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"steelblue\"/>\n", px(xs[i]), py(ys[i]));
  }
  return out + "</svg>\n";
}

std::string matrix_chart(const std::string& title, const std::vector<std::string>& rows,
                         const std::vector<std::string>& cols,
                         const std::vector<std::vector<std::optional<double>>>& values) {
  const double cell = 90.0;
  const double left = 120.0, top = 70.0;
  const double width = left + cell * static_cast<double>(cols.size()) + 20.0;
  const double height = top + cell * static_cast<double>(rows.size()) + 20.0;

  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& row : values) {
    for (const auto& v : row) {
      if (!v) continue;
      lo = any ? std::min(lo, *v) : *v;
      hi = any ? std::max(hi, *v) : *v;
      any = true;
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
      width, height, width / 2, escape(title));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
                       left + cell * (c + 0.5), top - 10, escape(cols[c]));
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"12\">{}</text>\n",
                       left - 8, top + cell * (r + 0.5) + 4, escape(rows[r]));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto& v = values[r][c];
      std::string fill = "#cccccc";
      std::string label = "failed";
      if (v) {
        const double t = (*v - lo) / span;
        const int shade = static_cast<int>(std::lround(255.0 - 155.0 * t));
        fill = fmt::format("rgb({},{},255)", shade, shade);
        label = fmt::format("{:.3f}", *v);
      }
      out += fmt::format(
          "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"white\"/>\n"
          "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
          left + cell * c, top + cell * r, cell, cell, fill, left + cell * (c + 0.5),
          top + cell * (r + 0.5) + 4, label);
    }
  }
  return out + "</svg>\n";
}

}  // namespace hmtraj::svg
