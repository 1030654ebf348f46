#include "cnma/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cnma/error.hpp"

namespace cnma {

namespace {

constexpr double kWidth = 720.0;
constexpr double kLabelWidth = 150.0;
constexpr double kPlotWidth = 330.0;
constexpr double kRowHeight = 28.0;
constexpr double kTop = 50.0;

std::string escape(const std::string& s) {
  std::string out;
  for (const char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string format_3dp(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string forest_svg(const std::vector<ForestRow>& rows, const std::string& title,
                       const std::string& axis_label) {
  if (rows.empty()) {
    throw Error(ErrorCode::InvalidArgument, "forest plot needs at least one row");
  }
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& r : rows) {
    if (!std::isfinite(r.point) || !std::isfinite(r.lower) || !std::isfinite(r.upper)) {
      throw Error(ErrorCode::InvalidArgument, "forest row '" + r.label + "' is not finite");
    }
    lo = std::min({lo, r.lower, r.point});
    hi = std::max({hi, r.upper, r.point});
  }
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto x_of = [&](double v) { return kLabelWidth + (v - lo) / (hi - lo) * kPlotWidth; };

  const double height = kTop + kRowHeight * static_cast<double>(rows.size()) + 50.0;
  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" +
         px(height) + "\" viewBox=\"0 0 " + px(kWidth) + " " + px(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + px(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" + escape(title) + "</text>\n";

  const double bottom = kTop + kRowHeight * static_cast<double>(rows.size());
  const double zero = x_of(0.0);
  svg += "<line x1=\"" + px(zero) + "\" y1=\"" + px(kTop - 8) + "\" x2=\"" + px(zero) + "\" y2=\"" +
         px(bottom) + "\" stroke=\"#888888\" stroke-dasharray=\"4,3\"/>\n";

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double y = kTop + kRowHeight * (static_cast<double>(i) + 0.5);
    svg += "<g>\n";
    svg += "<text x=\"" + px(kLabelWidth - 10) + "\" y=\"" + px(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"13\">" + escape(r.label) +
           "</text>\n";
    svg += "<line x1=\"" + px(x_of(r.lower)) + "\" y1=\"" + px(y) + "\" x2=\"" + px(x_of(r.upper)) +
           "\" y2=\"" + px(y) + "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    svg += "<rect x=\"" + px(x_of(r.point) - 4) + "\" y=\"" + px(y - 4) +
           "\" width=\"8\" height=\"8\" fill=\"black\"/>\n";
    svg += "<text x=\"" + px(kLabelWidth + kPlotWidth + 15) + "\" y=\"" + px(y + 4) +
           "\" font-family=\"monospace\" font-size=\"12\">" + format_3dp(r.point) + " [" +
           format_3dp(r.lower) + ", " + format_3dp(r.upper) + "]</text>\n";
    svg += "</g>\n";
  }

  svg += "<line x1=\"" + px(kLabelWidth) + "\" y1=\"" + px(bottom) + "\" x2=\"" +
         px(kLabelWidth + kPlotWidth) + "\" y2=\"" + px(bottom) + "\" stroke=\"black\"/>\n";
  for (const double tick : {lo + pad, 0.0, hi - pad}) {
    svg += "<line x1=\"" + px(x_of(tick)) + "\" y1=\"" + px(bottom) + "\" x2=\"" + px(x_of(tick)) +
           "\" y2=\"" + px(bottom + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + px(x_of(tick)) + "\" y=\"" + px(bottom + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           format_3dp(tick) + "</text>\n";
  }
  svg += "<text x=\"" + px(kLabelWidth + kPlotWidth / 2) + "\" y=\"" + px(bottom + 38) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         escape(axis_label) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace cnma
