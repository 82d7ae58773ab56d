#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qwit/run.hpp"

namespace qwit {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr int kLeft = 70;
constexpr int kRight = 180;
constexpr int kTop = 40;
constexpr int kBottom = 50;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<PlotSeries>& series, const std::vector<double>& rules) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  for (double r : rules) {
    if (!std::isfinite(r)) continue;
    y0 = std::min(y0, r);
    y1 = std::max(y1, r);
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0;
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-300) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"22\" font-size=\"14\">" << escape(title) << "</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << px(kTop + ph) << "\" x2=\"" << px(kLeft + pw) << "\" y2=\""
     << px(kTop + ph) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << px(kTop + ph)
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    os << "<text x=\"" << px(sx(xv)) << "\" y=\"" << px(kTop + ph + 16) << "\" text-anchor=\"middle\">" << num(xv)
       << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << px(sy(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
     << escape(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << px(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << px(kTop + ph / 2) << ")\">" << escape(y_label) << "</text>\n";
  for (double r : rules) {
    if (!std::isfinite(r)) continue;
    os << "<line x1=\"" << kLeft << "\" y1=\"" << px(sy(r)) << "\" x2=\"" << px(kLeft + pw) << "\" y2=\"" << px(sy(r))
       << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  }
  std::size_t idx = 0;
  for (const auto& s : series) {
    const char* colour = kPalette[idx % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : s.points) {
      if (std::isfinite(p.first) && std::isfinite(p.second)) pts.push_back(p);
    }
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (s.staircase && i > 0) os << px(sx(pts[i].first)) << ',' << px(sy(pts[i - 1].second)) << ' ';
      os << px(sx(pts[i].first)) << ',' << px(sy(pts[i].second)) << ' ';
    }
    os << "\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(idx);
    os << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << px(ly) << "\" x2=\"" << kWidth - kRight + 28
       << "\" y2=\"" << px(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 32 << "\" y=\"" << px(ly + 4) << "\">" << escape(s.name) << "</text>\n";
    ++idx;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace qwit
