#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "netcut/explorer.hpp"
#include "netcut/report.hpp"

// Static latency/accuracy scatter plot. One circle per point, coloured by
// source network; frontier points are joined by a step line and the deadline
// is drawn as a vertical dashed line.
namespace netcut::svg {

inline std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
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

// "Nice" tick step covering `span` with roughly `target` intervals.
inline double tick_step(double span, int target = 6) {
  if (!(span > 0)) return 1;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return mag * (r < 1.5 ? 1 : r < 3 ? 2 : r < 7 ? 5 : 10);
}

struct PlotOptions {
  std::optional<double> deadline_ms;
  std::string title = "Latency vs. accuracy";
  int width = 800;
  int height = 560;
};

inline void write_scatter(std::ostream& os, const std::vector<ParetoPoint>& points,
                          const std::vector<ParetoPoint>& frontier, const PlotOptions& opt = {}) {
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const double left = 70, right = 170, top = 40, bottom = 60;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!points.empty()) {
    xmin = ymin = std::numeric_limits<double>::infinity();
    xmax = ymax = -std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
      xmin = std::min(xmin, p.latency_ms);
      xmax = std::max(xmax, p.latency_ms);
      ymin = std::min(ymin, p.accuracy);
      ymax = std::max(ymax, p.accuracy);
    }
  }
  if (opt.deadline_ms) {
    xmin = std::min(xmin, *opt.deadline_ms);
    xmax = std::max(xmax, *opt.deadline_ms);
  }
  xmin = std::min(0.0, xmin);
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) {
    ymin -= 0.05;
    ymax += 0.05;
  }
  const double xs = tick_step(xmax - xmin), ys = tick_step(ymax - ymin);
  xmax = std::ceil(xmax / xs) * xs;
  ymin = std::floor(ymin / ys) * ys;
  ymax = std::ceil(ymax / ys) * ys;

  auto X = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double v) { return top + ph - (v - ymin) / (ymax - ymin) * ph; };

  std::map<std::string, std::string> colour;
  for (const auto& p : points) {
    if (!colour.count(p.trn.source)) colour[p.trn.source] = "";
  }
  std::size_t k = 0;
  for (auto& [name, c] : colour) c = kPalette[k++ % std::size(kPalette)];

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
     << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << opt.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(opt.title)
     << "</text>\n";

  os << "<g class=\"axes\" stroke=\"#333\">\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n";
  os << "</g>\n<g class=\"ticks\" fill=\"#333\">\n";
  for (double v = xmin; v <= xmax + xs * 1e-9; v += xs) {
    os << "<line x1=\"" << X(v) << "\" y1=\"" << top + ph << "\" x2=\"" << X(v) << "\" y2=\"" << top + ph + 5
       << "\" stroke=\"#333\"/><text x=\"" << X(v) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
       << format_number(std::round(v / xs) * xs) << "</text>\n";
  }
  for (double v = ymin; v <= ymax + ys * 1e-9; v += ys) {
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << Y(v) << "\" x2=\"" << left << "\" y2=\"" << Y(v)
       << "\" stroke=\"#333\"/><text x=\"" << left - 8 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\">"
       << format_number(std::round(v / ys) * ys) << "</text>\n";
  }
  os << "</g>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << opt.height - 15 << "\" text-anchor=\"middle\">latency (ms)</text>\n";
  os << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << top + ph / 2
     << ")\">accuracy</text>\n";

  if (opt.deadline_ms) {
    os << "<line class=\"deadline\" x1=\"" << X(*opt.deadline_ms) << "\" y1=\"" << top << "\" x2=\""
       << X(*opt.deadline_ms) << "\" y2=\"" << top + ph
       << "\" stroke=\"#c00\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
    os << "<text x=\"" << X(*opt.deadline_ms) + 4 << "\" y=\"" << top + 12 << "\" fill=\"#c00\">deadline "
       << format_number(*opt.deadline_ms) << " ms</text>\n";
  }

  if (frontier.size() > 1) {
    os << "<polyline class=\"frontier\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      if (i > 0) os << ' ' << X(frontier[i].latency_ms) << ',' << Y(frontier[i - 1].accuracy);
      os << (i ? " " : "") << X(frontier[i].latency_ms) << ',' << Y(frontier[i].accuracy);
    }
    os << "\"/>\n";
  }

  std::set<std::pair<std::string, std::size_t>> on;
  for (const auto& p : frontier) on.emplace(p.trn.source, p.trn.cutpoint);
  os << "<g class=\"points\">\n";
  for (const auto& p : points) {
    const bool f = on.count({p.trn.source, p.trn.cutpoint}) > 0;
    os << "<circle cx=\"" << X(p.latency_ms) << "\" cy=\"" << Y(p.accuracy) << "\" r=\"" << (f ? 4.5 : 3)
       << "\" fill=\"" << colour[p.trn.source] << "\"" << (f ? " stroke=\"black\"" : "") << "><title>"
       << escape(p.trn.source) << '/' << p.trn.cutpoint << ": " << format_number(p.latency_ms) << " ms, "
       << format_number(p.accuracy) << "</title></circle>\n";
  }
  os << "</g>\n<g class=\"legend\">\n";
  double ly = top + 10;
  for (const auto& [name, c] : colour) {
    os << "<rect x=\"" << left + pw + 15 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << c
       << "\"/><text x=\"" << left + pw + 30 << "\" y=\"" << ly << "\">" << escape(name) << "</text>\n";
    ly += 18;
  }
  os << "</g>\n</svg>\n";
}

}  // namespace netcut::svg
