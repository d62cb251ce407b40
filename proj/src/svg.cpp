#include "voisyn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace voisyn::svg {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// White through blue; t in [0,1].
std::string heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 - 205 * t));
  const int g = static_cast<int>(std::lround(255 - 155 * t));
  const int b = 255;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

void open_doc(std::ostringstream& os, double w, double h, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w)
     << "\" height=\"" << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << ' ' << fmt(h)
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt(w / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";
}

struct Extent {
  double lo, hi;
};

Extent padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::abs(lo) > 0 ? 0.1 * std::abs(lo) : 1.0;
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string grid_heatmap(const GridResult& grid, const std::string& title) {
  const std::size_t rows = grid.groups.size();
  const std::size_t cols = grid.outputs.size();
  const double cell = 46, left = 150, top = 60, bottom = 90;
  const double w = left + cols * cell + 20;
  const double h = top + rows * cell + bottom;

  std::ostringstream os;
  open_doc(os, w, h, title);

  for (std::size_t r = 0; r < rows; ++r) {
    const double y = top + r * cell;
    os << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(y + cell / 2 + 4)
       << "\" text-anchor=\"end\">" << escape(grid.groups[r].name) << "</text>\n";
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = left + c * cell;
      const GridCell& gc = grid.cells[r][c];
      std::string fill = "#dddddd";
      std::string label = "x";
      if (gc.estimate) {
        const double p = gc.estimate->proportion;
        fill = heat_color(std::isfinite(p) ? p : 0.0);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.2f", p);
        label = buf;
      }
      os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(cell)
         << "\" height=\"" << fmt(cell) << "\" fill=\"" << fill
         << "\" stroke=\"#888\"/>\n";
      os << "<text x=\"" << fmt(x + cell / 2) << "\" y=\"" << fmt(y + cell / 2 + 4)
         << "\" text-anchor=\"middle\" font-size=\"10\">" << label << "</text>\n";
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    const double x = left + c * cell + cell / 2;
    const double y = top + rows * cell + 12;
    os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" text-anchor=\"start\""
       << " transform=\"rotate(45 " << fmt(x) << ' ' << fmt(y) << ")\">"
       << escape(grid.outputs[c]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string curve_chart(const std::vector<CurvePoint>& curve, const std::string& title) {
  const double w = 560, h = 360, left = 70, right = 20, top = 40, bottom = 50;
  std::ostringstream os;
  open_doc(os, w, h, title);

  std::vector<const CurvePoint*> pts;
  for (const auto& p : curve) {
    if (p.error.empty()) pts.push_back(&p);
  }
  if (pts.empty()) {
    os << "<text x=\"" << fmt(w / 2) << "\" y=\"" << fmt(h / 2)
       << "\" text-anchor=\"middle\">no successful points</text>\n</svg>\n";
    return os.str();
  }

  const long n_min = pts.front()->n, n_max = pts.back()->n;
  const bool log_x = n_min > 0 && n_max > 10 * std::max<long>(n_min, 1);
  auto xt = [&](long n) {
    double t;
    if (log_x) {
      t = (std::log10(static_cast<double>(n)) - std::log10(static_cast<double>(n_min))) /
          (std::log10(static_cast<double>(n_max)) - std::log10(static_cast<double>(n_min)));
    } else {
      t = n_max > n_min
              ? static_cast<double>(n - n_min) / static_cast<double>(n_max - n_min)
              : 0.5;
    }
    return left + t * (w - left - right);
  };

  double lo = 0, hi = 0;
  for (const auto* p : pts) {
    const double se = std::isfinite(p->estimate.se) ? p->estimate.se : 0.0;
    lo = std::min(lo, p->estimate.value - 2 * se);
    hi = std::max(hi, p->estimate.value + 2 * se);
  }
  const Extent ey = padded(lo, hi);
  auto yt = [&](double v) {
    return top + (ey.hi - v) / (ey.hi - ey.lo) * (h - top - bottom);
  };

  // Axes.
  os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left)
     << "\" y2=\"" << fmt(h - bottom) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(h - bottom) << "\" x2=\""
     << fmt(w - right) << "\" y2=\"" << fmt(h - bottom) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = ey.lo + i * (ey.hi - ey.lo) / 4;
    os << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(yt(v) + 4)
       << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(v) << "</text>\n";
  }
  for (const auto* p : pts) {
    os << "<text x=\"" << fmt(xt(p->n)) << "\" y=\"" << fmt(h - bottom + 16)
       << "\" text-anchor=\"middle\" font-size=\"10\">" << p->n << "</text>\n";
  }
  os << "<text x=\"" << fmt((left + w - right) / 2) << "\" y=\"" << fmt(h - 10)
     << "\" text-anchor=\"middle\">sample size n" << (log_x ? " (log scale)" : "")
     << "</text>\n";

  // SE ribbon, then the line on top.
  bool any_se = false;
  std::ostringstream upper, lower;
  for (const auto* p : pts) {
    if (std::isfinite(p->estimate.se) && p->estimate.se > 0) any_se = true;
  }
  if (any_se) {
    std::string path;
    for (const auto* p : pts) {
      const double se = std::isfinite(p->estimate.se) ? p->estimate.se : 0.0;
      path += (path.empty() ? "M" : "L") + fmt(xt(p->n)) + " " +
              fmt(yt(p->estimate.value + 2 * se));
    }
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
      const double se = std::isfinite((*it)->estimate.se) ? (*it)->estimate.se : 0.0;
      path += "L" + fmt(xt((*it)->n)) + " " + fmt(yt((*it)->estimate.value - 2 * se));
    }
    os << "<path d=\"" << path << "Z\" fill=\"#3264ff\" fill-opacity=\"0.15\"/>\n";
  }
  std::string line;
  for (const auto* p : pts) {
    line += (line.empty() ? "M" : "L") + fmt(xt(p->n)) + " " + fmt(yt(p->estimate.value));
  }
  os << "<path d=\"" << line << "\" fill=\"none\" stroke=\"#3264ff\" stroke-width=\"2\"/>\n";
  for (const auto* p : pts) {
    os << "<circle cx=\"" << fmt(xt(p->n)) << "\" cy=\"" << fmt(yt(p->estimate.value))
       << "\" r=\"3\" fill=\"#3264ff\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string enbs_chart(const EnbsResult& result, const std::string& title) {
  const double w = 560, h = 360, left = 70, right = 20, top = 40, bottom = 50;
  std::ostringstream os;
  open_doc(os, w, h, title);
  if (result.rows.empty()) {
    os << "<text x=\"" << fmt(w / 2) << "\" y=\"" << fmt(h / 2)
       << "\" text-anchor=\"middle\">no rows</text>\n</svg>\n";
    return os.str();
  }

  double lo = 0, hi = 0;
  for (const auto& r : result.rows) {
    lo = std::min(lo, r.net);
    hi = std::max(hi, r.net);
  }
  const Extent ey = padded(lo, hi);
  auto yt = [&](double v) {
    return top + (ey.hi - v) / (ey.hi - ey.lo) * (h - top - bottom);
  };
  const double band = (w - left - right) / result.rows.size();

  os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(yt(0)) << "\" x2=\""
     << fmt(w - right) << "\" y2=\"" << fmt(yt(0)) << "\" stroke=\"#888\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = ey.lo + i * (ey.hi - ey.lo) / 4;
    os << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(yt(v) + 4)
       << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(v) << "</text>\n";
  }
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    const double x = left + i * band + 0.15 * band;
    const double y0 = yt(0), y1 = yt(r.net);
    const bool best = !result.do_not_sample && r.n == result.optimal_n;
    os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(std::min(y0, y1)) << "\" width=\""
       << fmt(0.7 * band) << "\" height=\"" << fmt(std::abs(y0 - y1)) << "\" fill=\""
       << (best ? "#ff8c00" : (r.net >= 0 ? "#3264ff" : "#aaaaaa")) << "\"/>\n";
    os << "<text x=\"" << fmt(x + 0.35 * band) << "\" y=\"" << fmt(h - bottom + 16)
       << "\" text-anchor=\"middle\" font-size=\"10\">" << r.n << "</text>\n";
  }
  os << "<text x=\"" << fmt((left + w - right) / 2) << "\" y=\"" << fmt(h - 10)
     << "\" text-anchor=\"middle\">"
     << (result.do_not_sample ? "net benefit (all negative: do not sample)"
                              : "net benefit by sample size")
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace voisyn::svg
