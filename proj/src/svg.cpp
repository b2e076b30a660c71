#include "workload/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "workload/evalx.hpp"
#include "workload/fmt.hpp"

namespace wl::svg {

namespace {

constexpr double kWidth = 800;
constexpr double kHeight = 480;
constexpr double kMargin = 50;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int kPaletteSize = 10;

std::string num(double v) {
  // Quantize so near-equal inputs format identically.
  if (!std::isfinite(v)) v = 0;
  double r = std::round(v * 100.0) / 100.0;
  if (r == 0.0) r = 0.0;  // avoid "-0"
  return fmt::shortest(r);
}

void open_file(std::ofstream* out, const std::string& path) {
  out->open(path, std::ios::binary);
  if (!*out) throw std::runtime_error("cannot write svg file: " + path);
}

void header(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi <= lo) {
      lo -= 1;
      hi += 1;
    }
  }
  double map(double v, double out_lo, double out_hi) const {
    return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo);
  }
};

}  // namespace

void line_chart(const std::string& path, const std::string& title,
                const std::vector<Polyline>& lines) {
  if (lines.empty()) throw std::invalid_argument("line_chart: no data");
  Range rx, ry;
  for (const auto& line : lines) {
    if (line.x.size() != line.y.size() || line.y.empty())
      throw std::invalid_argument("line_chart: empty or mismatched polyline");
    for (double v : line.x) rx.add(v);
    for (double v : line.y) ry.add(v);
  }
  rx.pad();
  ry.pad();

  std::ofstream out;
  open_file(&out, path);
  header(out, title);
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
      << kWidth - 2 * kMargin << "\" height=\"" << kHeight - 2 * kMargin
      << "\" fill=\"none\" stroke=\"#999\"/>\n";
  out << "<text x=\"" << kMargin << "\" y=\"" << kMargin - 6
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << num(ry.hi) << "</text>\n";
  out << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin + 14
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << num(ry.lo) << "</text>\n";

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto& line = lines[li];
    out << "<polyline fill=\"none\" stroke=\""
        << kPalette[li % kPaletteSize] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < line.y.size(); ++i) {
      if (i) out << ' ';
      out << num(rx.map(line.x[i], kMargin, kWidth - kMargin)) << ','
          << num(ry.map(line.y[i], kHeight - kMargin, kMargin));
    }
    out << "\"/>\n";
    out << "<text x=\"" << kWidth - kMargin + 4 << "\" y=\""
        << kMargin + 16 * static_cast<double>(li) << "\" fill=\""
        << kPalette[li % kPaletteSize]
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << line.label
        << "</text>\n";
  }
  out << "</svg>\n";
}

void dendrogram(const std::string& path, const std::string& title,
                const birch::Dendrogram& dend, int max_levels) {
  if (dend.n_leaves < 1) throw std::invalid_argument("dendrogram: empty input");
  const int total = static_cast<int>(dend.merges.size());
  const int levels = std::min(max_levels, total);
  if (levels < 1) throw std::invalid_argument("dendrogram: nothing to draw");
  const int start = total - levels;

  // Base clusters are the ones alive just before the drawn merges.
  struct NodePos {
    double x = 0;
    double y = 0;  // merge distance; 0 for base clusters
  };
  std::map<int, NodePos> nodes;
  std::vector<int> base;
  for (int m = start; m < total; ++m) {
    const auto& merge = dend.merges[static_cast<std::size_t>(m)];
    const int threshold = dend.n_leaves + start;
    if (merge.left < threshold) base.push_back(merge.left);
    if (merge.right < threshold) base.push_back(merge.right);
  }
  if (base.empty()) base.push_back(0);

  // Leaf x order from a left-to-right walk of the drawn subtree.
  std::map<int, std::pair<int, int>> children;
  for (int m = start; m < total; ++m) {
    const auto& merge = dend.merges[static_cast<std::size_t>(m)];
    children[merge.id] = {merge.left, merge.right};
  }
  std::vector<int> order;
  std::function<void(int)> walk = [&](int id) {
    auto it = children.find(id);
    if (it == children.end()) {
      order.push_back(id);
      return;
    }
    walk(it->second.first);
    walk(it->second.second);
  };
  walk(dend.merges.back().id);

  Range ry;
  ry.add(0);
  for (int m = start; m < total; ++m)
    ry.add(dend.merges[static_cast<std::size_t>(m)].distance);
  ry.pad();

  const double span = kWidth - 2 * kMargin;
  for (std::size_t i = 0; i < order.size(); ++i) {
    nodes[order[i]] = {kMargin + span * (static_cast<double>(i) + 0.5) /
                                     static_cast<double>(order.size()),
                       0.0};
  }

  std::ofstream out;
  open_file(&out, path);
  header(out, title);
  auto ypix = [&](double d) { return ry.map(d, kHeight - kMargin, kMargin); };
  for (int m = start; m < total; ++m) {
    const auto& merge = dend.merges[static_cast<std::size_t>(m)];
    const auto& l = nodes.at(merge.left);
    const auto& r = nodes.at(merge.right);
    const double y = ypix(merge.distance);
    out << "<path fill=\"none\" stroke=\"#1f77b4\" d=\"M " << num(l.x) << ' '
        << num(ypix(l.y)) << " V " << num(y) << " H " << num(r.x) << " V "
        << num(ypix(r.y)) << "\"/>\n";
    nodes[merge.id] = {(l.x + r.x) / 2, merge.distance};
  }
  out << "<text x=\"" << kMargin << "\" y=\"" << kMargin - 6
      << "\" font-family=\"sans-serif\" font-size=\"11\">distance " << num(ry.hi)
      << "</text>\n";
  out << "</svg>\n";
}

void silhouette_bands(const std::string& path, const std::string& title,
                      const std::vector<double>& values, const std::vector<int>& labels) {
  if (values.empty() || values.size() != labels.size())
    throw std::invalid_argument("silhouette_bands: empty or mismatched input");
  auto order = evalx::silhouette_order(values, labels);

  std::ofstream out;
  open_file(&out, path);
  header(out, title);
  const double zero_x = kWidth / 2;
  const double unit = (kWidth / 2 - kMargin);
  const double band = (kHeight - 2 * kMargin) / static_cast<double>(values.size());
  out << "<line x1=\"" << zero_x << "\" y1=\"" << kMargin << "\" x2=\"" << zero_x
      << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"#999\"/>\n";
  for (std::size_t row = 0; row < order.size(); ++row) {
    const auto i = static_cast<std::size_t>(order[row]);
    const double v = std::clamp(values[i], -1.0, 1.0);
    const double x0 = v < 0 ? zero_x + v * unit : zero_x;
    const double w = std::abs(v) * unit;
    out << "<rect x=\"" << num(x0) << "\" y=\""
        << num(kMargin + band * static_cast<double>(row)) << "\" width=\""
        << num(std::max(w, 0.01)) << "\" height=\"" << num(std::max(band, 0.2))
        << "\" fill=\"" << kPalette[labels[i] % kPaletteSize] << "\"/>\n";
  }
  out << "</svg>\n";
}

void scatter_panels(const std::string& path, const std::string& title,
                    const Eigen::MatrixXd& points, const std::vector<int>& labels,
                    const std::vector<std::string>& names) {
  if (points.rows() == 0 || points.cols() != 3 ||
      static_cast<Eigen::Index>(labels.size()) != points.rows() || names.size() != 3)
    throw std::invalid_argument("scatter_panels: bad input shape");

  std::ofstream out;
  open_file(&out, path);
  header(out, title);
  const int pairs[3][2] = {{0, 1}, {1, 2}, {0, 2}};
  const double panel_w = (kWidth - 4 * kMargin) / 3;
  for (int panel = 0; panel < 3; ++panel) {
    const int dx = pairs[panel][0];
    const int dy = pairs[panel][1];
    Range rx, ry;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      rx.add(points(i, dx));
      ry.add(points(i, dy));
    }
    rx.pad();
    ry.pad();
    const double x0 = kMargin + (panel_w + kMargin) * panel;
    out << "<rect x=\"" << num(x0) << "\" y=\"" << kMargin << "\" width=\""
        << num(panel_w) << "\" height=\"" << kHeight - 2 * kMargin
        << "\" fill=\"none\" stroke=\"#999\"/>\n";
    out << "<text x=\"" << num(x0 + panel_w / 2) << "\" y=\"" << kHeight - kMargin + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << names[static_cast<std::size_t>(dx)] << " vs "
        << names[static_cast<std::size_t>(dy)] << "</text>\n";
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      out << "<circle cx=\"" << num(rx.map(points(i, dx), x0, x0 + panel_w)) << "\" cy=\""
          << num(ry.map(points(i, dy), kHeight - kMargin, kMargin))
          << "\" r=\"2\" fill=\""
          << kPalette[labels[static_cast<std::size_t>(i)] % kPaletteSize] << "\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace wl::svg
