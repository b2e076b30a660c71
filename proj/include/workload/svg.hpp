#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "workload/birch.hpp"

namespace wl::svg {

struct Polyline {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// All writers emit standalone SVG with byte-deterministic output for
// identical input. Empty data is an error and no file is written.
void line_chart(const std::string& path, const std::string& title,
                const std::vector<Polyline>& lines);

// Truncated dendrogram of the last `max_levels` merge levels.
void dendrogram(const std::string& path, const std::string& title,
                const birch::Dendrogram& dend, int max_levels = 30);

// One horizontal bar per sample, grouped by cluster, sorted by value.
void silhouette_bands(const std::string& path, const std::string& title,
                      const std::vector<double>& values, const std::vector<int>& labels);

// Three 2-D panels (xy, yz, xz) of a 3-column point set coloured by label.
void scatter_panels(const std::string& path, const std::string& title,
                    const Eigen::MatrixXd& points, const std::vector<int>& labels,
                    const std::vector<std::string>& names);

}  // namespace wl::svg
