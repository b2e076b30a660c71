#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "workload/birch.hpp"
#include "workload/series.hpp"
#include "workload/trace.hpp"

namespace wl::evalx {

namespace detail {

// Validates labels are 0..k-1 with every cluster nonempty; returns k.
inline int cluster_count(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("labels empty");
  int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<long> counts(static_cast<std::size_t>(k), 0);
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("negative cluster label");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (long c : counts)
    if (c == 0) throw std::invalid_argument("empty cluster in labels");
  return k;
}

inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace detail

// Mean over clusters of the worst ratio of summed centroid dispersions to
// inter-centroid distance; lower is better.
template <typename Scalar>
double davies_bouldin(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& points,
    const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != points.rows())
    throw std::invalid_argument("davies_bouldin: labels/points mismatch");
  const int k = detail::cluster_count(labels);
  if (k < 2) throw std::invalid_argument("davies_bouldin: need at least 2 clusters");

  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix centroids = Matrix::Zero(k, points.cols());
  std::vector<long> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    centroids.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
    ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  for (int c = 0; c < k; ++c) centroids.row(c) /= static_cast<Scalar>(counts[static_cast<std::size_t>(c)]);

  std::vector<double> dispersion(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    dispersion[static_cast<std::size_t>(c)] +=
        static_cast<double>((points.row(i) - centroids.row(c)).norm());
  }
  for (int c = 0; c < k; ++c) dispersion[static_cast<std::size_t>(c)] /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      const double gap = static_cast<double>((centroids.row(i) - centroids.row(j)).norm());
      if (gap == 0.0)
        throw std::invalid_argument("davies_bouldin: coincident centroids for clusters " +
                                    std::to_string(i) + " and " + std::to_string(j));
      worst = std::max(worst, (dispersion[static_cast<std::size_t>(i)] +
                               dispersion[static_cast<std::size_t>(j)]) / gap);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

struct DbiSweep {
  std::vector<int> ks;
  std::vector<double> dbi;  // +inf marks a degenerate cut (empty cluster etc.)
  int best_k = 0;
};

// Cuts the dendrogram at each k, labels the points through their CF entries,
// and evaluates the index. Ties on the minimum go to the smaller k.
template <typename Scalar>
DbiSweep dbi_sweep(const birch::Dendrogram& dend,
                   const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& points,
                   const std::vector<birch::CfEntryT<Scalar>>& entries,
                   int k_lo, int k_hi) {
  if (k_lo < 2 || k_hi < k_lo || k_hi > dend.n_leaves)
    throw std::invalid_argument("dbi_sweep: invalid k range");
  DbiSweep sweep;
  double best = std::numeric_limits<double>::infinity();
  for (int k = k_lo; k <= k_hi; ++k) {
    auto entry_labels = birch::cut(dend, k);
    auto point_labels = birch::assign(points, entry_labels, entries);
    double value;
    try {
      value = davies_bouldin(points, point_labels);
    } catch (const std::invalid_argument&) {
      value = std::numeric_limits<double>::infinity();
    }
    sweep.ks.push_back(k);
    sweep.dbi.push_back(value);
    if (value < best) {
      best = value;
      sweep.best_k = k;
    }
  }
  if (sweep.best_k == 0) sweep.best_k = k_lo;
  return sweep;
}

enum class DissimilarityMode { kHamming, kEuclidean };

// Per-dimension equal-width binning used by the Hamming mode on continuous
// features.
struct QuantizeConfig {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  int bins = 16;
  double eps = 0.0;
};

inline QuantizeConfig quantize_config_for(const Eigen::MatrixXd& points, int bins = 16) {
  QuantizeConfig q;
  q.lo = points.colwise().minCoeff();
  q.hi = points.colwise().maxCoeff();
  q.bins = bins;
  return q;
}

inline int quantize(double x, double lo, double hi, int bins) {
  if (hi <= lo) return 0;
  const int b = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
  return std::clamp(b, 0, bins - 1);
}

template <typename DerivedA, typename DerivedB>
double dissimilarity(const Eigen::MatrixBase<DerivedA>& a,
                     const Eigen::MatrixBase<DerivedB>& b, DissimilarityMode mode,
                     const QuantizeConfig* q = nullptr) {
  if (a.size() != b.size()) throw std::invalid_argument("dissimilarity: dimension mismatch");
  if (mode == DissimilarityMode::kEuclidean) return (a - b).norm();
  if (!q) throw std::invalid_argument("dissimilarity: hamming mode needs a quantize config");
  int count = 0;
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    const int ba = quantize(a(d), q->lo(d), q->hi(d), q->bins);
    const int bb = quantize(b(d), q->lo(d), q->hi(d), q->bins);
    if (ba != bb && std::abs(a(d) - b(d)) > q->eps) ++count;
  }
  return static_cast<double>(count);
}

// Per-sample silhouette values; samples in singleton clusters get 0.
inline std::vector<double> silhouette(const Eigen::MatrixXd& points,
                                      const std::vector<int>& labels,
                                      DissimilarityMode mode,
                                      const QuantizeConfig* q = nullptr) {
  if (static_cast<Eigen::Index>(labels.size()) != points.rows())
    throw std::invalid_argument("silhouette: labels/points mismatch");
  const int k = detail::cluster_count(labels);
  if (k < 2) throw std::invalid_argument("silhouette: need at least 2 clusters");

  QuantizeConfig local;
  if (mode == DissimilarityMode::kHamming && !q) {
    local = quantize_config_for(points);
    q = &local;
  }

  const Eigen::Index n = points.rows();
  std::vector<long> counts(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];

  std::vector<double> result(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = labels[static_cast<std::size_t>(i)];
    if (counts[static_cast<std::size_t>(own)] == 1) continue;  // singleton convention
    std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] +=
          dissimilarity(points.row(i), points.row(j), mode, q);
    }
    const double a = sums[static_cast<std::size_t>(own)] /
                     static_cast<double>(counts[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own) continue;
      b = std::min(b, sums[static_cast<std::size_t>(c)] /
                          static_cast<double>(counts[static_cast<std::size_t>(c)]));
    }
    const double denom = std::max(a, b);
    result[static_cast<std::size_t>(i)] = denom == 0.0 ? 0.0 : (b - a) / denom;
  }
  return result;
}

// Sample indices ordered for the banded silhouette plot: by cluster, then
// descending silhouette.
inline std::vector<int> silhouette_order(const std::vector<double>& values,
                                         const std::vector<int>& labels) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto sa = static_cast<std::size_t>(a);
    const auto sb = static_cast<std::size_t>(b);
    if (labels[sa] != labels[sb]) return labels[sa] < labels[sb];
    return values[sa] > values[sb];
  });
  return order;
}

struct ClusterSummary {
  int label = 0;
  long count = 0;
  Eigen::MatrixXd stats;  // features x {min, median, max}
  bool outlier = false;
};

inline std::vector<ClusterSummary> cluster_summary(const Eigen::MatrixXd& features,
                                                   const std::vector<int>& labels,
                                                   long min_cluster_size = 2) {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows())
    throw std::invalid_argument("cluster_summary: labels/features mismatch");
  const int k = detail::cluster_count(labels);
  std::vector<ClusterSummary> out(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    std::vector<std::vector<double>> columns(static_cast<std::size_t>(features.cols()));
    long count = 0;
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      if (labels[static_cast<std::size_t>(i)] != c) continue;
      ++count;
      for (Eigen::Index d = 0; d < features.cols(); ++d)
        columns[static_cast<std::size_t>(d)].push_back(features(i, d));
    }
    auto& s = out[static_cast<std::size_t>(c)];
    s.label = c;
    s.count = count;
    s.outlier = count < min_cluster_size;
    s.stats.resize(features.cols(), 3);
    for (Eigen::Index d = 0; d < features.cols(); ++d) {
      auto& col = columns[static_cast<std::size_t>(d)];
      s.stats(d, 0) = detail::percentile(col, 0.0);
      s.stats(d, 1) = detail::percentile(col, 50.0);
      s.stats(d, 2) = detail::percentile(col, 100.0);
    }
  }
  return out;
}

struct ClusterReport {
  int k = 0;
  std::vector<int> labels;
  double dbi = 0.0;
  std::vector<double> silhouette_values;
  double silhouette_mean = 0.0;
  std::vector<ClusterSummary> summaries;
};

struct SubtaskRelevance {
  std::vector<long> counts;                  // per cluster
  std::vector<Eigen::MatrixXd> percentiles;  // per cluster: 3 features x {0,25,50,75,100}%
  Eigen::MatrixXd scatter;                   // subtasks x (cpu, ram, disk), original units
  std::vector<int> scatter_labels;
  double separation_score = 0.0;             // inter-centroid spread over intra spread
  std::size_t skipped = 0;
};

// Assigns each subtask to the job cluster with the nearest centroid in the
// shared (cpu, ram, disk) subspace of the normalized feature space.
// `centroids` holds one normalized 5-D feature centroid per cluster; the
// scaler is the one fitted on the 5-D job features.
inline SubtaskRelevance subtask_relevance(const std::vector<trace::TaskEvent>& subtasks,
                                          const Eigen::MatrixXd& centroids,
                                          const series::Scaler& scaler) {
  if (centroids.cols() != 5 || scaler.dims() != 5)
    throw std::invalid_argument("subtask_relevance: expected 5-D feature centroids");
  const int k = static_cast<int>(centroids.rows());
  if (k < 1) throw std::invalid_argument("subtask_relevance: no clusters");

  // cpu, ram, disk live in feature dimensions 2..4.
  Eigen::MatrixXd sub_centroids = centroids.rightCols(3);
  auto normalize = [&](double v, Eigen::Index d) {
    const double span = scaler.maxs[d] - scaler.mins[d];
    return span == 0.0 ? 0.0 : (v - scaler.mins[d]) / span;
  };

  SubtaskRelevance rel;
  rel.counts.assign(static_cast<std::size_t>(k), 0);
  std::vector<std::array<std::vector<double>, 3>> raw(static_cast<std::size_t>(k));
  std::vector<Eigen::Vector3d> normalized;
  std::vector<Eigen::Vector3d> scatter_rows;

  for (const auto& t : subtasks) {
    if (!std::isfinite(t.cpu) || !std::isfinite(t.ram) || !std::isfinite(t.disk) ||
        t.cpu < 0 || t.ram < 0 || t.disk < 0) {
      ++rel.skipped;
      continue;
    }
    Eigen::Vector3d z(normalize(t.cpu, 2), normalize(t.ram, 3), normalize(t.disk, 4));
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double d = (sub_centroids.row(c).transpose() - z).norm();
      if (d < best_dist) {
        best_dist = d;
        best = c;
      }
    }
    ++rel.counts[static_cast<std::size_t>(best)];
    raw[static_cast<std::size_t>(best)][0].push_back(t.cpu);
    raw[static_cast<std::size_t>(best)][1].push_back(t.ram);
    raw[static_cast<std::size_t>(best)][2].push_back(t.disk);
    rel.scatter_labels.push_back(best);
    normalized.push_back(z);
    scatter_rows.push_back({t.cpu, t.ram, t.disk});
  }

  rel.scatter.resize(static_cast<Eigen::Index>(scatter_rows.size()), 3);
  for (std::size_t i = 0; i < scatter_rows.size(); ++i)
    rel.scatter.row(static_cast<Eigen::Index>(i)) = scatter_rows[i].transpose();

  rel.percentiles.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    auto& p = rel.percentiles[static_cast<std::size_t>(c)];
    p.resize(3, 5);
    for (int f = 0; f < 3; ++f) {
      const auto& col = raw[static_cast<std::size_t>(c)][static_cast<std::size_t>(f)];
      const double qs[5] = {0, 25, 50, 75, 100};
      for (int j = 0; j < 5; ++j) p(f, j) = detail::percentile(col, qs[j]);
    }
  }

  // Separation: mean pairwise distance between non-empty cluster centroids of
  // the assigned subtasks over their mean within-cluster spread, both in the
  // normalized subspace.
  std::vector<Eigen::Vector3d> means(static_cast<std::size_t>(k), Eigen::Vector3d::Zero());
  for (std::size_t i = 0; i < normalized.size(); ++i)
    means[static_cast<std::size_t>(rel.scatter_labels[i])] += normalized[i];
  std::vector<int> nonempty;
  for (int c = 0; c < k; ++c) {
    if (rel.counts[static_cast<std::size_t>(c)] > 0) {
      means[static_cast<std::size_t>(c)] /= static_cast<double>(rel.counts[static_cast<std::size_t>(c)]);
      nonempty.push_back(c);
    }
  }
  if (nonempty.size() >= 2 && !normalized.empty()) {
    double inter = 0.0;
    int pairs = 0;
    for (std::size_t a = 0; a < nonempty.size(); ++a)
      for (std::size_t b = a + 1; b < nonempty.size(); ++b) {
        inter += (means[static_cast<std::size_t>(nonempty[a])] -
                  means[static_cast<std::size_t>(nonempty[b])]).norm();
        ++pairs;
      }
    inter /= static_cast<double>(pairs);
    double intra = 0.0;
    for (std::size_t i = 0; i < normalized.size(); ++i)
      intra += (normalized[i] -
                means[static_cast<std::size_t>(rel.scatter_labels[i])]).squaredNorm();
    intra = std::sqrt(intra / static_cast<double>(normalized.size()));
    rel.separation_score =
        intra == 0.0 ? std::numeric_limits<double>::infinity() : inter / intra;
  }
  return rel;
}

}  // namespace wl::evalx
