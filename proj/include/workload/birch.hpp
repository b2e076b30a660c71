#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace wl::birch {

// Clustering feature: point count, linear sum, sum of squared norms.
// Additive under merging.
template <typename Scalar>
struct CfEntryT {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  long n = 0;
  Vector ls;
  Scalar ss = 0;
};
using CfEntry = CfEntryT<double>;

template <typename Scalar>
CfEntryT<Scalar> cf_from_point(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  if (!x.allFinite()) throw std::invalid_argument("cf_from_point: non-finite point");
  return {1, x, x.squaredNorm()};
}

template <typename Scalar>
CfEntryT<Scalar> cf_merge(const CfEntryT<Scalar>& a, const CfEntryT<Scalar>& b) {
  if (a.n == 0) return b;
  if (b.n == 0) return a;
  if (a.ls.size() != b.ls.size())
    throw std::invalid_argument("cf_merge: dimension mismatch");
  return {a.n + b.n, a.ls + b.ls, a.ss + b.ss};
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> cf_centroid(const CfEntryT<Scalar>& e) {
  if (e.n == 0) throw std::invalid_argument("cf_centroid: empty entry");
  return e.ls / static_cast<Scalar>(e.n);
}

template <typename Scalar>
Scalar cf_radius(const CfEntryT<Scalar>& e) {
  if (e.n == 0) throw std::invalid_argument("cf_radius: empty entry");
  const Scalar n = static_cast<Scalar>(e.n);
  const Scalar variance = e.ss / n - e.ls.squaredNorm() / (n * n);
  return std::sqrt(std::max(Scalar(0), variance));
}

// Centroid Euclidean distance (metric D0).
template <typename Scalar>
Scalar cf_distance(const CfEntryT<Scalar>& a, const CfEntryT<Scalar>& b) {
  return (cf_centroid(a) - cf_centroid(b)).norm();
}

// Height-balanced CF tree with threshold-controlled absorption. Single
// writer during construction; immutable and safe to share afterwards.
template <typename Scalar>
class CfTreeT {
 public:
  using Entry = CfEntryT<Scalar>;
  using Vector = typename Entry::Vector;

  CfTreeT(int dims, int branching, int leaf_capacity, Scalar threshold)
      : dims_(dims), branching_(branching), leaf_capacity_(leaf_capacity),
        threshold_(threshold) {
    if (dims < 1 || branching < 2 || leaf_capacity < 1 || threshold < 0)
      throw std::invalid_argument("CfTree: invalid parameters");
    root_ = std::make_unique<Node>(true);
  }

  int dims() const { return dims_; }
  Scalar threshold() const { return threshold_; }

  void insert(const Vector& x) {
    if (x.size() != dims_) throw std::invalid_argument("insert: dimension mismatch");
    Entry cf = cf_from_point(x);
    auto sibling = insert_rec(*root_, cf);
    if (sibling) {
      auto new_root = std::make_unique<Node>(false);
      new_root->entries.push_back(summary(*root_));
      new_root->entries.push_back(summary(*sibling));
      new_root->children.push_back(std::move(root_));
      new_root->children.push_back(std::move(sibling));
      root_ = std::move(new_root);
    }
    ++inserted_;
  }

  long inserted() const { return inserted_; }

  // Left-to-right scan of leaf entries; deterministic.
  std::vector<Entry> leaf_entries() const {
    std::vector<Entry> out;
    collect_leaves(*root_, &out);
    return out;
  }

  Entry root_entry() const { return summary(*root_); }

  // Index into leaf_entries() of the entry with nearest centroid; ties go to
  // the lowest index.
  int nearest_leaf_entry(const Vector& x) const {
    auto entries = leaf_entries();
    if (entries.empty()) throw std::invalid_argument("nearest_leaf_entry: empty tree");
    int best = 0;
    Scalar best_dist = std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      Scalar d = (cf_centroid(entries[i]) - x).norm();
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  struct Stats {
    int height = 0;
    bool leaves_same_depth = true;
    int max_internal_occupancy = 0;
    int max_leaf_occupancy = 0;
    Scalar max_leaf_radius = 0;
  };

  Stats stats() const {
    Stats s;
    int leaf_depth = -1;
    walk(*root_, 0, &s, &leaf_depth);
    s.height = leaf_depth + 1;
    return s;
  }

 private:
  struct Node {
    explicit Node(bool is_leaf) : leaf(is_leaf) {}
    bool leaf;
    std::vector<Entry> entries;
    std::vector<std::unique_ptr<Node>> children;  // parallel to entries when !leaf
  };

  static Entry summary(const Node& node) {
    Entry sum;
    for (const auto& e : node.entries) sum = cf_merge(sum, e);
    return sum;
  }

  static int nearest_index(const std::vector<Entry>& entries, const Entry& cf) {
    int best = 0;
    Scalar best_dist = std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      Scalar d = cf_distance(entries[i], cf);
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  // Farthest-pair seeding: the two entries with maximal centroid distance
  // seed the halves; every entry joins the nearer seed.
  std::unique_ptr<Node> split(Node& node) {
    const std::size_t m = node.entries.size();
    std::size_t seed_a = 0, seed_b = 1;
    Scalar best = -1;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        Scalar d = cf_distance(node.entries[i], node.entries[j]);
        if (d > best) {
          best = d;
          seed_a = i;
          seed_b = j;
        }
      }
    }
    auto sibling = std::make_unique<Node>(node.leaf);
    std::vector<Entry> keep_entries;
    std::vector<std::unique_ptr<Node>> keep_children;
    for (std::size_t i = 0; i < m; ++i) {
      Scalar da = cf_distance(node.entries[i], node.entries[seed_a]);
      Scalar db = cf_distance(node.entries[i], node.entries[seed_b]);
      bool to_sibling = i == seed_b || (i != seed_a && db < da);
      auto& entries = to_sibling ? sibling->entries : keep_entries;
      entries.push_back(std::move(node.entries[i]));
      if (!node.leaf) {
        auto& children = to_sibling ? sibling->children : keep_children;
        children.push_back(std::move(node.children[i]));
      }
    }
    node.entries = std::move(keep_entries);
    node.children = std::move(keep_children);
    return sibling;
  }

  std::unique_ptr<Node> insert_rec(Node& node, const Entry& cf) {
    if (node.leaf) {
      if (!node.entries.empty()) {
        int i = nearest_index(node.entries, cf);
        Entry merged = cf_merge(node.entries[static_cast<std::size_t>(i)], cf);
        if (cf_radius(merged) <= threshold_) {
          node.entries[static_cast<std::size_t>(i)] = std::move(merged);
          return nullptr;
        }
      }
      node.entries.push_back(cf);
      if (static_cast<int>(node.entries.size()) > leaf_capacity_) return split(node);
      return nullptr;
    }

    const std::size_t i = static_cast<std::size_t>(nearest_index(node.entries, cf));
    auto child_sibling = insert_rec(*node.children[i], cf);
    node.entries[i] = summary(*node.children[i]);
    if (child_sibling) {
      node.entries.insert(node.entries.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                          summary(*child_sibling));
      node.children.insert(node.children.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                           std::move(child_sibling));
      if (static_cast<int>(node.entries.size()) > branching_) return split(node);
    }
    return nullptr;
  }

  static void collect_leaves(const Node& node, std::vector<Entry>* out) {
    if (node.leaf) {
      out->insert(out->end(), node.entries.begin(), node.entries.end());
      return;
    }
    for (const auto& child : node.children) collect_leaves(*child, out);
  }

  void walk(const Node& node, int depth, Stats* s, int* leaf_depth) const {
    if (node.leaf) {
      if (*leaf_depth < 0) *leaf_depth = depth;
      else if (*leaf_depth != depth) s->leaves_same_depth = false;
      s->max_leaf_occupancy =
          std::max(s->max_leaf_occupancy, static_cast<int>(node.entries.size()));
      for (const auto& e : node.entries)
        s->max_leaf_radius = std::max(s->max_leaf_radius, cf_radius(e));
      return;
    }
    s->max_internal_occupancy =
        std::max(s->max_internal_occupancy, static_cast<int>(node.entries.size()));
    for (const auto& child : node.children) walk(*child, depth + 1, s, leaf_depth);
  }

  int dims_;
  int branching_;
  int leaf_capacity_;
  Scalar threshold_;
  long inserted_ = 0;
  std::unique_ptr<Node> root_;
};
using CfTree = CfTreeT<double>;

// Median nearest-neighbour distance of the first min(n, 1000) rows; used as
// the auto absorption threshold on large runs.
template <typename Scalar>
Scalar estimate_threshold(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& points) {
  const Eigen::Index m = std::min<Eigen::Index>(points.rows(), 1000);
  if (m < 2) return Scalar(0);
  std::vector<Scalar> nn(static_cast<std::size_t>(m),
                         std::numeric_limits<Scalar>::infinity());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      Scalar d = (points.row(i) - points.row(j)).norm();
      nn[static_cast<std::size_t>(i)] = std::min(nn[static_cast<std::size_t>(i)], d);
      nn[static_cast<std::size_t>(j)] = std::min(nn[static_cast<std::size_t>(j)], d);
    }
  }
  std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2),
                   nn.end());
  return nn[nn.size() / 2];
}

struct Merge {
  int left = 0;       // smaller cluster id
  int right = 0;      // larger cluster id
  double distance = 0;
  int id = 0;         // id of the merged cluster
};

struct Dendrogram {
  int n_leaves = 0;
  std::vector<Merge> merges;  // leaf ids are 0..n_leaves-1; merge k creates id n_leaves+k
};

// Agglomerative merging of CF entries under centroid linkage: repeatedly
// merge the pair with minimum centroid distance, centroids weighted by point
// count. Ties break on the smallest (left id, right id).
template <typename Scalar>
Dendrogram global_cluster(const std::vector<CfEntryT<Scalar>>& entries) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int n = static_cast<int>(entries.size());
  if (n < 1) throw std::invalid_argument("global_cluster: no entries");

  Dendrogram dend;
  dend.n_leaves = n;
  if (n == 1) return dend;

  struct Cluster {
    int id;
    Scalar weight;
    Vector centroid;
    bool alive;
  };
  std::vector<Cluster> slots;
  slots.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (entries[static_cast<std::size_t>(i)].n <= 0)
      throw std::invalid_argument("global_cluster: empty entry");
    slots.push_back({i, static_cast<Scalar>(entries[static_cast<std::size_t>(i)].n),
                     cf_centroid(entries[static_cast<std::size_t>(i)]), true});
  }

  using Key = std::tuple<double, int, int>;  // (distance, left id, right id)
  auto pair_key = [&](int a, int b) {
    double d = static_cast<double>(
        (slots[static_cast<std::size_t>(a)].centroid -
         slots[static_cast<std::size_t>(b)].centroid).norm());
    int ia = slots[static_cast<std::size_t>(a)].id;
    int ib = slots[static_cast<std::size_t>(b)].id;
    return Key{d, std::min(ia, ib), std::max(ia, ib)};
  };

  const Key inf_key{std::numeric_limits<double>::infinity(),
                    std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
  std::vector<int> nn(static_cast<std::size_t>(n), -1);
  std::vector<Key> nn_key(static_cast<std::size_t>(n), inf_key);

  auto rescan = [&](int a) {
    nn[static_cast<std::size_t>(a)] = -1;
    nn_key[static_cast<std::size_t>(a)] = inf_key;
    for (int b = 0; b < n; ++b) {
      if (b == a || !slots[static_cast<std::size_t>(b)].alive) continue;
      Key k = pair_key(a, b);
      if (k < nn_key[static_cast<std::size_t>(a)]) {
        nn_key[static_cast<std::size_t>(a)] = k;
        nn[static_cast<std::size_t>(a)] = b;
      }
    }
  };
  for (int a = 0; a < n; ++a) rescan(a);

  for (int step = 0; step < n - 1; ++step) {
    int best = -1;
    Key best_key = inf_key;
    for (int a = 0; a < n; ++a) {
      if (!slots[static_cast<std::size_t>(a)].alive || nn[static_cast<std::size_t>(a)] < 0)
        continue;
      if (nn_key[static_cast<std::size_t>(a)] < best_key) {
        best_key = nn_key[static_cast<std::size_t>(a)];
        best = a;
      }
    }
    const int a = best;
    const int b = nn[static_cast<std::size_t>(a)];
    auto& ca = slots[static_cast<std::size_t>(a)];
    auto& cb = slots[static_cast<std::size_t>(b)];
    const int new_id = n + step;
    dend.merges.push_back({std::min(ca.id, cb.id), std::max(ca.id, cb.id),
                           std::get<0>(best_key), new_id});

    ca.centroid = (ca.weight * ca.centroid + cb.weight * cb.centroid) /
                  (ca.weight + cb.weight);
    ca.weight += cb.weight;
    ca.id = new_id;
    cb.alive = false;

    rescan(a);
    for (int k = 0; k < n; ++k) {
      if (k == a || !slots[static_cast<std::size_t>(k)].alive) continue;
      if (nn[static_cast<std::size_t>(k)] == a || nn[static_cast<std::size_t>(k)] == b) {
        rescan(k);
      } else {
        Key key = pair_key(k, a);
        if (key < nn_key[static_cast<std::size_t>(k)]) {
          nn_key[static_cast<std::size_t>(k)] = key;
          nn[static_cast<std::size_t>(k)] = a;
        }
      }
    }
  }
  return dend;
}

// Undo the last k-1 merges; leaf entries are labelled by component, labels
// numbered by first appearance.
inline std::vector<int> cut(const Dendrogram& dend, int k) {
  const int n = dend.n_leaves;
  if (k < 1 || k > n) throw std::invalid_argument("cut: k out of range");

  std::vector<int> parent(static_cast<std::size_t>(n + dend.merges.size()));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  };

  const int applied = n - k;
  for (int m = 0; m < applied; ++m) {
    const auto& merge = dend.merges[static_cast<std::size_t>(m)];
    parent[static_cast<std::size_t>(find(merge.left))] = merge.id;
    parent[static_cast<std::size_t>(find(merge.right))] = merge.id;
  }

  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<int> label_of_root(parent.size(), -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    int root = find(i);
    if (label_of_root[static_cast<std::size_t>(root)] < 0)
      label_of_root[static_cast<std::size_t>(root)] = next++;
    labels[static_cast<std::size_t>(i)] = label_of_root[static_cast<std::size_t>(root)];
  }
  return labels;
}

// Labels points by the cluster of the nearest leaf-entry centroid (ties to
// the lowest entry index).
template <typename Scalar>
std::vector<int> assign(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& points,
    const std::vector<int>& entry_labels,
    const std::vector<CfEntryT<Scalar>>& entries) {
  if (entry_labels.size() != entries.size())
    throw std::invalid_argument("assign: labels/entries mismatch");
  if (entries.empty()) throw std::invalid_argument("assign: no entries");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> centroids(
      static_cast<Eigen::Index>(entries.size()), points.cols());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].ls.size() != points.cols())
      throw std::invalid_argument("assign: dimension mismatch");
    centroids.row(static_cast<Eigen::Index>(i)) = cf_centroid(entries[i]).transpose();
  }
  std::vector<int> labels(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index p = 0; p < points.rows(); ++p) {
    int best = 0;
    Scalar best_dist = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index e = 0; e < centroids.rows(); ++e) {
      Scalar d = (centroids.row(e) - points.row(p)).norm();
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(e);
      }
    }
    labels[static_cast<std::size_t>(p)] = entry_labels[static_cast<std::size_t>(best)];
  }
  return labels;
}

}  // namespace wl::birch
