#include "apptopic/density_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "apptopic/errors.hpp"

namespace apptopic {
namespace {

struct LinkageRow {
  std::size_t left = 0;
  std::size_t right = 0;
  double distance = 0.0;
  std::size_t size = 0;
};

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void link(std::size_t child, std::size_t root) { parent_[find(child)] = root; }
  void grow(std::size_t n) {
    const std::size_t old = parent_.size();
    parent_.resize(n);
    std::iota(parent_.begin() + static_cast<std::ptrdiff_t>(old), parent_.end(), old);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Single-linkage dendrogram: merge node n + r is row r.
std::vector<LinkageRow> single_linkage(std::vector<MstEdge> mst) {
  const std::size_t n = mst.size() + 1;
  std::stable_sort(mst.begin(), mst.end(), [](const MstEdge& x, const MstEdge& y) { return x.weight < y.weight; });
  DisjointSet sets(2 * n - 1);
  std::vector<std::size_t> size(2 * n - 1, 1);
  std::vector<LinkageRow> rows;
  rows.reserve(n - 1);
  for (const auto& e : mst) {
    const std::size_t ra = sets.find(e.a);
    const std::size_t rb = sets.find(e.b);
    const std::size_t node = n + rows.size();
    size[node] = size[ra] + size[rb];
    rows.push_back({ra, rb, e.weight, size[node]});
    sets.link(ra, node);
    sets.link(rb, node);
  }
  return rows;
}

std::vector<std::size_t> leaves_under(std::size_t node, std::size_t n, const std::vector<LinkageRow>& rows) {
  std::vector<std::size_t> out, stack{node};
  while (!stack.empty()) {
    const std::size_t cur = stack.back();
    stack.pop_back();
    if (cur < n) {
      out.push_back(cur);
    } else {
      stack.push_back(rows[cur - n].right);
      stack.push_back(rows[cur - n].left);
    }
  }
  return out;
}

}  // namespace

std::vector<double> core_distances(const Matrix& points, std::size_t min_samples) {
  const std::size_t n = points.size();
  if (min_samples == 0 || min_samples >= n) {
    throw std::invalid_argument(fmt::format("core_distances: min_samples={} must be in [1, n) with n={}", min_samples, n));
  }
  std::vector<double> core(n);
  std::vector<double> d;
  d.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    d.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.push_back(euclidean_distance(points[i], points[j]));
    }
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(min_samples - 1), d.end());
    core[i] = d[min_samples - 1];
  }
  return core;
}

double mutual_reachability(std::span<const double> x, std::span<const double> y, double core_x, double core_y) {
  return std::max({core_x, core_y, euclidean_distance(x, y)});
}

std::vector<MstEdge> mutual_reachability_mst(const Matrix& points, std::span<const double> core) {
  const std::size_t n = points.size();
  if (n < 2) throw std::invalid_argument("mutual_reachability_mst: need at least 2 points");
  std::vector<MstEdge> edges;
  edges.reserve(n - 1);
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(n, 0);
  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double w = mutual_reachability(points[current], points[j], core[current], core[j]);
      if (w < best[j]) {
        best[j] = w;
        from[j] = current;
      }
      if (next == n || best[j] < best[next]) next = j;
    }
    in_tree[next] = true;
    edges.push_back({from[next], next, best[next]});
    current = next;
  }
  return edges;
}

std::size_t CondensedTree::cluster_count() const {
  std::size_t max_id = root();
  for (const auto& node : nodes) {
    max_id = std::max(max_id, node.parent);
    if (node.child_size > 1 || node.child >= n_points) max_id = std::max(max_id, node.child);
  }
  return max_id - root() + 1;
}

CondensedTree condense_tree(const std::vector<MstEdge>& mst, std::size_t min_cluster_size) {
  const std::size_t n = mst.size() + 1;
  CondensedTree tree;
  tree.n_points = n;
  tree.min_cluster_size = min_cluster_size;
  if (n == 1) return tree;

  const auto rows = single_linkage(mst);
  auto count = [&](std::size_t node) { return node < n ? std::size_t{1} : rows[node - n].size; };

  const std::size_t top = 2 * n - 2;
  std::vector<std::size_t> relabel(2 * n - 1, 0);
  relabel[top] = n;
  std::size_t next_label = n + 1;

  std::deque<std::size_t> queue{top};
  while (!queue.empty()) {
    const std::size_t node = queue.front();
    queue.pop_front();
    if (node < n) continue;
    const LinkageRow& row = rows[node - n];
    const double lambda = 1.0 / std::max(row.distance, kMinLambdaDistance);
    const std::size_t parent = relabel[node];
    const std::size_t lc = count(row.left);
    const std::size_t rc = count(row.right);

    auto fall_out = [&](std::size_t sub) {
      for (std::size_t leaf : leaves_under(sub, n, rows)) tree.nodes.push_back({parent, leaf, lambda, 1});
    };

    if (lc >= min_cluster_size && rc >= min_cluster_size) {
      for (std::size_t child : {row.left, row.right}) {
        relabel[child] = next_label++;
        tree.nodes.push_back({parent, relabel[child], lambda, count(child)});
        queue.push_back(child);
      }
    } else if (lc < min_cluster_size && rc < min_cluster_size) {
      fall_out(row.left);
      fall_out(row.right);
    } else if (lc < min_cluster_size) {
      relabel[row.right] = parent;
      fall_out(row.left);
      queue.push_back(row.right);
    } else {
      relabel[row.left] = parent;
      fall_out(row.right);
      queue.push_back(row.left);
    }
  }
  return tree;
}

std::vector<double> cluster_stabilities(const CondensedTree& tree) {
  const std::size_t n = tree.n_points;
  const std::size_t clusters = tree.cluster_count();
  std::vector<double> birth(clusters, 0.0);
  for (const auto& node : tree.nodes) {
    if (node.child >= n) birth[node.child - n] = node.lambda;
  }
  std::vector<double> stability(clusters, 0.0);
  for (const auto& node : tree.nodes) {
    stability[node.parent - n] += (node.lambda - birth[node.parent - n]) * static_cast<double>(node.child_size);
  }
  return stability;
}

ClusterAssignment extract_clusters(const std::vector<MstEdge>& mst, std::size_t min_cluster_size) {
  ClusterAssignment out;
  out.tree = condense_tree(mst, min_cluster_size);
  const CondensedTree& tree = out.tree;
  const std::size_t n = tree.n_points;
  const std::size_t clusters = tree.cluster_count();

  std::vector<double> stability = cluster_stabilities(tree);
  const std::vector<double> raw_stability = stability;
  std::vector<std::vector<std::size_t>> children(clusters);
  for (const auto& node : tree.nodes) {
    if (node.child >= n) children[node.parent - n].push_back(node.child - n);
  }

  // Children always carry larger ids than their parent, so descending id order
  // visits every subtree before its root.
  std::vector<bool> selected(clusters, false);
  for (std::size_t c = clusters; c-- > 1;) {
    if (children[c].empty()) {
      selected[c] = true;
      continue;
    }
    double subtree = 0.0;
    for (std::size_t ch : children[c]) subtree += stability[ch];
    if (stability[c] > subtree) {
      selected[c] = true;
      std::vector<std::size_t> stack(children[c]);
      while (!stack.empty()) {
        const std::size_t d = stack.back();
        stack.pop_back();
        selected[d] = false;
        stack.insert(stack.end(), children[d].begin(), children[d].end());
      }
    } else {
      stability[c] = subtree;
    }
  }

  std::vector<int> cluster_label(clusters, -1);
  for (std::size_t c = 1; c < clusters; ++c) {
    if (selected[c]) {
      cluster_label[c] = static_cast<int>(out.cluster_count++);
      out.stability.push_back(raw_stability[c]);
    }
  }

  // Nearest selected ancestor of every cluster id (or -1).
  std::vector<std::size_t> parent_of(clusters, 0);
  for (const auto& node : tree.nodes) {
    if (node.child >= n) parent_of[node.child - n] = node.parent - n;
  }
  std::vector<int> owner(clusters, -1);
  for (std::size_t c = 1; c < clusters; ++c) {
    owner[c] = selected[c] ? cluster_label[c] : owner[parent_of[c]];
  }

  out.labels.assign(n, -1);
  out.exemplars.resize(out.cluster_count);
  std::vector<double> max_lambda(out.cluster_count, -1.0);
  for (const auto& node : tree.nodes) {
    if (node.child >= n) continue;
    const int label = owner[node.parent - n];
    out.labels[node.child] = label;
    if (label < 0) continue;
    auto& best = max_lambda[static_cast<std::size_t>(label)];
    auto& ex = out.exemplars[static_cast<std::size_t>(label)];
    if (node.lambda > best) {
      best = node.lambda;
      ex.clear();
    }
    if (node.lambda == best) ex.push_back(node.child);
  }
  for (auto& ex : out.exemplars) std::sort(ex.begin(), ex.end());
  return out;
}

ClusterAssignment hdbscan(const Matrix& points, const HdbscanParams& params) {
  if (points.size() < 2) throw DataError("HDBSCAN needs at least 2 points");
  const std::size_t min_samples = std::min(params.min_samples, points.size() - 1);
  const auto core = core_distances(points, min_samples);
  return extract_clusters(mutual_reachability_mst(points, core), params.min_cluster_size);
}

Matrix exemplar_centroids(const Matrix& points, const ClusterAssignment& assignment) {
  Matrix centroids;
  for (const auto& ex : assignment.exemplars) {
    Vector c(points.front().size(), 0.0);
    for (std::size_t idx : ex) {
      for (std::size_t d = 0; d < c.size(); ++d) c[d] += points[idx][d];
    }
    for (double& v : c) v /= static_cast<double>(ex.size());
    centroids.push_back(std::move(c));
  }
  return centroids;
}

double affinity_temperature(const Matrix& centroids) {
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    for (std::size_t j = i + 1; j < centroids.size(); ++j) {
      total += euclidean_distance(centroids[i], centroids[j]);
      ++pairs;
    }
  }
  if (pairs == 0 || total <= 0.0) return 1.0;
  return total / static_cast<double>(pairs);
}

Vector centroid_affinity(std::span<const double> point, const Matrix& centroids, double temperature) {
  Vector logits(centroids.size());
  for (std::size_t c = 0; c < centroids.size(); ++c) logits[c] = -euclidean_distance(point, centroids[c]) / temperature;
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : logits) v /= total;
  return logits;
}

std::vector<AffinityVector> soft_membership(const Matrix& points, const ClusterAssignment& assignment,
                                            const std::vector<std::string>& app_ids) {
  if (assignment.cluster_count == 0) {
    throw NumericError("density clustering found no topics; lower min_cluster_size or min_samples");
  }
  const Matrix centroids = exemplar_centroids(points, assignment);
  const double temperature = affinity_temperature(centroids);
  std::vector<AffinityVector> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    AffinityVector av;
    if (i < app_ids.size()) av.app_id = app_ids[i];
    av.affinities = centroid_affinity(points[i], centroids, temperature);
    av.assigned_topic = argmax(av.affinities);
    out.push_back(std::move(av));
  }
  return out;
}

AffinityHistograms affinity_stats(const std::vector<Vector>& affinities) {
  constexpr std::size_t bins = AffinityHistograms::kBins;
  AffinityHistograms h{std::vector<std::size_t>(bins, 0), std::vector<std::size_t>(bins, 0)};
  auto bin_of = [](double v) {
    const auto b = static_cast<long>(std::floor(v * static_cast<double>(bins)));
    return static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(bins) - 1));
  };
  for (const auto& a : affinities) {
    double first = 0.0, second = 0.0;
    for (double v : a) {
      if (v > first) {
        second = first;
        first = v;
      } else if (v > second) {
        second = v;
      }
    }
    ++h.first[bin_of(first)];
    ++h.second[bin_of(second)];
  }
  return h;
}

}  // namespace apptopic
