#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "apptopic/util.hpp"

namespace apptopic {

// Distance to the min_samples-th nearest neighbour, self excluded.
std::vector<double> core_distances(const Matrix& points, std::size_t min_samples);

struct MstEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;  // mutual reachability distance
};

double mutual_reachability(std::span<const double> x, std::span<const double> y, double core_x, double core_y);

// Prim's algorithm over the dense mutual-reachability metric; n - 1 edges.
std::vector<MstEdge> mutual_reachability_mst(const Matrix& points, std::span<const double> core);

// Condensed cluster tree. Points are ids 0..n-1, clusters are ids n.. with the
// root at n. lambda = 1 / distance.
struct CondensedNode {
  std::size_t parent = 0;
  std::size_t child = 0;
  double lambda = 0.0;
  std::size_t child_size = 0;
};

struct CondensedTree {
  std::size_t n_points = 0;
  std::size_t min_cluster_size = 0;
  std::vector<CondensedNode> nodes;

  std::size_t root() const { return n_points; }
  // Number of cluster ids (root included).
  std::size_t cluster_count() const;
};

// Zero distances are clamped here before inverting to lambda.
inline constexpr double kMinLambdaDistance = 1e-12;

CondensedTree condense_tree(const std::vector<MstEdge>& mst, std::size_t min_cluster_size);

// Sum over children of (lambda_child - lambda_birth) * child_size, indexed by
// cluster id - n_points.
std::vector<double> cluster_stabilities(const CondensedTree& tree);

struct ClusterAssignment {
  std::vector<int> labels;  // -1 noise, else 0..C-1
  std::size_t cluster_count = 0;
  std::vector<std::vector<std::size_t>> exemplars;
  std::vector<double> stability;
  CondensedTree tree;
};

// Excess-of-mass selection over the condensed tree; the root is never selected.
ClusterAssignment extract_clusters(const std::vector<MstEdge>& mst, std::size_t min_cluster_size);

struct HdbscanParams {
  std::size_t min_cluster_size = 10;
  std::size_t min_samples = 10;
};

ClusterAssignment hdbscan(const Matrix& points, const HdbscanParams& params);

struct AffinityVector {
  std::string app_id;
  Vector affinities;
  int assigned_topic = -1;
};

// Mean of each cluster's exemplar points.
Matrix exemplar_centroids(const Matrix& points, const ClusterAssignment& assignment);

// Mean pairwise centroid distance; 1 when fewer than two distinct centroids.
double affinity_temperature(const Matrix& centroids);

// Softmax of -distance / temperature over the cluster centroids.
Vector centroid_affinity(std::span<const double> point, const Matrix& centroids, double temperature);

// Throws NumericError when no cluster was found.
std::vector<AffinityVector> soft_membership(const Matrix& points, const ClusterAssignment& assignment,
                                            const std::vector<std::string>& app_ids = {});

struct AffinityHistograms {
  static constexpr std::size_t kBins = 20;
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
};

AffinityHistograms affinity_stats(const std::vector<Vector>& affinities);

}  // namespace apptopic
