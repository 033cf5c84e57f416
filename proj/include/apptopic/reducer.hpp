#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "apptopic/util.hpp"

namespace apptopic {

// Exact Euclidean k-nearest-neighbour graph. Rows are sorted by distance with
// ties broken by the lower index; a point is never its own neighbour.
struct KnnGraph {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> indices;
  std::vector<std::vector<double>> distances;
};

KnnGraph knn_graph(const Matrix& points, std::size_t k);

// k nearest rows of `points` to `query`, as (index, distance), same ordering rule.
std::vector<std::pair<std::size_t, double>> nearest_neighbors(const Matrix& points, std::span<const double> query,
                                                              std::size_t k);

struct FuzzyGraph {
  std::size_t n = 0;
  std::vector<double> rho;
  std::vector<double> sigma;
  // Directed memberships, parallel to the KnnGraph rows.
  std::vector<std::vector<double>> directed;
  // Symmetrised weights; each row sorted by column index.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  double weight(std::size_t i, std::size_t j) const;
  std::size_t edge_count() const;
};

inline constexpr double kMinSigma = 1e-3;
inline constexpr double kSigmaTolerance = 1e-5;

// Per point: rho = nearest distance, sigma by bisection so that the directed
// memberships sum to log2(k). Symmetrised with w = a + b - a*b.
FuzzyGraph fuzzy_simplicial_set(const KnnGraph& graph);

struct CurveParams {
  double a = 0.0;
  double b = 0.0;
};

// Least-squares fit of 1 / (1 + a x^(2b)) to the offset exponential membership
// curve, on 300 evenly spaced samples in (0, 3 * spread].
CurveParams fit_curve(double min_dist, double spread = 1.0);

struct LayoutParams {
  std::size_t n_neighbors = 15;
  std::size_t dim = 5;
  std::size_t epochs = 200;
  double min_dist = 0.1;
  std::size_t negative_samples = 5;
  std::uint64_t seed = 0;
};

struct LowDimLayout {
  LayoutParams params;
  CurveParams curve;
  Matrix points;
};

// Single-threaded SGD on the fuzzy cross-entropy with a seeded uniform
// initialisation in [-10, 10]^dim. Bit-reproducible for a given seed.
LowDimLayout optimize_layout(const FuzzyGraph& graph, const LayoutParams& params);

using EpochObserver = std::function<void(std::size_t epoch, const Matrix& points)>;
LowDimLayout optimize_layout(const FuzzyGraph& graph, const LayoutParams& params, const EpochObserver& observer);

// Full fit: points are processed in a canonical content-derived order so the
// layout is equivariant under permutation of the input rows.
LowDimLayout fit_umap(const Matrix& points, const LayoutParams& params);

// Out-of-sample mapping by kNN barycentric interpolation of the training
// layout. Weights exp(-d / mean(d)); an exact match returns that training
// point's position (averaged over exact duplicates).
Vector transform_point(const Matrix& training_points, const Matrix& training_layout, std::span<const double> query,
                       std::size_t k);

// Mean fraction of each point's k nearest neighbours shared between the two spaces.
double neighborhood_overlap(const Matrix& original, const Matrix& reduced, std::size_t k);

}  // namespace apptopic
