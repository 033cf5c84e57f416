#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "apptopic/util.hpp"

namespace apptopic {

struct KMeansModel {
  std::size_t k = 0;
  Matrix centroids;
  double inertia = 0.0;
  std::size_t iterations_run = 0;
  std::uint64_t seed = 0;
  // Inertia after each assignment step, in order.
  std::vector<double> inertia_history;
};

inline constexpr std::size_t kDefaultKMeansIterations = 300;

// k-means++ seeding then Lloyd iterations to an assignment fixpoint or
// max_iter. An empty cluster takes the point farthest from its centroid.
KMeansModel kmeans_fit(const Matrix& points, std::size_t k, std::size_t max_iter, std::uint64_t seed);

// Nearest centroid, ties to the lowest index.
std::size_t kmeans_assign(const KMeansModel& model, std::span<const double> x);

}  // namespace apptopic
