#include "apptopic/flat_cluster.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace apptopic {
namespace {

std::size_t nearest(const Matrix& centroids, std::span<const double> x, double* dist_sq) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(centroids[c], x);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist_sq) *dist_sq = best_d;
  return best;
}

Matrix plus_plus_init(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.size();
  Matrix centroids;
  centroids.push_back(points[uniform_index(rng, n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);
  while (centroids.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total <= 0.0) {
      // Every point coincides with a centroid; take the first unused index.
      pick = centroids.size() % n;
    } else {
      double u = uniform01(rng) * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        u -= d2[i];
        if (u < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
  }
  return centroids;
}

}  // namespace

KMeansModel kmeans_fit(const Matrix& points, std::size_t k, std::size_t max_iter, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (k == 0) throw std::invalid_argument("kmeans_fit: k must be positive");
  if (k > n) throw std::invalid_argument(fmt::format("kmeans_fit: k={} exceeds point count {}", k, n));
  const std::size_t dim = points.front().size();

  KMeansModel m;
  m.k = k;
  m.seed = seed;
  Rng rng(seed);
  m.centroids = plus_plus_init(points, k, rng);

  std::vector<std::size_t> assign(n, k);  // k = unassigned sentinel
  std::vector<double> dist(n, 0.0);
  for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iter, 1); ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest(m.centroids, points[i], &dist[i]);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }

    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t c : assign) ++sizes[c];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[assign[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
      }
      if (far == n) continue;
      --sizes[assign[far]];
      assign[far] = c;
      ++sizes[c];
      m.centroids[c] = points[far];
      dist[far] = 0.0;
      changed = true;
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += squared_distance(points[i], m.centroids[assign[i]]);
    m.inertia_history.push_back(inertia);
    m.iterations_run = iter + 1;
    if (!changed && iter > 0) break;

    Matrix sums(k, Vector(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t d = 0; d < dim; ++d) m.centroids[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
    }
  }
  m.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) m.inertia += squared_distance(points[i], m.centroids[assign[i]]);
  return m;
}

std::size_t kmeans_assign(const KMeansModel& model, std::span<const double> x) {
  if (model.centroids.empty() || x.size() != model.centroids.front().size()) {
    throw std::invalid_argument("kmeans_assign: dimension mismatch");
  }
  return nearest(model.centroids, x, nullptr);
}

}  // namespace apptopic
