#include <gtest/gtest.h>

#include "apptopic/flat_cluster.hpp"
#include "apptopic/metrics.hpp"
#include "oracles.hpp"

using namespace apptopic;

TEST(KMeans, TwoFarPairs) {
  const Matrix pts{{0, 0}, {0, 2}, {10, 0}, {10, 2}};
  const auto m = kmeans_fit(pts, 2, 100, 3);
  Matrix c = m.centroids;
  std::sort(c.begin(), c.end());
  EXPECT_EQ(c, (Matrix{{0, 1}, {10, 1}}));
  EXPECT_DOUBLE_EQ(m.inertia, 4.0);
}

TEST(KMeans, KEqualsN) {
  const Matrix pts{{1, 2}, {3, 4}, {-1, 0}, {7, 7}, {0, 9}};
  EXPECT_DOUBLE_EQ(kmeans_fit(pts, 5, 50, 1).inertia, 0.0);
  EXPECT_THROW(kmeans_fit(pts, 6, 50, 1), std::invalid_argument);
}

TEST(KMeans, BlobsRecovered) {
  std::mt19937_64 rng(13);
  std::vector<int> truth;
  const auto pts = oracle::gaussian_blobs({{0, 0, 0}, {20, 0, 0}, {0, 20, 0}}, 67, 1.0, rng, &truth);
  const auto m = kmeans_fit(pts, 3, 300, 5);
  std::vector<int> got;
  for (const auto& p : pts) got.push_back(static_cast<int>(kmeans_assign(m, p)));
  EXPECT_DOUBLE_EQ(adjusted_rand_index(got, truth), 1.0);

  std::vector<int> held_truth;
  const auto held = oracle::gaussian_blobs({{0, 0, 0}, {20, 0, 0}, {0, 20, 0}}, 5, 1.0, rng, &held_truth);
  // Map each planted blob to the cluster holding its training points.
  std::map<int, std::size_t> blob_cluster;
  for (std::size_t i = 0; i < pts.size(); ++i) blob_cluster[truth[i]] = static_cast<std::size_t>(got[i]);
  for (std::size_t i = 0; i < held.size(); ++i) EXPECT_EQ(kmeans_assign(m, held[i]), blob_cluster[held_truth[i]]);
}

TEST(KMeans, InertiaNonIncreasingAndFixpoint) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix pts(300, Vector(4));
  for (auto& p : pts) {
    for (auto& x : p) x = u(rng);
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = kmeans_fit(pts, 12, 300, seed);
    ASSERT_FALSE(m.inertia_history.empty());
    for (std::size_t i = 1; i < m.inertia_history.size(); ++i) EXPECT_LE(m.inertia_history[i], m.inertia_history[i - 1]);
    double inertia = 0.0;
    for (const auto& p : pts) inertia += squared_distance(p, m.centroids[kmeans_assign(m, p)]);
    EXPECT_NEAR(inertia, m.inertia, 1e-9 * inertia);
    // One more Lloyd step from the fitted centroids moves nothing.
    Matrix next(m.k, Vector(4, 0.0));
    std::vector<std::size_t> count(m.k, 0);
    for (const auto& p : pts) {
      const auto c = kmeans_assign(m, p);
      ++count[c];
      for (std::size_t d = 0; d < 4; ++d) next[c][d] += p[d];
    }
    for (std::size_t c = 0; c < m.k; ++c) {
      for (std::size_t d = 0; d < 4; ++d) EXPECT_NEAR(next[c][d] / count[c], m.centroids[c][d], 1e-12);
    }
  }
}

TEST(KMeans, Deterministic) {
  std::mt19937_64 rng(2);
  const auto pts = oracle::gaussian_blobs({{0, 0}, {5, 5}}, 30, 2.0, rng);
  const auto a = kmeans_fit(pts, 4, 100, 8), b = kmeans_fit(pts, 4, 100, 8);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.inertia_history, b.inertia_history);
}

TEST(KMeansAssign, Rules) {
  KMeansModel m;
  m.k = 3;
  m.centroids = {{0, 0}, {2, 0}, {5, 5}};
  EXPECT_EQ(kmeans_assign(m, Vector{5, 5}), 2u);
  EXPECT_EQ(kmeans_assign(m, Vector{1, 0}), 0u);
  EXPECT_THROW(kmeans_assign(m, Vector{1, 0, 0}), std::invalid_argument);
}
