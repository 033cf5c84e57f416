#include "apptopic/reducer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "apptopic/errors.hpp"

namespace apptopic {
namespace {

bool neighbor_less(const std::pair<std::size_t, double>& x, const std::pair<std::size_t, double>& y) {
  return x.second < y.second || (x.second == y.second && x.first < y.first);
}

double clip_gradient(double g) { return std::clamp(g, -4.0, 4.0); }

}  // namespace

std::vector<std::pair<std::size_t, double>> nearest_neighbors(const Matrix& points, std::span<const double> query,
                                                              std::size_t k) {
  std::vector<std::pair<std::size_t, double>> cand;
  cand.reserve(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    cand.emplace_back(j, euclidean_distance(points[j], query));
  }
  k = std::min(k, cand.size());
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(), neighbor_less);
  cand.resize(k);
  return cand;
}

KnnGraph knn_graph(const Matrix& points, std::size_t k) {
  const std::size_t n = points.size();
  if (n < 2) throw std::invalid_argument("knn_graph: need at least 2 points");
  if (k == 0 || k >= n) throw std::invalid_argument(fmt::format("knn_graph: k={} must be in [1, n) with n={}", k, n));
  KnnGraph g;
  g.k = k;
  g.indices.resize(n);
  g.distances.resize(n);
  std::vector<std::pair<std::size_t, double>> cand;
  cand.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back(j, euclidean_distance(points[i], points[j]));
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(), neighbor_less);
    for (std::size_t r = 0; r < k; ++r) {
      g.indices[i].push_back(cand[r].first);
      g.distances[i].push_back(cand[r].second);
    }
  }
  return g;
}

double FuzzyGraph::weight(std::size_t i, std::size_t j) const {
  const auto& row = rows[i];
  auto it = std::lower_bound(row.begin(), row.end(), j, [](const auto& e, std::size_t c) { return e.first < c; });
  return (it != row.end() && it->first == j) ? it->second : 0.0;
}

std::size_t FuzzyGraph::edge_count() const {
  std::size_t c = 0;
  for (const auto& r : rows) c += r.size();
  return c;
}

FuzzyGraph fuzzy_simplicial_set(const KnnGraph& graph) {
  const std::size_t n = graph.indices.size();
  FuzzyGraph fg;
  fg.n = n;
  fg.rho.assign(n, 0.0);
  fg.sigma.assign(n, 1.0);
  fg.directed.resize(n);
  const double target = std::log2(static_cast<double>(graph.k));

  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = graph.distances[i];
    const double rho = d.empty() ? 0.0 : d.front();
    auto membership_sum = [&](double sigma) {
      double s = 0.0;
      for (double dij : d) s += std::exp(-std::max(0.0, dij - rho) / sigma);
      return s;
    };
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double mid = 1.0;
    for (int iter = 0; iter < 256; ++iter) {
      const double s = membership_sum(mid);
      if (std::abs(s - target) < kSigmaTolerance) break;
      if (s > target) {
        hi = mid;
        mid = 0.5 * (lo + hi);
      } else {
        lo = mid;
        mid = std::isinf(hi) ? mid * 2.0 : 0.5 * (lo + hi);
      }
    }
    const double sigma = std::max(mid, kMinSigma);
    fg.rho[i] = rho;
    fg.sigma[i] = sigma;
    fg.directed[i].reserve(d.size());
    for (double dij : d) fg.directed[i].push_back(std::exp(-std::max(0.0, dij - rho) / sigma));
  }

  // Dense-by-row accumulation of the directed weights, then the t-conorm.
  std::vector<std::vector<std::pair<std::size_t, double>>> directed_rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < graph.indices[i].size(); ++r) {
      directed_rows[i].emplace_back(graph.indices[i][r], fg.directed[i][r]);
    }
    std::sort(directed_rows[i].begin(), directed_rows[i].end());
  }
  auto directed_weight = [&](std::size_t i, std::size_t j) {
    const auto& row = directed_rows[i];
    auto it = std::lower_bound(row.begin(), row.end(), j, [](const auto& e, std::size_t c) { return e.first < c; });
    return (it != row.end() && it->first == j) ? it->second : -1.0;
  };
  fg.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : directed_rows[i]) {
      const double reverse = directed_weight(j, i);
      const double wt = std::max(reverse, 0.0);
      // Both orientations compute the same expression so the matrix is exactly symmetric.
      const double a = std::min(w, wt);
      const double b = std::max(w, wt);
      const double sym = a + b - a * b;
      fg.rows[i].emplace_back(j, sym);
      if (reverse < 0.0) fg.rows[j].emplace_back(i, sym);
    }
  }
  for (auto& row : fg.rows) std::sort(row.begin(), row.end());
  return fg;
}

CurveParams fit_curve(double min_dist, double spread) {
  constexpr int kSamples = 300;
  std::vector<double> xs(kSamples), ys(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    xs[i] = 3.0 * spread * static_cast<double>(i + 1) / kSamples;
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }
  auto residual_sq = [&](double a, double b) {
    double s = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const double r = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b)) - ys[i];
      s += r * r;
    }
    return s;
  };

  // Levenberg-Marquardt on (a, b).
  double a = 1.0, b = 1.0, lambda = 1e-3;
  double cost = residual_sq(a, b);
  for (int iter = 0; iter < 500; ++iter) {
    double jtj00 = 0, jtj01 = 0, jtj11 = 0, jtr0 = 0, jtr1 = 0;
    for (int i = 0; i < kSamples; ++i) {
      const double x2b = std::pow(xs[i], 2.0 * b);
      const double denom = 1.0 + a * x2b;
      const double f = 1.0 / denom;
      const double r = f - ys[i];
      const double da = -x2b / (denom * denom);
      const double db = -a * x2b * 2.0 * std::log(xs[i]) / (denom * denom);
      jtj00 += da * da;
      jtj01 += da * db;
      jtj11 += db * db;
      jtr0 += da * r;
      jtr1 += db * r;
    }
    bool improved = false;
    for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
      const double m00 = jtj00 * (1.0 + lambda), m11 = jtj11 * (1.0 + lambda);
      const double det = m00 * m11 - jtj01 * jtj01;
      if (det == 0.0) {
        lambda *= 10.0;
        continue;
      }
      const double step_a = -(m11 * jtr0 - jtj01 * jtr1) / det;
      const double step_b = -(m00 * jtr1 - jtj01 * jtr0) / det;
      const double na = a + step_a, nb = b + step_b;
      const double ncost = (na > 0 && nb > 0) ? residual_sq(na, nb) : std::numeric_limits<double>::infinity();
      if (ncost < cost) {
        const double gain = cost - ncost;
        a = na;
        b = nb;
        cost = ncost;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (gain < 1e-16) return {a, b};
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return {a, b};
}

LowDimLayout optimize_layout(const FuzzyGraph& graph, const LayoutParams& params) {
  return optimize_layout(graph, params, EpochObserver{});
}

LowDimLayout optimize_layout(const FuzzyGraph& graph, const LayoutParams& params, const EpochObserver& observer) {
  if (params.dim < 2) throw std::invalid_argument("optimize_layout: dim must be >= 2");
  if (params.epochs < 1) throw std::invalid_argument("optimize_layout: epochs must be >= 1");
  const std::size_t n = graph.n;
  const std::size_t dim = params.dim;

  LowDimLayout out;
  out.params = params;
  out.curve = fit_curve(params.min_dist);
  const double a = out.curve.a;
  const double b = out.curve.b;

  Rng rng(params.seed);
  out.points.assign(n, Vector(dim));
  for (auto& p : out.points) {
    for (auto& c : p) c = uniform_real(rng, -10.0, 10.0);
  }

  // Edge list in row-major order; both orientations of every pair are present.
  std::vector<std::size_t> head, tail;
  std::vector<double> weights;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : graph.rows[i]) {
      head.push_back(i);
      tail.push_back(j);
      weights.push_back(w);
    }
  }
  const double epochs = static_cast<double>(params.epochs);
  const double max_w = weights.empty() ? 0.0 : *std::max_element(weights.begin(), weights.end());
  std::vector<double> epochs_per_sample(weights.size(), -1.0);
  for (std::size_t e = 0; e < weights.size(); ++e) {
    if (weights[e] >= max_w / epochs && weights[e] > 0.0) epochs_per_sample[e] = max_w / weights[e];
  }
  const double neg_rate = static_cast<double>(params.negative_samples);
  std::vector<double> epochs_per_negative(weights.size());
  for (std::size_t e = 0; e < weights.size(); ++e) epochs_per_negative[e] = epochs_per_sample[e] / neg_rate;
  std::vector<double> next_sample = epochs_per_sample;
  std::vector<double> next_negative = epochs_per_negative;

  auto& emb = out.points;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    const double alpha = 1.0 - static_cast<double>(epoch) / epochs;
    const double now = static_cast<double>(epoch);
    for (std::size_t e = 0; e < head.size(); ++e) {
      if (epochs_per_sample[e] <= 0.0 || next_sample[e] > now) continue;
      auto& current = emb[head[e]];
      auto& other = emb[tail[e]];

      double dist_sq = squared_distance(current, other);
      double grad_coeff = 0.0;
      if (dist_sq > 0.0) {
        grad_coeff = -2.0 * a * b * std::pow(dist_sq, b - 1.0) / (a * std::pow(dist_sq, b) + 1.0);
      }
      for (std::size_t d = 0; d < dim; ++d) {
        const double g = clip_gradient(grad_coeff * (current[d] - other[d]));
        current[d] += g * alpha;
        other[d] -= g * alpha;
      }
      next_sample[e] += epochs_per_sample[e];

      const auto n_neg = static_cast<std::size_t>((now - next_negative[e]) / epochs_per_negative[e]);
      for (std::size_t s = 0; s < n_neg; ++s) {
        const std::size_t k = uniform_index(rng, n);
        if (k == head[e]) continue;
        const auto& neg = emb[k];
        dist_sq = squared_distance(current, neg);
        if (dist_sq > 0.0) {
          grad_coeff = 2.0 * b / ((0.001 + dist_sq) * (a * std::pow(dist_sq, b) + 1.0));
          for (std::size_t d = 0; d < dim; ++d) current[d] += clip_gradient(grad_coeff * (current[d] - neg[d])) * alpha;
        } else {
          for (std::size_t d = 0; d < dim; ++d) current[d] += 4.0 * alpha;
        }
      }
      next_negative[e] += static_cast<double>(n_neg) * epochs_per_negative[e];
    }
    if (observer) observer(epoch, emb);
  }
  for (const auto& p : emb) {
    for (double c : p) {
      if (!std::isfinite(c)) throw NumericError("optimize_layout produced a non-finite coordinate");
    }
  }
  return out;
}

LowDimLayout fit_umap(const Matrix& points, const LayoutParams& params) {
  const std::size_t n = points.size();
  if (n < 2) throw DataError("UMAP needs at least 2 points");
  const std::size_t k = std::min(params.n_neighbors, n - 1);

  std::vector<std::uint64_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    Fnv1a h;
    for (double v : points[i]) h.update_double(v);
    keys[i] = h.digest();
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (keys[x] != keys[y]) return keys[x] < keys[y];
    return points[x] < points[y];
  });
  Matrix canonical(n);
  for (std::size_t c = 0; c < n; ++c) canonical[c] = points[order[c]];

  LayoutParams effective = params;
  effective.n_neighbors = k;
  LowDimLayout layout = optimize_layout(fuzzy_simplicial_set(knn_graph(canonical, k)), effective);

  Matrix restored(n);
  for (std::size_t c = 0; c < n; ++c) restored[order[c]] = std::move(layout.points[c]);
  layout.points = std::move(restored);
  layout.params.n_neighbors = params.n_neighbors;
  return layout;
}

Vector transform_point(const Matrix& training_points, const Matrix& training_layout, std::span<const double> query,
                       std::size_t k) {
  if (training_points.empty()) throw std::invalid_argument("transform_point: empty training set");
  const auto nn = nearest_neighbors(training_points, query, k);
  const std::size_t dim = training_layout.front().size();
  Vector out(dim, 0.0);

  std::size_t exact = 0;
  for (const auto& [idx, dist] : nn) {
    if (dist != 0.0) break;
    for (std::size_t d = 0; d < dim; ++d) out[d] += training_layout[idx][d];
    ++exact;
  }
  if (exact > 0) {
    for (double& v : out) v /= static_cast<double>(exact);
    return out;
  }

  double mean = 0.0;
  for (const auto& nb : nn) mean += nb.second;
  mean /= static_cast<double>(nn.size());
  double total = 0.0;
  for (const auto& [idx, dist] : nn) {
    const double w = std::exp(-dist / mean);
    total += w;
    for (std::size_t d = 0; d < dim; ++d) out[d] += w * training_layout[idx][d];
  }
  for (double& v : out) v /= total;
  return out;
}

double neighborhood_overlap(const Matrix& original, const Matrix& reduced, std::size_t k) {
  const KnnGraph a = knn_graph(original, k);
  const KnnGraph b = knn_graph(reduced, k);
  double total = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    std::vector<std::size_t> x = a.indices[i], y = b.indices[i];
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::vector<std::size_t> common;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
    total += static_cast<double>(common.size()) / static_cast<double>(k);
  }
  return total / static_cast<double>(original.size());
}

}  // namespace apptopic
