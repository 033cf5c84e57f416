#include "apptopic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace apptopic {
namespace {

double pct(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

double choose2(double n) { return n * (n - 1.0) / 2.0; }

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double ConfusionCounts::tpr() const { return pct(tp, tp + fn); }
double ConfusionCounts::tnr() const { return pct(tn, tn + fp); }
double ConfusionCounts::fpr() const { return pct(fp, fp + tn); }
double ConfusionCounts::fnr() const { return pct(fn, fn + tp); }

double ConfusionCounts::f1() const {
  const std::size_t den = 2 * tp + fp + fn;
  return den == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(den);
}

double f1_from_rates(double tpr_percent, double fpr_percent, std::size_t positives, std::size_t negatives) {
  const double tp = tpr_percent / 100.0 * static_cast<double>(positives);
  const double fn = static_cast<double>(positives) - tp;
  const double fp = fpr_percent / 100.0 * static_cast<double>(negatives);
  const double den = 2.0 * tp + fp + fn;
  return den == 0.0 ? 0.0 : 2.0 * tp / den;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: size mismatch");
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [_, c] : table) index += choose2(c);
  for (const auto& [_, c] : rows) sum_rows += choose2(c);
  for (const auto& [_, c] : cols) sum_cols += choose2(c);
  const double expected = sum_rows * sum_cols / choose2(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double purity(const std::vector<int>& clusters, const std::vector<int>& reference) {
  if (clusters.size() != reference.size()) throw std::invalid_argument("purity: size mismatch");
  if (clusters.empty()) return 1.0;
  std::map<int, std::map<int, std::size_t>> counts;
  for (std::size_t i = 0; i < clusters.size(); ++i) ++counts[clusters[i]][reference[i]];
  std::size_t hit = 0;
  for (const auto& [_, by_ref] : counts) {
    std::size_t best = 0;
    for (const auto& [__, c] : by_ref) best = std::max(best, c);
    hit += best;
  }
  return static_cast<double>(hit) / static_cast<double>(clusters.size());
}

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman_correlation: size mismatch");
  if (x.size() < 2) return 0.0;
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace apptopic
