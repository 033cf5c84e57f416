#pragma once

#include <cstddef>
#include <vector>

namespace apptopic {

// Malicious is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  // Percentages; 0 when the denominator is empty.
  double tpr() const;
  double tnr() const;
  double fpr() const;
  double fnr() const;
  // 2TP / (2TP + FP + FN); 0 when undefined.
  double f1() const;
};

// F1 rebuilt from the rates and class sizes; used to cross-check f1().
double f1_from_rates(double tpr_percent, double fpr_percent, std::size_t positives, std::size_t negatives);

double round_to(double value, int decimals);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// Fraction of items whose cluster's majority reference label matches their own.
double purity(const std::vector<int>& clusters, const std::vector<int>& reference);

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace apptopic
