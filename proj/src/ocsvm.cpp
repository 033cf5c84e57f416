#include "apptopic/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace apptopic {

double Kernel::operator()(std::span<const double> x, std::span<const double> y) const {
  if (type == KernelType::kLinear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    return dot;
  }
  return std::exp(-gamma * squared_distance(x, y));
}

std::string_view to_string(KernelType type) { return type == KernelType::kRbf ? "rbf" : "linear"; }

double ocsvm_rho(std::span<const double> alpha, std::span<const double> gradient, double upper) {
  // Bound detection allows for the rounding of the alpha updates.
  const double eps = 1e-12 * std::max(1.0, upper);
  // Free gradients are averaged as offsets from their minimum so that equal
  // values give back exactly that value.
  double free_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] < upper - eps && alpha[i] > eps) free_min = std::min(free_min, gradient[i]);
  }
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double lb = -std::numeric_limits<double>::infinity();  // from alpha at the upper bound: G <= rho
  double ub = std::numeric_limits<double>::infinity();   // from alpha at zero: G >= rho
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] >= upper - eps) {
      lb = std::max(lb, gradient[i]);
    } else if (alpha[i] <= eps) {
      ub = std::min(ub, gradient[i]);
    } else {
      free_sum += gradient[i] - free_min;
      ++free_count;
    }
  }
  if (free_count > 0) return free_min + free_sum / static_cast<double>(free_count);
  if (std::isinf(ub)) return lb;
  if (std::isinf(lb)) return ub;
  return 0.5 * (lb + ub);
}

OcSvmDual solve_ocsvm_dual(const Matrix& gram, double nu, double tolerance, std::size_t max_updates) {
  const std::size_t n = gram.size();
  if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument(fmt::format("nu={} outside (0, 1]", nu));
  if (n < 2) throw std::invalid_argument("one-class SVM needs at least 2 training points");
  const double upper = 1.0 / (nu * static_cast<double>(n));

  OcSvmDual out;
  // The uniform point is feasible for every nu and keeps symmetric problems symmetric.
  out.alpha.assign(n, 1.0 / static_cast<double>(n));  // equals upper when nu = 1
  out.gradient.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (out.alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) out.gradient[j] += gram[j][i] * out.alpha[i];
  }

  auto& a = out.alpha;
  auto& g = out.gradient;
  while (true) {
    // i: may increase (alpha < upper), smallest gradient.
    // j: may decrease (alpha > 0), largest gradient.
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (a[t] < upper && (i == n || g[t] < g[i])) i = t;
      if (a[t] > 0.0 && (j == n || g[t] > g[j])) j = t;
    }
    out.max_violation = (i == n || j == n) ? 0.0 : std::max(0.0, g[j] - g[i]);
    if (out.max_violation < tolerance || out.updates >= max_updates) break;

    double eta = gram[i][i] + gram[j][j] - 2.0 * gram[i][j];
    if (eta <= 0.0) eta = 1e-12;
    double delta = (g[j] - g[i]) / eta;
    delta = std::min({delta, upper - a[i], a[j]});
    if (delta <= 0.0) break;
    a[i] += delta;
    a[j] -= delta;
    if (upper - a[i] < 1e-15 * upper) a[i] = upper;
    if (a[j] < 1e-15 * upper) a[j] = 0.0;
    for (std::size_t t = 0; t < n; ++t) g[t] += delta * (gram[t][i] - gram[t][j]);
    ++out.updates;
  }

  // Fresh gradient in the summation order of ocsvm_decision, so a training
  // point's decision value is exactly its gradient minus rho.
  for (std::size_t t = 0; t < n; ++t) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (a[k] > 0.0) s += a[k] * gram[k][t];
    }
    g[t] = s;
  }
  out.rho = ocsvm_rho(a, g, upper);
  out.objective = 0.0;
  for (std::size_t t = 0; t < n; ++t) out.objective += 0.5 * a[t] * g[t];
  return out;
}

OcSvmModel ocsvm_fit(const Matrix& points, const OcSvmParams& params) {
  const std::size_t n = points.size();
  if (!(params.nu > 0.0 && params.nu <= 1.0)) throw std::invalid_argument(fmt::format("nu={} outside (0, 1]", params.nu));
  if (n < 2) throw std::invalid_argument("one-class SVM needs at least 2 training points");
  Matrix gram(n, Vector(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) gram[i][j] = gram[j][i] = params.kernel(points[i], points[j]);
  }
  const OcSvmDual dual = solve_ocsvm_dual(gram, params.nu, params.tolerance, params.max_updates);

  OcSvmModel m;
  m.kernel = params.kernel;
  m.nu = params.nu;
  m.rho = dual.rho;
  m.n_train = n;
  m.objective = dual.objective;
  m.max_violation = dual.max_violation;
  m.updates = dual.updates;
  for (std::size_t i = 0; i < n; ++i) {
    if (dual.alpha[i] > 0.0) m.support.push_back({points[i], dual.alpha[i]});
  }
  return m;
}

double ocsvm_decision(const OcSvmModel& model, std::span<const double> x) {
  double s = 0.0;
  for (const auto& sv : model.support) {
    if (sv.x.size() != x.size()) {
      throw std::invalid_argument(fmt::format("ocsvm_decision: dimension {} does not match model {}", x.size(), sv.x.size()));
    }
    s += sv.alpha * model.kernel(sv.x, x);
  }
  // Margin points can land an ulp either side of zero; round-off is not a verdict.
  const double f = s - model.rho;
  return std::abs(f) <= kDecisionRoundoff * std::max(std::abs(s), std::abs(model.rho)) ? 0.0 : f;
}

Verdict ocsvm_predict(const OcSvmModel& model, std::span<const double> x) {
  return ocsvm_decision(model, x) >= 0.0 ? Verdict::kInlier : Verdict::kOutlier;
}

}  // namespace apptopic
