#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "apptopic/util.hpp"

namespace apptopic {

enum class KernelType { kRbf, kLinear };

struct Kernel {
  KernelType type = KernelType::kRbf;
  double gamma = 1.0;  // rbf only

  double operator()(std::span<const double> x, std::span<const double> y) const;
};

std::string_view to_string(KernelType type);

struct OcSvmParams {
  double nu = 0.15;
  Kernel kernel;
  double tolerance = 1e-4;  // max KKT violation at convergence
  std::size_t max_updates = 100000;
};

struct SupportVector {
  Vector x;
  double alpha = 0.0;
};

// Scholkopf one-class SVM, scaled so that sum(alpha) = 1 and
// 0 <= alpha_i <= 1 / (nu * n). Decision f(x) = sum alpha_i K(x_i, x) - rho.
struct OcSvmModel {
  Kernel kernel;
  double nu = 0.0;
  double rho = 0.0;
  std::size_t n_train = 0;
  std::vector<SupportVector> support;

  // Solver diagnostics.
  double objective = 0.0;
  double max_violation = 0.0;
  std::size_t updates = 0;
};

enum class Verdict { kInlier, kOutlier };

// SMO with maximal-violating-pair working set selection. Throws
// std::invalid_argument for nu outside (0, 1] or fewer than two points.
OcSvmModel ocsvm_fit(const Matrix& points, const OcSvmParams& params);

// Dual variables for every training point (zeros included), for diagnostics.
struct OcSvmDual {
  Vector alpha;
  Vector gradient;  // Q alpha
  double rho = 0.0;
  double objective = 0.0;
  double max_violation = 0.0;
  std::size_t updates = 0;
};

OcSvmDual solve_ocsvm_dual(const Matrix& gram, double nu, double tolerance, std::size_t max_updates);

// KKT-consistent offset: mean gradient over free variables, else the midpoint
// of the feasible interval.
double ocsvm_rho(std::span<const double> alpha, std::span<const double> gradient, double upper);

// Relative size below which a decision value is treated as exactly 0.
inline constexpr double kDecisionRoundoff = 1e-12;

double ocsvm_decision(const OcSvmModel& model, std::span<const double> x);

// Inlier iff f(x) >= 0.
Verdict ocsvm_predict(const OcSvmModel& model, std::span<const double> x);

}  // namespace apptopic
