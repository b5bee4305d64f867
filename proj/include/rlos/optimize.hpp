#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rlos {

struct NelderMeadOptions {
  /// Stop when every vertex lies within rel_tol * max(1, |best|_inf) of the best one.
  double rel_tol = 1e-8;
  int max_evaluations = 20000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Adaptive Nelder-Mead (dimension-dependent coefficients). The objective may
/// return +inf for infeasible points; the start point must be finite.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start, std::span<const double> steps,
                             const NelderMeadOptions& options = {});

/// Central-difference score (negative gradient of the objective) and
/// symmetrized Hessian of the objective at theta.
struct ScoreAndInfo {
  std::vector<double> score;
  std::vector<double> info;  // row-major d x d
  std::size_t dim = 0;

  double info_at(std::size_t i, std::size_t j) const { return info[i * dim + j]; }
};

/// First differences step h_j = max(1e-5, 1e-5 |theta_j|), second differences
/// ten times that. A non-finite probe shrinks all
/// steps tenfold once; a second failure throws NumericalError.
ScoreAndInfo score_and_info(const Objective& nll, std::span<const double> theta_hat);

/// One-sided forward-difference gradient with the same step rule; used as a
/// lower-order reference.
std::vector<double> forward_gradient(const Objective& f, std::span<const double> theta, double step_scale = 1e-5);

}  // namespace rlos
