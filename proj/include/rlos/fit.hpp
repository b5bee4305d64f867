#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rlos/distributions.hpp"
#include "rlos/optimize.hpp"
#include "rlos/sample.hpp"

namespace rlos {

/// Linear-in-time location and log-linear-in-time scale, constant shape:
/// mu(t) = mu0 + mu1 t, sigma(t) = exp(sigma0 + sigma1 t).
struct NsGevParams {
  double mu0 = 0.0;
  double mu1 = 0.0;
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  double k = 0.0;

  GevParams at(double t) const noexcept;
  static NsGevParams from_stationary(const GevParams& p);
};

enum class Model { stationary, rgev11 };

/// Shape penalty in the Hosking convention:
/// -log p(k) = 0 for k >= 0, lambda * (-k / (1 + k))^alpha for -1 < k < 0,
/// +inf for k <= -1.
struct ShapePenalty {
  double alpha = 1.0;
  double lambda = 1.0;

  double neg_log(double k) const noexcept;
  /// Derivative of neg_log as k -> 0 from below (the right derivative is 0).
  double left_slope_at_zero() const noexcept;
};

struct FitOptions {
  ShapePenalty penalty{};
  NelderMeadOptions simplex{};
  int max_restarts = 3;
  /// Max-norm of the per-block objective gradient in standardized coordinates.
  double gradient_tol = 1e-4;
};

struct FitResult {
  Model model = Model::stationary;
  std::variant<GevParams, NsGevParams> params;
  std::size_t r = 0;
  /// Minimized objective in data units (penalized when `penalized`).
  double nll = 0.0;
  double unpenalized_nll = 0.0;
  bool penalized = false;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  int restarts = 0;
  /// Score (negative objective gradient) and observed information in the
  /// standardized optimizer coordinates: (mu, log sigma, k) for stationary,
  /// (mu0, mu1, log sigma0, sigma1, k) for rgev11, with data centered and
  /// scaled by column 1 and time mapped to (t - mean) / span.
  std::vector<double> score;
  std::vector<double> info;

  GevParams at(double t) const noexcept;
  const GevParams& stationary() const { return std::get<GevParams>(params); }
  const NsGevParams& nonstationary() const { return std::get<NsGevParams>(params); }
};

/// Gumbel moment estimates from column 1 (k = 0.01, or 0 if that would put
/// a column-1 value outside the support). Throws DegenerateDataError on zero variance.
GevParams initial_params(const RLosSample& sample, std::size_t r);

FitResult fit_rgev(const RLosSample& sample, std::size_t r, bool penalize,
                   std::optional<GevParams> init = std::nullopt, const FitOptions& options = {});

/// Requires a time index. With fix_slopes the slopes stay at zero and the
/// fit coincides with fit_rgev.
FitResult fit_rgev11(const RLosSample& sample, std::size_t r, bool penalize, bool fix_slopes = false,
                     const FitOptions& options = {});

FitResult fit_model(const RLosSample& sample, std::size_t r, Model model, bool penalize,
                    const FitOptions& options = {});

/// Negative log-likelihood with per-block parameters taken at the sample's
/// time index; +inf outside the support.
double rgev11_negloglik(const RLosSample& sample, const NsGevParams& params, std::size_t r);

/// Largest negative eigenvalue magnitude check helper: eigenvalues of a
/// symmetric row-major matrix, ascending.
std::vector<double> symmetric_eigenvalues(const std::vector<double>& matrix, std::size_t dim);

}  // namespace rlos
