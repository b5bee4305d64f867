#pragma once

#include <cstddef>
#include <span>

#include "rlos/sample.hpp"

namespace rlos {

/// Shape magnitudes below this use the exact Gumbel branch.
inline constexpr double kGumbelShapeThreshold = 1e-9;

/// GEV parameters in the Hosking sign convention: w(x) = 1 - k (x - mu) / sigma.
struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double k = 0.0;

  bool gumbel() const noexcept;
  /// Throws std::invalid_argument unless all fields are finite and sigma > 0.
  void validate() const;
};

/// Hosking-Wallis Wakeby quantile parameters.
struct WakebyParams {
  double xi = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.0;
  double delta = 0.0;

  /// Throws std::invalid_argument when the quantile function decreases
  /// anywhere on a dense grid of (0, 1).
  void validate() const;
};

double gev_cdf(double x, const GevParams& params);
double gev_quantile(double p, const GevParams& params);

/// Reduced Gumbel-scale variate y = -log(w)/k (= (x - mu)/sigma for k = 0).
/// +/-inf when x is outside the support.
double gev_reduced(double x, const GevParams& params) noexcept;

/// Log-likelihood contribution of the top r values of one block; -inf when
/// any of them is outside the support.
double rgev_block_loglik(std::span<const double> row, const GevParams& params, std::size_t r) noexcept;

/// Negative log-likelihood of the rGEV model on the top r columns; +inf
/// when the support is violated.
double rgev_negloglik(const RLosSample& sample, const GevParams& params, std::size_t r);

/// Digamma for z > 0: upward recurrence to z >= 6, then the asymptotic series.
double digamma(double z);

double wakeby_quantile(double p, const WakebyParams& params);

/// Standard normal upper tail Pr[Z > z].
double normal_upper_tail(double z) noexcept;

}  // namespace rlos
