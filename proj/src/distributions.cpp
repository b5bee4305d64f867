#include "rlos/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rlos {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << what << " must be finite";
    throw std::invalid_argument(msg.str());
  }
}

// (1 - (1-p)^b) / b with the b -> 0 limit -log(1-p).
double wakeby_term(double log1mp, double b) {
  if (std::abs(b) < 1e-12) return -log1mp;
  return -std::expm1(b * log1mp) / b;
}

}  // namespace

bool GevParams::gumbel() const noexcept { return std::abs(k) < kGumbelShapeThreshold; }

void GevParams::validate() const {
  require_finite(mu, "GEV location");
  require_finite(sigma, "GEV scale");
  require_finite(k, "GEV shape");
  if (!(sigma > 0.0)) throw std::invalid_argument("GEV scale must be positive");
}

void WakebyParams::validate() const {
  for (double v : {xi, alpha, beta, gamma, delta}) require_finite(v, "Wakeby parameter");
  // Log-spaced towards both tails plus a uniform interior grid.
  double prev = -kInf;
  auto check = [&](double p) {
    const double q = wakeby_quantile(p, *this);
    if (!std::isfinite(q) || q < prev - 1e-12 * std::max(1.0, std::abs(prev)))
      throw std::invalid_argument("Wakeby parameters give a non-monotone quantile function");
    prev = q;
  };
  for (int e = -12; e < -2; ++e) check(std::pow(10.0, e));
  for (int i = 1; i < 1000; ++i) check(i / 1000.0);
  for (int e = -3; e >= -12; --e) check(1.0 - std::pow(10.0, e));
}

double gev_cdf(double x, const GevParams& params) {
  require_finite(x, "x");
  params.validate();
  const double z = (x - params.mu) / params.sigma;
  if (params.gumbel()) return std::exp(-std::exp(-z));
  const double w = 1.0 - params.k * z;
  if (w <= 0.0) return params.k > 0.0 ? 1.0 : 0.0;
  return std::exp(-std::exp(std::log1p(-params.k * z) / params.k));
}

double gev_quantile(double p, const GevParams& params) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gev_quantile: p must lie in (0, 1)");
  params.validate();
  const double y = std::log(-std::log(p));  // log of the reduced exponential variate
  if (params.gumbel()) return params.mu - params.sigma * y;
  return params.mu - params.sigma * std::expm1(params.k * y) / params.k;
}

double gev_reduced(double x, const GevParams& params) noexcept {
  const double z = (x - params.mu) / params.sigma;
  if (params.gumbel()) return z;
  const double kz = params.k * z;
  if (kz >= 1.0) return params.k > 0.0 ? kInf : -kInf;
  return -std::log1p(-kz) / params.k;
}

double rgev_block_loglik(std::span<const double> row, const GevParams& params, std::size_t r) noexcept {
  const double log_sigma = std::log(params.sigma);
  double sum_y = 0.0;
  double y_r = 0.0;
  for (std::size_t s = 0; s < r; ++s) {
    const double y = gev_reduced(row[s], params);
    if (!std::isfinite(y)) return -kInf;
    sum_y += y;
    y_r = y;
  }
  // With y = -log(w)/k: w^(1/k) = exp(-y) and (1/k - 1) log w = -(1 - k) y.
  const double k = params.gumbel() ? 0.0 : params.k;
  return -static_cast<double>(r) * log_sigma - std::exp(-y_r) - (1.0 - k) * sum_y;
}

double rgev_negloglik(const RLosSample& sample, const GevParams& params, std::size_t r) {
  if (r < 1 || r > sample.orders()) throw std::invalid_argument("rgev_negloglik: r out of range");
  params.validate();
  double total = 0.0;
  for (std::size_t i = 0; i < sample.blocks(); ++i) {
    const double l = rgev_block_loglik(sample.row(i), params, r);
    if (!std::isfinite(l)) return kInf;
    total -= l;
  }
  return total;
}

double digamma(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw std::invalid_argument("digamma: z must be positive and finite");
  double shift = 0.0;
  while (z < 6.0) {
    shift -= 1.0 / z;
    z += 1.0;
  }
  // Bernoulli-number coefficients B_2j / (2j) for j = 1..8.
  static constexpr double kCoef[] = {1.0 / 12,         -1.0 / 120,     1.0 / 252,  -1.0 / 240,
                                     1.0 / 132,        -691.0 / 32760, 1.0 / 12,   -3617.0 / 8160};
  const double inv2 = 1.0 / (z * z);
  double series = 0.0;
  double power = inv2;
  for (double c : kCoef) {
    series += c * power;
    power *= inv2;
  }
  return shift + std::log(z) - 0.5 / z - series;
}

double wakeby_quantile(double p, const WakebyParams& params) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("wakeby_quantile: p must lie in (0, 1)");
  const double log1mp = std::log1p(-p);
  return params.xi + params.alpha * wakeby_term(log1mp, params.beta) +
         params.gamma * wakeby_term(log1mp, -params.delta);
}

double normal_upper_tail(double z) noexcept { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace rlos
