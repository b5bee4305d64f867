#include "rlos/gof.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "rlos/distributions.hpp"

namespace rlos {

CvmResult cvm_statistic(std::span<const double> values, const std::function<double(double)>& cdf) {
  if (values.empty()) throw std::invalid_argument("cvm_statistic: empty input");
  std::vector<double> g;
  g.reserve(values.size());
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("cvm_statistic: non-finite value");
    g.push_back(cdf(v));
  }
  // G is monotone, so sorting G-values sorts the observations.
  std::sort(g.begin(), g.end());
  const double n = static_cast<double>(g.size());
  double t = 1.0 / (12.0 * n);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n) - g[i];
    t += d * d;
  }
  return {t, 1.0, g.size()};
}

double cvm_pvalue(double statistic, std::size_t n) {
  if (!(statistic >= 0.0) || n == 0) throw std::invalid_argument("cvm_pvalue: need statistic >= 0 and n >= 1");
  if (statistic == 0.0) return 1.0;
  constexpr double kPi = 3.14159265358979323846;
  const double x = statistic;
  double cdf = 0.0;
  double coef = 1.0;  // Gamma(j + 1/2) / (Gamma(1/2) j!)
  for (int j = 0; j < 10000; ++j) {
    const double y = 4.0 * j + 1.0;
    const double q = y * y / (16.0 * x);
    const double term = q > 700.0 ? 0.0 : coef * std::sqrt(y) * std::exp(-q) * std::cyl_bessel_k(0.25, q);
    cdf += term;
    if (term < 1e-12 * kPi * std::sqrt(x) && q > 1.0) break;
    coef *= (j + 0.5) / (j + 1.0);
  }
  cdf /= kPi * std::sqrt(x);
  return std::clamp(1.0 - cdf, 0.0, 1.0);
}

CvmResult cvm_test(std::span<const double> values, const std::function<double(double)>& cdf) {
  CvmResult r = cvm_statistic(values, cdf);
  r.pvalue = cvm_pvalue(r.statistic, r.n);
  return r;
}

MannKendallResult mann_kendall(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 4) throw std::invalid_argument("mann_kendall: need at least 4 observations");
  MannKendallResult out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.s += (series[j] > series[i]) - (series[j] < series[i]);
  std::map<double, std::size_t> ties;
  for (double x : series) ++ties[x];
  const double nd = static_cast<double>(n);
  double var = nd * (nd - 1.0) * (2.0 * nd + 5.0);
  for (const auto& [value, count] : ties) {
    const double t = static_cast<double>(count);
    var -= t * (t - 1.0) * (2.0 * t + 5.0);
  }
  out.variance = var / 18.0;
  if (out.s == 0.0 || out.variance <= 0.0) {
    out.z = 0.0;
    out.pvalue = 1.0;
    return out;
  }
  out.z = (out.s - (out.s > 0.0 ? 1.0 : -1.0)) / std::sqrt(out.variance);
  out.pvalue = std::min(1.0, 2.0 * normal_upper_tail(std::abs(out.z)));
  return out;
}

double kolmogorov_distance(std::vector<double> values, const std::function<double(double)>& cdf) {
  if (values.empty()) throw std::invalid_argument("kolmogorov_distance: empty input");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

}  // namespace rlos
