#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rlos {

struct CvmResult {
  double statistic = 0.0;  // T = n * omega^2
  double pvalue = 1.0;
  std::size_t n = 0;
};

/// T = 1/(12n) + sum_i [(2i-1)/(2n) - G(y_(i))]^2 over ascending y.
/// The returned pvalue field is left at 1; use cvm_test for both.
CvmResult cvm_statistic(std::span<const double> values, const std::function<double(double)>& cdf);

/// Upper tail of the limiting Cramer-von Mises distribution.
double cvm_pvalue(double statistic, std::size_t n);

CvmResult cvm_test(std::span<const double> values, const std::function<double(double)>& cdf);

struct MannKendallResult {
  double s = 0.0;
  double variance = 0.0;
  double z = 0.0;
  double pvalue = 1.0;
};

/// Two-sided test with tie-corrected variance and continuity correction.
MannKendallResult mann_kendall(std::span<const double> series);

/// sup_x |F_n(x) - F(x)| for a sample against a continuous CDF.
double kolmogorov_distance(std::vector<double> values, const std::function<double(double)>& cdf);

}  // namespace rlos
