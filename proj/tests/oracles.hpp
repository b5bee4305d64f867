#pragma once

// Reference computations that share no code with the library.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace rlos::oracle {

/// Upper tail of the limiting Cramer-von Mises distribution by Smirnov's
/// integral representation, evaluated with a midpoint rule after a cosine
/// substitution that removes the endpoint singularities.
inline double cvm_upper_tail(double x) {
  const double pi = std::acos(-1.0);
  double total = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double a = (2 * k - 1) * pi;
    const double b = 2 * k * pi;
    constexpr int steps = 4000;
    // Open midpoint rule: the transformed integrand is finite but 0/0 at the ends.
    double sum = 0.0;
    for (int i = 0; i < steps; ++i) {
      const double phi = pi * (i + 0.5) / steps;
      const double lam = a + (b - a) * (1.0 - std::cos(phi)) / 2.0;
      const double jac = (b - a) * std::sin(phi) / 2.0;
      sum += std::sqrt(-lam / std::sin(lam)) * std::exp(-x * lam * lam / 2.0) / lam * jac;
    }
    const double term = sum * (pi / steps) * 2.0 / pi;
    total += (k % 2 ? 1.0 : -1.0) * term;
    if (std::abs(term) < 1e-15) break;
  }
  return total;
}

/// Exact two-sided Mann-Kendall p-value by enumerating all orderings of a
/// tie-free series.
inline double mann_kendall_exact(const std::vector<double>& series) {
  auto s_of = [](const std::vector<double>& x) {
    int s = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = i + 1; j < x.size(); ++j) s += (x[j] > x[i]) - (x[j] < x[i]);
    return s;
  };
  const int observed = std::abs(s_of(series));
  std::vector<double> perm(series.size());
  std::iota(perm.begin(), perm.end(), 0.0);
  long total = 0;
  long extreme = 0;
  do {
    ++total;
    if (std::abs(s_of(perm)) >= observed) ++extreme;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

/// Per-block GEV log density written directly from the textbook form.
inline double gev_log_density(double x, double mu, double sigma, double k) {
  if (k == 0.0) {
    const double z = (x - mu) / sigma;
    return -std::log(sigma) - z - std::exp(-z);
  }
  const double w = 1.0 - k * (x - mu) / sigma;
  return -std::log(sigma) + (1.0 / k - 1.0) * std::log(w) - std::pow(w, 1.0 / k);
}

inline double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

inline double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1));
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace rlos::oracle
