#include "rlos/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rlos/errors.hpp"

namespace rlos {

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start, std::span<const double> steps,
                             const NelderMeadOptions& options) {
  const std::size_t d = start.size();
  if (d == 0 || steps.size() != d) throw std::invalid_argument("nelder_mead: dimension mismatch");
  const double dd = static_cast<double>(d);
  const double reflect = 1.0;
  const double expand = 1.0 + 2.0 / dd;
  const double contract = 0.75 - 1.0 / (2.0 * dd);
  const double shrink = 1.0 - 1.0 / dd;

  NelderMeadResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isnan(v) ? HUGE_VAL : v;
  };

  std::vector<std::vector<double>> simplex(d + 1, start);
  std::vector<double> values(d + 1);
  values[0] = eval(start);
  if (!std::isfinite(values[0])) throw std::invalid_argument("nelder_mead: objective is not finite at the start point");
  for (std::size_t j = 0; j < d; ++j) {
    simplex[j + 1][j] += steps[j];
    values[j + 1] = eval(simplex[j + 1]);
    if (!std::isfinite(values[j + 1])) {
      simplex[j + 1][j] = start[j] - steps[j];
      values[j + 1] = eval(simplex[j + 1]);
    }
  }

  std::vector<std::size_t> order(d + 1);
  std::vector<double> centroid(d), trial(d), trial2(d);
  auto point = [&](double t, std::vector<double>& out, std::size_t worst) {
    for (std::size_t j = 0; j < d; ++j) out[j] = centroid[j] + t * (centroid[j] - simplex[worst][j]);
  };

  for (;;) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[d - 1];

    double scale = 1.0;
    for (double v : simplex[best]) scale = std::max(scale, std::abs(v));
    double diameter = 0.0;
    for (const auto& vertex : simplex)
      for (std::size_t j = 0; j < d; ++j) diameter = std::max(diameter, std::abs(vertex[j] - simplex[best][j]));
    if (diameter <= options.rel_tol * scale) {
      result.converged = true;
      break;
    }
    if (result.evaluations >= options.max_evaluations) break;
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v = 0; v <= d; ++v) {
      if (v == worst) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += simplex[v][j] / dd;
    }

    point(reflect, trial, worst);
    const double f_reflect = eval(trial);
    if (f_reflect < values[best]) {
      point(reflect * expand, trial2, worst);
      const double f_expand = eval(trial2);
      if (f_expand < f_reflect) {
        simplex[worst] = trial2;
        values[worst] = f_expand;
      } else {
        simplex[worst] = trial;
        values[worst] = f_reflect;
      }
      continue;
    }
    if (f_reflect < values[second_worst]) {
      simplex[worst] = trial;
      values[worst] = f_reflect;
      continue;
    }
    const bool outside = f_reflect < values[worst];
    point(outside ? reflect * contract : -contract, trial2, worst);
    const double f_contract = eval(trial2);
    if (f_contract < (outside ? f_reflect : values[worst])) {
      simplex[worst] = trial2;
      values[worst] = f_contract;
      continue;
    }
    for (std::size_t v = 0; v <= d; ++v) {
      if (v == best) continue;
      for (std::size_t j = 0; j < d; ++j)
        simplex[v][j] = simplex[best][j] + shrink * (simplex[v][j] - simplex[best][j]);
      values[v] = eval(simplex[v]);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
  result.value = *best_it;
  return result;
}

namespace {

std::vector<double> step_sizes(std::span<const double> theta, double scale) {
  std::vector<double> h(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) h[j] = std::max(scale, scale * std::abs(theta[j]));
  return h;
}

// Returns false when any probe is non-finite.
// `hg` steps the first differences, `h` the second differences; the latter are
// larger because their rounding error scales as 1 / h^2.
bool central_differences(const Objective& f, std::span<const double> theta, const std::vector<double>& hg,
                         const std::vector<double>& h, ScoreAndInfo& out) {
  const std::size_t d = theta.size();
  std::vector<double> x(theta.begin(), theta.end());
  const double f0 = f(x);
  if (!std::isfinite(f0)) return false;
  auto probe = [&](std::size_t i, double di, std::size_t j, double dj) {
    x[i] += di;
    x[j] += dj;
    const double v = f(x);
    x[i] -= di;
    x[j] -= dj;
    return v;
  };
  out.dim = d;
  out.score.assign(d, 0.0);
  out.info.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double gp = probe(i, hg[i], i, 0.0);
    const double gm = probe(i, -hg[i], i, 0.0);
    const double fp = probe(i, h[i], i, 0.0);
    const double fm = probe(i, -h[i], i, 0.0);
    if (!std::isfinite(gp) || !std::isfinite(gm) || !std::isfinite(fp) || !std::isfinite(fm)) return false;
    out.score[i] = -(gp - gm) / (2.0 * hg[i]);
    out.info[i * d + i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const double fpp = probe(i, h[i], j, h[j]);
      const double fpm = probe(i, h[i], j, -h[j]);
      const double fmp = probe(i, -h[i], j, h[j]);
      const double fmm = probe(i, -h[i], j, -h[j]);
      if (!std::isfinite(fpp) || !std::isfinite(fpm) || !std::isfinite(fmp) || !std::isfinite(fmm)) return false;
      const double hij = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
      out.info[i * d + j] = hij;
      out.info[j * d + i] = hij;
    }
  }
  return true;
}

}  // namespace

ScoreAndInfo score_and_info(const Objective& nll, std::span<const double> theta_hat) {
  for (double v : theta_hat)
    if (!std::isfinite(v)) throw std::invalid_argument("score_and_info: theta_hat must be finite");
  ScoreAndInfo out;
  std::vector<double> hg = step_sizes(theta_hat, 1e-5);
  std::vector<double> h = step_sizes(theta_hat, 1e-4);
  if (central_differences(nll, theta_hat, hg, h, out)) return out;
  for (double& v : hg) v *= 0.1;
  for (double& v : h) v *= 0.1;
  if (central_differences(nll, theta_hat, hg, h, out)) return out;
  throw NumericalError("score_and_info: objective is not finite in a neighborhood of theta_hat");
}

std::vector<double> forward_gradient(const Objective& f, std::span<const double> theta, double step_scale) {
  std::vector<double> x(theta.begin(), theta.end());
  const std::vector<double> h = step_sizes(theta, step_scale);
  const double f0 = f(x);
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] += h[j];
    g[j] = (f(x) - f0) / h[j];
    x[j] -= h[j];
  }
  return g;
}

}  // namespace rlos
