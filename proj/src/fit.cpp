#include "rlos/fit.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rlos/errors.hpp"

namespace rlos {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMinBlocks = 5;

// Data are fitted as z = (x - center) / scale and time as (t - t_center) / t_span.
struct Standardization {
  double center = 0.0;
  double scale = 1.0;
  double t_center = 0.0;
  double t_span = 1.0;
};

Standardization standardize(const RLosSample& sample) {
  const std::vector<double> col = sample.column(1);
  const double n = static_cast<double>(col.size());
  const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : col) ss += (x - mean) * (x - mean);
  const double sd = col.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  if (!(sd > 0.0)) throw DegenerateDataError("column 1 has zero variance");
  Standardization st{mean, sd, 0.0, 1.0};
  if (sample.has_time()) {
    const auto& t = sample.time();
    st.t_center = std::accumulate(t.begin(), t.end(), 0.0) / n;
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    st.t_span = *hi > *lo ? *hi - *lo : 1.0;
  }
  return st;
}

class RgevObjective {
 public:
  RgevObjective(const RLosSample& sample, std::size_t r, const Standardization& st, bool nonstationary,
                bool penalize, ShapePenalty penalty)
      : blocks_(sample.blocks()), r_(r), nonstationary_(nonstationary), penalize_(penalize), penalty_(penalty) {
    z_.reserve(blocks_ * r_);
    for (std::size_t i = 0; i < blocks_; ++i)
      for (std::size_t s = 1; s <= r_; ++s) z_.push_back((sample.at(i, s) - st.center) / st.scale);
    if (nonstationary_) {
      tau_.resize(blocks_);
      for (std::size_t i = 0; i < blocks_; ++i) tau_[i] = (sample.time_at(i) - st.t_center) / st.t_span;
    }
  }

  GevParams block_params(std::span<const double> theta, std::size_t i) const noexcept {
    if (!nonstationary_) return {theta[0], std::exp(theta[1]), theta[2]};
    return {theta[0] + theta[1] * tau_[i], std::exp(theta[2] + theta[3] * tau_[i]), theta[4]};
  }

  double unpenalized(std::span<const double> theta) const noexcept {
    for (double v : theta)
      if (!std::isfinite(v)) return kInf;
    double total = 0.0;
    for (std::size_t i = 0; i < blocks_; ++i) {
      const GevParams p = block_params(theta, i);
      if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) return kInf;
      const double l = rgev_block_loglik({z_.data() + i * r_, r_}, p, r_);
      if (!std::isfinite(l)) return kInf;
      total -= l;
    }
    return total;
  }

  bool penalized() const noexcept { return penalize_; }
  const ShapePenalty& penalty() const noexcept { return penalty_; }

  double operator()(std::span<const double> theta) const noexcept {
    const double base = unpenalized(theta);
    if (!penalize_ || !std::isfinite(base)) return base;
    return base + penalty_.neg_log(theta.back());
  }

  std::size_t blocks() const noexcept { return blocks_; }

 private:
  std::size_t blocks_;
  std::size_t r_;
  bool nonstationary_;
  bool penalize_;
  ShapePenalty penalty_;
  std::vector<double> z_;
  std::vector<double> tau_;
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// The shape penalty has a kink at k = 0, where penalized optima often sit.
bool at_kink(const RgevObjective& objective, std::span<const double> theta) {
  return objective.penalized() && objective.penalty().left_slope_at_zero() != 0.0 && std::abs(theta.back()) <= 1e-6;
}

// Score of the unpenalized likelihood, with the shape component replaced by
// its distance from the penalty's subdifferential at 0: optimal when
// 0 <= d(nll)/dk <= -left_slope.
ScoreAndInfo kink_score(const RgevObjective& objective, std::span<const double> theta) {
  const Objective f = [&objective](std::span<const double> th) { return objective.unpenalized(th); };
  ScoreAndInfo si = score_and_info(f, theta);
  const double dk = -si.score.back();
  const double upper = -objective.penalty().left_slope_at_zero();
  si.score.back() = dk < 0.0 ? -dk : (dk > upper ? upper - dk : 0.0);
  return si;
}

struct Minimum {
  FitResult fit;
  std::vector<double> theta;
};

// Minimizes from `start`, restarting from the best vertex at least once and
// until the gradient condition holds or restarts run out.
Minimum minimize(const RgevObjective& objective, std::vector<double> start, const std::vector<double>& steps,
                 const FitOptions& options) {
  FitResult out;
  const Objective f = [&objective](std::span<const double> th) { return objective(th); };
  NelderMeadResult current = nelder_mead(f, std::move(start), steps, options.simplex);
  out.iterations = current.iterations;
  out.evaluations = current.evaluations;
  const double n = static_cast<double>(objective.blocks());
  for (int restart = 1; restart <= std::max(1, options.max_restarts); ++restart) {
    NelderMeadResult next = nelder_mead(f, current.x, steps, options.simplex);
    out.iterations += next.iterations;
    out.evaluations += next.evaluations;
    out.restarts = restart;
    if (next.value <= current.value) current = std::move(next);
    if (!current.converged) continue;
    try {
      const ScoreAndInfo si = at_kink(objective, current.x) ? kink_score(objective, current.x) : score_and_info(f, current.x);
      out.score = si.score;
      out.info = si.info;
      if (max_abs(si.score) / n <= options.gradient_tol) {
        out.converged = true;
        break;
      }
    } catch (const NumericalError&) {
      out.score.clear();
      out.info.clear();
    }
  }
  out.nll = current.value;
  out.unpenalized_nll = objective.unpenalized(current.x);
  return {std::move(out), std::move(current.x)};
}

void check_fit_inputs(const RLosSample& sample, std::size_t r) {
  if (r < 1 || r > sample.orders()) throw std::invalid_argument("fit: r must lie in [1, R]");
  if (sample.blocks() < kMinBlocks) throw std::invalid_argument("fit: need at least 5 blocks");
}

double data_nll_offset(const RLosSample& sample, std::size_t r, const Standardization& st) {
  return static_cast<double>(sample.blocks() * r) * std::log(st.scale);
}

}  // namespace

GevParams NsGevParams::at(double t) const noexcept { return {mu0 + mu1 * t, std::exp(sigma0 + sigma1 * t), k}; }

NsGevParams NsGevParams::from_stationary(const GevParams& p) { return {p.mu, 0.0, std::log(p.sigma), 0.0, p.k}; }

double ShapePenalty::neg_log(double k) const noexcept {
  if (k >= 0.0) return 0.0;
  if (k <= -1.0) return kInf;
  return lambda * std::pow(-k / (1.0 + k), alpha);
}

double ShapePenalty::left_slope_at_zero() const noexcept {
  if (alpha > 1.0) return 0.0;
  if (alpha < 1.0) return -kInf;
  return -lambda;
}

GevParams FitResult::at(double t) const noexcept {
  if (const auto* p = std::get_if<GevParams>(&params)) return *p;
  return std::get<NsGevParams>(params).at(t);
}

GevParams initial_params(const RLosSample& sample, std::size_t r) {
  if (r < 1 || r > sample.orders()) throw std::invalid_argument("initial_params: r must lie in [1, R]");
  if (sample.blocks() < 2) throw std::invalid_argument("initial_params: need at least 2 blocks");
  const std::vector<double> col = sample.column(1);
  const double n = static_cast<double>(col.size());
  const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : col) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw DegenerateDataError("initial_params: column 1 has zero variance");
  constexpr double kPi = 3.14159265358979323846;
  GevParams p;
  p.sigma = sd * std::sqrt(6.0) / kPi;
  p.mu = mean - 0.5772 * p.sigma;
  p.k = 0.01;
  for (double x : col)
    if (1.0 - p.k * (x - p.mu) / p.sigma <= 0.0) p.k = 0.0;
  return p;
}

FitResult fit_rgev(const RLosSample& sample, std::size_t r, bool penalize, std::optional<GevParams> init,
                   const FitOptions& options) {
  check_fit_inputs(sample, r);
  const Standardization st = standardize(sample);
  const RgevObjective objective(sample, r, st, false, penalize, options.penalty);

  auto to_internal = [&](const GevParams& p) {
    return std::vector<double>{(p.mu - st.center) / st.scale, std::log(p.sigma / st.scale), p.k};
  };
  std::vector<double> start;
  if (init) {
    init->validate();
    start = to_internal(*init);
  }
  if (start.empty() || !std::isfinite(objective(start))) {
    start = to_internal(initial_params(sample, r));
    if (!std::isfinite(objective(start))) start[2] = 0.0;
  }

  Minimum m = minimize(objective, std::move(start), {0.1, 0.1, 0.05}, options);
  FitResult& fit = m.fit;
  fit.model = Model::stationary;
  fit.r = r;
  fit.penalized = penalize;
  fit.params = GevParams{st.center + st.scale * m.theta[0], st.scale * std::exp(m.theta[1]), m.theta[2]};
  const double offset = data_nll_offset(sample, r, st);
  fit.nll += offset;
  fit.unpenalized_nll += offset;
  return std::move(fit);
}

FitResult fit_rgev11(const RLosSample& sample, std::size_t r, bool penalize, bool fix_slopes,
                     const FitOptions& options) {
  check_fit_inputs(sample, r);
  if (!sample.has_time()) throw std::invalid_argument("fit_rgev11: sample has no time index");
  FitResult stationary = fit_rgev(sample, r, penalize, std::nullopt, options);
  if (fix_slopes) {
    stationary.model = Model::rgev11;
    stationary.params = NsGevParams::from_stationary(stationary.stationary());
    return stationary;
  }

  const Standardization st = standardize(sample);
  const RgevObjective objective(sample, r, st, true, penalize, options.penalty);
  const GevParams& s0 = stationary.stationary();
  std::vector<double> start{(s0.mu - st.center) / st.scale, 0.0, std::log(s0.sigma / st.scale), 0.0, s0.k};
  if (!std::isfinite(objective(start))) {
    const GevParams p = initial_params(sample, r);
    start = {(p.mu - st.center) / st.scale, 0.0, std::log(p.sigma / st.scale), 0.0, 0.0};
  }

  Minimum m = minimize(objective, std::move(start), {0.1, 0.1, 0.1, 0.1, 0.05}, options);
  FitResult& fit = m.fit;
  fit.model = Model::rgev11;
  fit.r = r;
  fit.penalized = penalize;
  fit.iterations += stationary.iterations;
  fit.evaluations += stationary.evaluations;
  const auto& th = m.theta;
  NsGevParams ns;
  ns.mu1 = st.scale * th[1] / st.t_span;
  ns.mu0 = st.center + st.scale * th[0] - ns.mu1 * st.t_center;
  ns.sigma1 = th[3] / st.t_span;
  ns.sigma0 = std::log(st.scale) + th[2] - ns.sigma1 * st.t_center;
  ns.k = th[4];
  fit.params = ns;
  const double offset = data_nll_offset(sample, r, st);
  fit.nll += offset;
  fit.unpenalized_nll += offset;
  return std::move(fit);
}

FitResult fit_model(const RLosSample& sample, std::size_t r, Model model, bool penalize, const FitOptions& options) {
  if (model == Model::rgev11) return fit_rgev11(sample, r, penalize, false, options);
  return fit_rgev(sample, r, penalize, std::nullopt, options);
}

double rgev11_negloglik(const RLosSample& sample, const NsGevParams& params, std::size_t r) {
  if (r < 1 || r > sample.orders()) throw std::invalid_argument("rgev11_negloglik: r out of range");
  double total = 0.0;
  for (std::size_t i = 0; i < sample.blocks(); ++i) {
    const double l = rgev_block_loglik(sample.row(i), params.at(sample.time_at(i)), r);
    if (!std::isfinite(l)) return kInf;
    total -= l;
  }
  return total;
}

std::vector<double> symmetric_eigenvalues(const std::vector<double>& matrix, std::size_t dim) {
  if (matrix.size() != dim * dim) throw std::invalid_argument("symmetric_eigenvalues: size mismatch");
  Eigen::MatrixXd m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) m(i, j) = matrix[i * dim + j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace rlos
