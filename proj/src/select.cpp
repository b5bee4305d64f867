#include "rlos/select.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rlos/errors.hpp"
#include "rlos/gof.hpp"
#include "rlos/parallel.hpp"
#include "rlos/random.hpp"
#include "rlos/simulate.hpp"

namespace rlos {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMinBlocks = 5;

using BlockParams = std::function<GevParams(std::size_t)>;

BlockParams constant(const GevParams& p) {
  p.validate();
  return [p](std::size_t) { return p; };
}

BlockParams time_varying(const RLosSample& sample, const NsGevParams& p) {
  const std::vector<double>& t = sample.time();
  return [&t, p](std::size_t i) { return p.at(t[i]); };
}

BlockParams fitted(const RLosSample& sample, const FitResult& fit) {
  if (fit.model == Model::rgev11) return time_varying(sample, fit.nonstationary());
  return constant(fit.stationary());
}

std::vector<double> spacings_impl(const RLosSample& sample, std::size_t r, const BlockParams& params) {
  if (r < 1 || r + 1 > sample.orders()) throw std::invalid_argument("spacings_values: need 1 <= r <= R - 1");
  std::vector<double> out(sample.blocks());
  for (std::size_t i = 0; i < sample.blocks(); ++i) {
    const GevParams p = params(i);
    const double d = gev_reduced(sample.at(i, r), p) - gev_reduced(sample.at(i, r + 1), p);
    out[i] = std::isfinite(d) ? static_cast<double>(r) * d : kNaN;
  }
  return out;
}

std::vector<double> ccdf_impl(const RLosSample& sample, std::size_t r, const BlockParams& params) {
  if (r < 1 || r > sample.orders()) throw std::invalid_argument("ccdf_values: need 1 <= r <= R");
  std::vector<double> out(sample.blocks());
  for (std::size_t i = 0; i < sample.blocks(); ++i) {
    const GevParams p = params(i);
    // log F(x) = -exp(-y); the ratio is formed in the exponent.
    const double upper = r == 1 ? 0.0 : std::exp(-gev_reduced(sample.at(i, r - 1), p));
    const double u = std::exp(upper - std::exp(-gev_reduced(sample.at(i, r), p)));
    out[i] = std::isnan(u) ? kNaN : std::min(u, 1.0);
  }
  return out;
}

std::vector<double> ed_impl(const RLosSample& sample, std::size_t r, const BlockParams& params) {
  if (r < 2 || r > sample.orders()) throw std::invalid_argument("ed_values: need 2 <= r <= R");
  std::vector<double> out(sample.blocks());
  for (std::size_t i = 0; i < sample.blocks(); ++i) {
    const GevParams p = params(i);
    const double y_prev = gev_reduced(sample.at(i, r - 1), p);
    const double y = gev_reduced(sample.at(i, r), p);
    const double k = p.gumbel() ? 0.0 : p.k;
    const double v = -std::log(p.sigma) - std::exp(-y) + std::exp(-y_prev) - (1.0 - k) * y;
    out[i] = std::isfinite(v) ? v : kNaN;
  }
  return out;
}

bool any_nan(const std::vector<double>& v) {
  return std::any_of(v.begin(), v.end(), [](double x) { return std::isnan(x); });
}

TestResult prepare(Method method, Model model, std::size_t r, const RLosSample& sample) {
  TestResult out;
  out.method = method;
  out.model = model;
  out.r = r;
  if (sample.blocks() < kMinBlocks) {
    out.status = TestStatus::insufficient_data;
    out.statistic = kNaN;
    out.pvalue = kNaN;
    out.notes.push_back("fewer than 5 blocks");
  }
  return out;
}

// Obtains the H0 fit, flagging non-convergence. Returns false when the test
// cannot proceed.
bool attach_fit(TestResult& out, const RLosSample& sample, std::size_t r, Model model, const TestOptions& options,
                const FitResult* fit) {
  out.fit = fit ? *fit : fit_model(sample, r, model, options.penalize, options.fit);
  if (!out.fit->converged) {
    out.status = TestStatus::nonconvergence;
    out.statistic = kNaN;
    out.pvalue = kNaN;
    out.notes.push_back("fit did not converge");
    return false;
  }
  return true;
}

void certain_rejection(TestResult& out, std::string note) {
  out.statistic = kInf;
  out.pvalue = 0.0;
  out.notes.push_back(std::move(note));
}

void finish_cvm(TestResult& out, const std::vector<double>& values, const std::function<double(double)>& cdf) {
  if (any_nan(values)) {
    certain_rejection(out, "support violation under fitted parameters");
    return;
  }
  const CvmResult cvm = cvm_test(values, cdf);
  out.statistic = cvm.statistic;
  out.pvalue = cvm.pvalue;
}

struct Standardized {
  RLosSample sample;
  double center;
  double scale;
};

Standardized standardized(const RLosSample& sample, std::size_t r) {
  const std::vector<double> col = sample.column(1);
  const double n = static_cast<double>(col.size());
  const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : col) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw DegenerateDataError("column 1 has zero variance");
  std::vector<double> z;
  z.reserve(sample.blocks() * r);
  for (std::size_t i = 0; i < sample.blocks(); ++i)
    for (std::size_t s = 1; s <= r; ++s) z.push_back((sample.at(i, s) - mean) / sd);
  return {RLosSample(sample.blocks(), r, std::move(z)), mean, sd};
}

ScoreStatistic score_statistic_impl(const RLosSample& sample, std::size_t r, const TestOptions& options,
                                    const FitResult* lower_fit, std::optional<GevParams> init) {
  ScoreStatistic out;
  const std::size_t lower_r = r == 1 ? 1 : r - 1;
  FitResult own;
  if (!lower_fit) {
    own = fit_rgev(sample, lower_r, options.penalize, init, options.fit);
    lower_fit = &own;
  }
  if (!lower_fit->converged) {
    out.converged = false;
    out.value = kNaN;
    return out;
  }
  const Standardized st = standardized(sample, r);
  const GevParams& p = lower_fit->stationary();
  const std::vector<double> theta{(p.mu - st.center) / st.scale, p.sigma / st.scale, p.k};
  const Objective nll = [&st, r](std::span<const double> th) {
    if (!(th[1] > 0.0)) return kInf;
    return rgev_negloglik(st.sample, GevParams{th[0], th[1], th[2]}, r);
  };
  const ScoreAndInfo si = score_and_info(nll, theta);

  const Eigen::Index d = static_cast<Eigen::Index>(si.dim);
  Eigen::MatrixXd info(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) info(i, j) = si.info_at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::VectorXd score = Eigen::Map<const Eigen::VectorXd>(si.score.data(), d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
  Eigen::VectorXd lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= 0.0) {
    // Ridge once; eigenvalues still non-positive afterwards are floored at the ridge.
    const double ridge = std::max(1e-8 * std::abs(info.trace()) / static_cast<double>(d), 1e-300);
    out.ridged = true;
    for (Eigen::Index i = 0; i < d; ++i) lambda(i) = std::max(lambda(i) + ridge, ridge);
  }
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * score;
  double v = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) v += proj(i) * proj(i) / lambda(i);
  out.value = v / static_cast<double>(sample.blocks());
  return out;
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::spacings: return "spacings";
    case Method::score: return "score";
    case Method::ed: return "ed";
    case Method::ccdf: return "ccdf";
  }
  return "?";
}

std::string_view to_string(PValueLayer l) noexcept {
  switch (l) {
    case PValueLayer::raw: return "raw";
    case PValueLayer::forwardstop: return "forwardstop";
    case PValueLayer::strongstop: return "strongstop";
  }
  return "?";
}

std::string_view to_string(TestStatus s) noexcept {
  switch (s) {
    case TestStatus::ok: return "ok";
    case TestStatus::nonconvergence: return "nonconvergence";
    case TestStatus::insufficient_data: return "insufficient_data";
  }
  return "?";
}

std::string_view to_string(Model m) noexcept { return m == Model::rgev11 ? "rgev11" : "stationary"; }

Method parse_method(std::string_view name) {
  for (Method m : {Method::spacings, Method::score, Method::ed, Method::ccdf})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

PValueLayer parse_layer(std::string_view name) {
  for (PValueLayer l : {PValueLayer::raw, PValueLayer::forwardstop, PValueLayer::strongstop})
    if (to_string(l) == name) return l;
  throw std::invalid_argument("unknown p-value layer '" + std::string(name) + "'");
}

TestStatus parse_status(std::string_view name) {
  for (TestStatus s : {TestStatus::ok, TestStatus::nonconvergence, TestStatus::insufficient_data})
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown test status '" + std::string(name) + "'");
}

std::vector<double> spacings_values(const RLosSample& sample, std::size_t r, const GevParams& params) {
  return spacings_impl(sample, r, constant(params));
}
std::vector<double> spacings_values(const RLosSample& sample, std::size_t r, const NsGevParams& params) {
  return spacings_impl(sample, r, time_varying(sample, params));
}
std::vector<double> ccdf_values(const RLosSample& sample, std::size_t r, const GevParams& params) {
  return ccdf_impl(sample, r, constant(params));
}
std::vector<double> ccdf_values(const RLosSample& sample, std::size_t r, const NsGevParams& params) {
  return ccdf_impl(sample, r, time_varying(sample, params));
}
std::vector<double> ed_values(const RLosSample& sample, std::size_t r, const GevParams& params) {
  return ed_impl(sample, r, constant(params));
}

double ed_mean(std::size_t r, double sigma, double k) {
  return -std::log(sigma) - 1.0 + (1.0 - k) * digamma(static_cast<double>(r));
}

RLosSample gumbel_transform(const RLosSample& sample, const NsGevParams& params) {
  std::vector<double> y(sample.blocks() * sample.orders());
  for (std::size_t i = 0; i < sample.blocks(); ++i) {
    const GevParams p = params.at(sample.time_at(i));
    for (std::size_t s = 1; s <= sample.orders(); ++s) {
      const double v = gev_reduced(sample.at(i, s), p);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "gumbel_transform: block " << i + 1 << ", order " << s << " lies outside the support";
        throw std::invalid_argument(msg.str());
      }
      y[i * sample.orders() + (s - 1)] = v;
    }
  }
  return RLosSample(sample.blocks(), sample.orders(), std::move(y), sample.time(), sample.units());
}

TestResult spacings_test(const RLosSample& sample, std::size_t r, Model model, const TestOptions& options,
                         const FitResult* fit) {
  if (r < 2 || r > sample.orders()) throw std::invalid_argument("spacings_test: need 2 <= r <= R");
  TestResult out = prepare(Method::spacings, model, r, sample);
  if (out.status != TestStatus::ok || !attach_fit(out, sample, r, model, options, fit)) return out;
  const std::vector<double> values = spacings_impl(sample, r - 1, fitted(sample, *out.fit));
  finish_cvm(out, values, [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); });
  return out;
}

TestResult ccdf_test(const RLosSample& sample, std::size_t r, Model model, const TestOptions& options,
                     const FitResult* fit) {
  if (r < 1 || r > sample.orders()) throw std::invalid_argument("ccdf_test: need 1 <= r <= R");
  TestResult out = prepare(Method::ccdf, model, r, sample);
  if (out.status != TestStatus::ok || !attach_fit(out, sample, r, model, options, fit)) return out;
  const std::vector<double> values = ccdf_impl(sample, r, fitted(sample, *out.fit));
  finish_cvm(out, values, [](double u) { return std::clamp(u, 0.0, 1.0); });
  return out;
}

std::pair<double, double> ed_statistic(std::span<const double> y, double eta) {
  const double n = static_cast<double>(y.size());
  if (y.size() < 2) throw std::invalid_argument("ed_statistic: need at least 2 blocks");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw DegenerateDataError("ed_statistic: per-block differences have zero variance");
  const double t = std::sqrt(n) * (mean - eta) / sd;
  return {t, std::min(1.0, 2.0 * normal_upper_tail(std::abs(t)))};
}

TestResult ed_test(const RLosSample& sample, std::size_t r, Model model, const TestOptions& options,
                   const FitResult* fit) {
  if (r < 2 || r > sample.orders()) throw std::invalid_argument("ed_test: need 2 <= r <= R");
  TestResult out = prepare(Method::ed, model, r, sample);
  if (out.status != TestStatus::ok || !attach_fit(out, sample, r, model, options, fit)) return out;
  if (sample.blocks() < 50) out.notes.push_back("fewer than 50 blocks; normal approximation may be poor");
  std::vector<double> y;
  double eta = 0.0;
  if (model == Model::rgev11) {
    RLosSample transformed;
    try {
      transformed = gumbel_transform(sample.truncated(r), out.fit->nonstationary());
    } catch (const std::invalid_argument& e) {
      certain_rejection(out, e.what());
      return out;
    }
    y = ed_values(transformed, r, GevParams{0.0, 1.0, 0.0});
    eta = ed_mean(r, 1.0, 0.0);
  } else {
    const GevParams& p = out.fit->stationary();
    y = ed_values(sample, r, p);
    eta = ed_mean(r, p.sigma, p.gumbel() ? 0.0 : p.k);
  }
  if (any_nan(y)) {
    certain_rejection(out, "support violation under fitted parameters");
    return out;
  }
  std::tie(out.statistic, out.pvalue) = ed_statistic(y, eta);
  return out;
}

ScoreStatistic score_statistic(const RLosSample& sample, std::size_t r, const TestOptions& options,
                               const FitResult* lower_fit) {
  if (r < 1 || r > sample.orders()) throw std::invalid_argument("score_statistic: need 1 <= r <= R");
  return score_statistic_impl(sample, r, options, lower_fit, std::nullopt);
}

double bootstrap_pvalue(double observed, std::span<const double> replicates) {
  const auto exceed = std::count_if(replicates.begin(), replicates.end(), [&](double v) { return v >= observed; });
  return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(replicates.size()) + 1.0);
}

TestResult score_test_pb(const RLosSample& sample, std::size_t r, const TestOptions& options, const FitResult* fit,
                         const FitResult* lower_fit) {
  if (r < 1 || r > sample.orders()) throw std::invalid_argument("score_test_pb: need 1 <= r <= R");
  if (options.bootstrap < 99) throw std::invalid_argument("score_test_pb: need at least 99 bootstrap samples");
  TestResult out = prepare(Method::score, Model::stationary, r, sample);
  if (out.status != TestStatus::ok || !attach_fit(out, sample, r, Model::stationary, options, fit)) return out;

  const ScoreStatistic observed = score_statistic_impl(sample, r, options, lower_fit, std::nullopt);
  if (!observed.converged) {
    out.status = TestStatus::nonconvergence;
    out.statistic = kNaN;
    out.pvalue = kNaN;
    out.notes.push_back("lower-order fit did not converge");
    return out;
  }
  if (observed.ridged) out.notes.push_back("information matrix ridged");

  const GevParams null_params = out.fit->stationary();
  const std::size_t n = sample.blocks();
  std::vector<double> boot(options.bootstrap, kNaN);
  parallel_for(options.bootstrap, options.workers, [&](std::size_t b) {
    try {
      const RLosSample draw = sample_rgev(n, r, null_params, derive_key(options.seed, {r, b}));
      const ScoreStatistic v = score_statistic_impl(draw, r, options, nullptr, null_params);
      if (v.converged && std::isfinite(v.value)) boot[b] = v.value;
    } catch (const std::exception&) {
      // Counted as a failed replicate below.
    }
  });
  std::vector<double> valid;
  valid.reserve(boot.size());
  for (double v : boot)
    if (!std::isnan(v)) valid.push_back(v);
  const std::size_t failures = boot.size() - valid.size();
  if (failures * 10 > boot.size())
    throw NumericalError("score_test_pb: more than 10% of bootstrap refits failed");
  if (failures > 0) out.notes.push_back(std::to_string(failures) + " bootstrap refits dropped");
  out.statistic = observed.value;
  out.pvalue = bootstrap_pvalue(observed.value, valid);
  return out;
}

std::vector<double> adjust_pvalues_unclamped(std::span<const double> pvalues, PValueLayer method) {
  for (double p : pvalues)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("adjust_pvalues: p-values must lie in [0, 1]");
  const std::size_t m = pvalues.size();
  std::vector<double> out(pvalues.begin(), pvalues.end());
  if (method == PValueLayer::forwardstop) {
    double cumulative = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      cumulative += -std::log1p(-pvalues[k]);
      out[k] = cumulative / static_cast<double>(k + 1);
    }
  } else if (method == PValueLayer::strongstop) {
    double tail = 0.0;
    for (std::size_t k = m; k-- > 0;) {
      tail += std::log(pvalues[k]) / static_cast<double>(k + 1);
      out[k] = std::exp(tail) * static_cast<double>(m) / static_cast<double>(k + 1);
    }
  }
  return out;
}

std::vector<double> adjust_pvalues(std::span<const double> pvalues, PValueLayer method) {
  std::vector<double> out = adjust_pvalues_unclamped(pvalues, method);
  for (double& v : out) v = std::isnan(v) ? 1.0 : std::clamp(v, 0.0, 1.0);
  return out;
}

std::size_t first_stopping_r(Method method) noexcept { return method == Method::score ? 1 : 2; }

SelectionReport select_r(std::vector<TestResult> results, double alpha, PValueLayer layer) {
  if (results.empty()) throw std::invalid_argument("select_r: no test results");
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].r != results[i - 1].r + 1 || results[i].method != results[0].method)
      throw std::invalid_argument("select_r: results must be one method, ordered by r without gaps");

  SelectionReport report;
  report.method = results.front().method;
  report.alpha = alpha;
  report.layer = layer;
  report.rule = "first-rejection-minus-one:" + std::string(to_string(layer));

  std::size_t usable = 0;
  while (usable < results.size() && results[usable].status == TestStatus::ok) ++usable;
  report.truncated = usable < results.size();
  for (std::size_t i = 0; i < usable; ++i) report.raw.push_back(results[i].pvalue);
  report.forwardstop = adjust_pvalues(report.raw, PValueLayer::forwardstop);
  report.strongstop = adjust_pvalues(report.raw, PValueLayer::strongstop);
  const std::vector<double>& layer_values =
      layer == PValueLayer::raw ? report.raw
                                : (layer == PValueLayer::forwardstop ? report.forwardstop : report.strongstop);

  const auto floor_one = [](std::size_t r) { return r > 1 ? r - 1 : std::size_t{1}; };
  report.chosen_r = report.truncated ? floor_one(results[usable].r) : results.back().r;
  for (std::size_t i = 0; i < usable; ++i) {
    if (layer_values[i] < alpha) {
      report.chosen_r = floor_one(results[i].r);
      break;
    }
  }
  report.results = std::move(results);
  return report;
}

SequenceRunner::SequenceRunner(const RLosSample& sample, Model model, TestOptions options)
    : sample_(sample), model_(model), options_(std::move(options)), fits_(sample.orders() + 1) {
  if (model_ == Model::rgev11 && !sample_.has_time())
    throw std::invalid_argument("rgev11 model requires a time index");
}

const FitResult& SequenceRunner::fit(std::size_t r) {
  if (r < 1 || r > sample_.orders()) throw std::invalid_argument("SequenceRunner::fit: r out of range");
  if (!fits_[r]) fits_[r] = fit_model(sample_, r, model_, options_.penalize, options_.fit);
  return *fits_[r];
}

TestResult SequenceRunner::run(Method method, std::size_t r) {
  const bool enough = sample_.blocks() >= kMinBlocks;
  const FitResult* f = enough ? &fit(r) : nullptr;
  switch (method) {
    case Method::spacings: return spacings_test(sample_, r, model_, options_, f);
    case Method::ccdf: return ccdf_test(sample_, r, model_, options_, f);
    case Method::ed: return ed_test(sample_, r, model_, options_, f);
    case Method::score: {
      if (model_ != Model::stationary) throw std::invalid_argument("score test is defined for the stationary model only");
      const FitResult* lower = enough && r > 1 ? &fit(r - 1) : f;
      return score_test_pb(sample_, r, options_, f, lower);
    }
  }
  throw std::logic_error("unreachable");
}

std::vector<TestResult> SequenceRunner::run_sequence(Method method, std::size_t rmax) {
  if (rmax < 1 || rmax > sample_.orders()) throw std::invalid_argument("run_sequence: rmax out of range");
  const std::size_t start = method == Method::ccdf || method == Method::score ? 1 : 2;
  std::vector<TestResult> out;
  for (std::size_t r = start; r <= rmax; ++r) out.push_back(run(method, r));
  return out;
}

SelectionReport SequenceRunner::select(Method method, std::size_t rmax, double alpha, PValueLayer layer) {
  std::vector<TestResult> seq = run_sequence(method, rmax);
  const std::size_t first = first_stopping_r(method);
  std::erase_if(seq, [first](const TestResult& t) { return t.r < first; });
  if (seq.empty()) throw std::invalid_argument("select: rmax leaves no testable order");
  return select_r(std::move(seq), alpha, layer);
}

}  // namespace rlos
