#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlos/fit.hpp"
#include "rlos/sample.hpp"

namespace rlos {

enum class Method { spacings, score, ed, ccdf };
enum class PValueLayer { raw, forwardstop, strongstop };
enum class TestStatus { ok, nonconvergence, insufficient_data };

std::string_view to_string(Method m) noexcept;
std::string_view to_string(PValueLayer l) noexcept;
std::string_view to_string(TestStatus s) noexcept;
std::string_view to_string(Model m) noexcept;
Method parse_method(std::string_view name);
PValueLayer parse_layer(std::string_view name);
TestStatus parse_status(std::string_view name);

struct TestResult {
  Method method = Method::ccdf;
  Model model = Model::stationary;
  std::size_t r = 0;
  double statistic = 0.0;
  double pvalue = 1.0;
  TestStatus status = TestStatus::ok;
  std::optional<FitResult> fit;
  std::vector<std::string> notes;
};

struct TestOptions {
  bool penalize = true;
  FitOptions fit{};
  // Score test only.
  std::size_t bootstrap = 199;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

// Per-block statistics. Support violations yield NaN entries.

/// r * D_r per block from orders r and r + 1.
std::vector<double> spacings_values(const RLosSample& sample, std::size_t r, const GevParams& params);
std::vector<double> spacings_values(const RLosSample& sample, std::size_t r, const NsGevParams& params);

/// U_r = F(x(r)) / F(x(r-1)), F(x(0)) = 1.
std::vector<double> ccdf_values(const RLosSample& sample, std::size_t r, const GevParams& params);
std::vector<double> ccdf_values(const RLosSample& sample, std::size_t r, const NsGevParams& params);

/// Y_ir = l_i(r) - l_i(r-1).
std::vector<double> ed_values(const RLosSample& sample, std::size_t r, const GevParams& params);

/// Expected Y_1r: -log sigma - 1 + (1 - k) digamma(r).
double ed_mean(std::size_t r, double sigma, double k);

/// Y = -log(1 - k (X - mu(t)) / sigma(t)) / k, mapping rgev11 data to the
/// stationary standard Gumbel model. Throws naming block and order on a
/// support violation.
RLosSample gumbel_transform(const RLosSample& sample, const NsGevParams& params);

TestResult spacings_test(const RLosSample& sample, std::size_t r, Model model, const TestOptions& options = {},
                         const FitResult* fit = nullptr);
TestResult ccdf_test(const RLosSample& sample, std::size_t r, Model model, const TestOptions& options = {},
                     const FitResult* fit = nullptr);
TestResult ed_test(const RLosSample& sample, std::size_t r, Model model, const TestOptions& options = {},
                   const FitResult* fit = nullptr);

/// ED statistic from precomputed per-block differences; p = 2 Pr[Z > |T|].
/// Throws DegenerateDataError on zero variance.
std::pair<double, double> ed_statistic(std::span<const double> y, double eta);

/// V_n = S' I^-1 S / n, with S and I of the r-column likelihood evaluated at
/// the (r-1)-column estimate (its own estimate for r = 1).
struct ScoreStatistic {
  double value = 0.0;
  bool ridged = false;
  bool converged = true;
};
ScoreStatistic score_statistic(const RLosSample& sample, std::size_t r, const TestOptions& options = {},
                               const FitResult* lower_fit = nullptr);

/// (1 + #{V* >= V}) / (L + 1).
double bootstrap_pvalue(double observed, std::span<const double> replicates);

TestResult score_test_pb(const RLosSample& sample, std::size_t r, const TestOptions& options = {},
                         const FitResult* fit = nullptr, const FitResult* lower_fit = nullptr);

/// ForwardStop: -(1/k) sum_{i<=k} log(1 - p_i). StrongStop:
/// exp(sum_{j>=k} log(p_j) / j) * m / k. Outputs clamped to [0, 1].
std::vector<double> adjust_pvalues(std::span<const double> pvalues, PValueLayer method);
/// Same without clamping (ForwardStop may be +inf).
std::vector<double> adjust_pvalues_unclamped(std::span<const double> pvalues, PValueLayer method);

struct SelectionReport {
  Method method = Method::ccdf;
  std::vector<TestResult> results;
  std::vector<double> raw;
  std::vector<double> forwardstop;
  std::vector<double> strongstop;
  double alpha = 0.05;
  PValueLayer layer = PValueLayer::raw;
  std::size_t chosen_r = 1;
  std::string rule;
  /// A test before the first rejection did not complete; the sequence stops there.
  bool truncated = false;
};

/// chosen_r = (first r whose layer p-value < alpha) - 1, floored at 1; the
/// last tested r when nothing is rejected.
SelectionReport select_r(std::vector<TestResult> results, double alpha, PValueLayer layer);

/// First r used for stopping: 1 for score, 2 otherwise.
std::size_t first_stopping_r(Method method) noexcept;

/// Runs every test of one method from r = 1 (ccdf, score) or 2 up to rmax,
/// reusing fits across methods.
class SequenceRunner {
 public:
  SequenceRunner(const RLosSample& sample, Model model, TestOptions options);

  const FitResult& fit(std::size_t r);
  TestResult run(Method method, std::size_t r);
  std::vector<TestResult> run_sequence(Method method, std::size_t rmax);
  /// Sequence plus selection over the stopping range.
  SelectionReport select(Method method, std::size_t rmax, double alpha, PValueLayer layer);

 private:
  const RLosSample& sample_;
  Model model_;
  TestOptions options_;
  std::vector<std::optional<FitResult>> fits_;
};

}  // namespace rlos
