#include "rlos/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "rlos/dataset.hpp"
#include "rlos/errors.hpp"
#include "rlos/gof.hpp"
#include "rlos/harness.hpp"
#include "rlos/version.hpp"

namespace rlos {
namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string invocation(const std::vector<std::string>& args) {
  std::string s = "rlos";
  for (const auto& a : args) s += " " + a;
  return s;
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

struct Common {
  std::string file;
  bool ns = false;
};

int cmd_fit(const std::vector<std::string>& args, const Common& common, std::size_t r, bool penalize,
            const std::string& json_path, std::ostream& out, std::ostream& err) {
  const Dataset data = load_dataset_file(common.file);
  if (r < 1 || r > data.sample.orders()) throw DataError("r must lie in [1, " + std::to_string(data.sample.orders()) + "]");
  const FitResult fit = common.ns ? fit_rgev11(data.sample, r, penalize) : fit_rgev(data.sample, r, penalize);

  out << "# " << invocation(args) << '\n';
  out << "# model=" << to_string(fit.model) << " r=" << r << " n=" << data.sample.blocks()
      << " penalized=" << (penalize ? "true" : "false") << '\n';
  out << "parameter\testimate\n" << std::setprecision(10);
  json params;
  if (fit.model == Model::rgev11) {
    const NsGevParams& p = fit.nonstationary();
    for (auto [name, v] : {std::pair{"mu0", p.mu0}, {"mu1", p.mu1}, {"sigma0", p.sigma0}, {"sigma1", p.sigma1}, {"k", p.k}}) {
      out << name << '\t' << v << '\n';
      params[name] = v;
    }
  } else {
    const GevParams& p = fit.stationary();
    for (auto [name, v] : {std::pair{"mu", p.mu}, {"sigma", p.sigma}, {"k", p.k}}) {
      out << name << '\t' << v << '\n';
      params[name] = v;
    }
  }
  out << "nll\t" << fit.nll << '\n';
  out << "unpenalized_nll\t" << fit.unpenalized_nll << '\n';
  out << "converged\t" << (fit.converged ? "true" : "false") << '\n';
  out << "iterations\t" << fit.iterations << '\n';

  if (!json_path.empty()) {
    json j{{"invocation", invocation(args)},
           {"model", to_string(fit.model)},
           {"r", r},
           {"params", params},
           {"nll", number(fit.nll)},
           {"unpenalized_nll", number(fit.unpenalized_nll)},
           {"penalized", fit.penalized},
           {"converged", fit.converged},
           {"iterations", fit.iterations},
           {"score", fit.score},
           {"info", fit.info}};
    std::ofstream f(json_path);
    if (!f) throw DataError(json_path + ": cannot write");
    f << j.dump(2) << '\n';
  }
  if (!fit.converged) {
    err << "rlos fit: optimizer did not converge\n";
    return kExitNumericalFailure;
  }
  return kExitOk;
}

struct SelectOptions {
  std::string method = "all";
  double alpha = 0.05;
  std::string layer = "raw";
  std::size_t rmax = 0;
  std::size_t boot = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  bool no_penalty = false;
  std::string out_path;
};

void print_results(std::ostream& out, Method method, const std::vector<TestResult>& diagnostics,
                   const SelectionReport& report) {
  out << "method\tr\tstatistic\tpvalue\tforwardstop\tstrongstop\tstatus\n";
  auto row = [&](const TestResult& t, double fs, double ss, const char* suffix) {
    out << to_string(method) << '\t' << t.r << '\t' << t.statistic << '\t' << t.pvalue << '\t' << fs << '\t' << ss
        << '\t' << to_string(t.status) << suffix << '\n';
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& t : diagnostics) row(t, nan, nan, " (not used for stopping)");
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    const bool has = i < report.raw.size();
    row(report.results[i], has ? report.forwardstop[i] : nan, has ? report.strongstop[i] : nan, "");
  }
}

int cmd_select(const std::vector<std::string>& args, const Common& common, const SelectOptions& o, std::ostream& out,
               std::ostream& err) {
  const Dataset data = load_dataset_file(common.file);
  const RLosSample& sample = data.sample;
  const std::size_t rmax = o.rmax == 0 ? sample.orders() : o.rmax;
  if (rmax < 2 || rmax > sample.orders())
    throw DataError("--rmax must lie in [2, " + std::to_string(sample.orders()) + "]");
  const PValueLayer layer = parse_layer(o.layer);
  std::vector<Method> methods;
  if (o.method == "all") {
    methods = {Method::spacings, Method::ed, Method::ccdf};
    if (!common.ns) methods.insert(methods.begin() + 1, Method::score);
  } else {
    methods = {parse_method(o.method)};
  }
  if (common.ns && std::find(methods.begin(), methods.end(), Method::score) != methods.end())
    throw DataError("the score test is not available with --ns");

  out << "# " << invocation(args) << '\n';
  out << "# seed=" << o.seed << " alpha=" << o.alpha << " layer=" << to_string(layer)
      << " model=" << (common.ns ? "rgev11" : "stationary") << " n=" << sample.blocks() << " R=" << sample.orders()
      << '\n';
  out << std::setprecision(8);
  out << "# mann-kendall trend screening\n";
  out << "order\tS\tz\tpvalue\n";
  for (std::size_t s = 1; s <= std::min<std::size_t>(5, sample.orders()); ++s) {
    if (sample.blocks() < 4) break;
    const std::vector<double> col = sample.column(s);
    const MannKendallResult mk = mann_kendall(col);
    out << s << '\t' << mk.s << '\t' << mk.z << '\t' << mk.pvalue << '\n';
  }

  TestOptions options;
  options.penalize = !o.no_penalty;
  options.bootstrap = o.boot;
  options.seed = o.seed;
  options.workers = o.workers;
  SequenceRunner runner(sample, common.ns ? Model::rgev11 : Model::stationary, options);

  json reports = json::array();
  std::vector<std::pair<Method, std::size_t>> chosen;
  for (Method m : methods) {
    std::vector<TestResult> seq = runner.run_sequence(m, rmax);
    std::vector<TestResult> diagnostics;
    const std::size_t first = first_stopping_r(m);
    while (!seq.empty() && seq.front().r < first) {
      diagnostics.push_back(std::move(seq.front()));
      seq.erase(seq.begin());
    }
    const SelectionReport report = select_r(std::move(seq), o.alpha, layer);
    out << "# " << to_string(m) << '\n';
    print_results(out, m, diagnostics, report);
    chosen.emplace_back(m, report.chosen_r);
    json jr = report_to_json(report);
    json diag = json::array();
    for (const auto& t : diagnostics)
      diag.push_back({{"r", t.r}, {"statistic", number(t.statistic)}, {"pvalue", number(t.pvalue)},
                      {"status", to_string(t.status)}});
    jr["diagnostics"] = diag;
    reports.push_back(jr);
  }
  out << "# selection\nmethod\tchosen_r\tlayer\talpha\n";
  for (auto [m, r] : chosen) out << to_string(m) << '\t' << r << '\t' << to_string(layer) << '\t' << o.alpha << '\n';

  if (!o.out_path.empty()) {
    json j{{"tool", "rlos"},
           {"version", kVersion},
           {"invocation", invocation(args)},
           {"file", common.file},
           {"seed", o.seed},
           {"model", common.ns ? "rgev11" : "stationary"},
           {"reports", reports}};
    std::ofstream f(o.out_path);
    if (!f) throw DataError(o.out_path + ": cannot write");
    f << j.dump(2) << '\n';
  }
  (void)err;
  return kExitOk;
}

int cmd_ppdata(const std::vector<std::string>& args, const Common& common, const std::string& method_name,
               std::size_t rmax_opt, bool no_penalty, std::ostream& out, std::ostream& err) {
  const Dataset data = load_dataset_file(common.file);
  const RLosSample& sample = data.sample;
  const Method method = parse_method(method_name);
  if (method != Method::ccdf && method != Method::spacings) throw DataError("--method must be ccdf or spacings");
  const std::size_t rmax = rmax_opt == 0 ? sample.orders() : rmax_opt;
  if (rmax < 1 || rmax > sample.orders()) throw DataError("--rmax must lie in [1, " + std::to_string(sample.orders()) + "]");
  TestOptions options;
  options.penalize = !no_penalty;
  SequenceRunner runner(sample, common.ns ? Model::rgev11 : Model::stationary, options);

  out << "# " << invocation(args) << '\n';
  out << "# plotting position (i - 0.35) / n\n";
  out << "method\tr\ti\tplotting_position\tmodel_value\n" << std::setprecision(10);
  const std::vector<double> pp = plotting_positions(sample.blocks());
  int status = kExitOk;
  for (std::size_t r = method == Method::ccdf ? 1 : 2; r <= rmax; ++r) {
    const FitResult& fit = runner.fit(r);
    if (!fit.converged) {
      out << "# r=" << r << " skipped: fit did not converge\n";
      status = kExitNumericalFailure;
      continue;
    }
    std::vector<double> values;
    const bool ns = fit.model == Model::rgev11;
    if (method == Method::ccdf) {
      values = ns ? ccdf_values(sample, r, fit.nonstationary()) : ccdf_values(sample, r, fit.stationary());
    } else {
      values = ns ? spacings_values(sample, r - 1, fit.nonstationary()) : spacings_values(sample, r - 1, fit.stationary());
      for (double& v : values) v = -std::expm1(-v);
    }
    values = sorted(std::move(values));
    for (std::size_t i = 0; i < values.size(); ++i)
      out << to_string(method) << '\t' << r << '\t' << i + 1 << '\t' << pp[i] << '\t' << values[i] << '\n';
  }
  if (status != kExitOk) err << "rlos ppdata: some orders were skipped\n";
  return status;
}

int cmd_experiment(const std::vector<std::string>& args, const std::string& config_path, const std::string& prefix,
                   int workers, std::ostream& out, std::ostream& err) {
  std::ifstream in(config_path);
  if (!in) throw DataError(config_path + ": cannot open file");
  ExperimentConfig config;
  try {
    config = parse_experiment_config(in);
  } catch (const std::invalid_argument& e) {
    throw DataError(config_path + ": " + e.what());
  }
  if (workers >= 0) config.workers = static_cast<unsigned>(workers);
  std::size_t last_decile = 0;
  const ExperimentResult result = run_experiment(config, [&](std::size_t done, std::size_t total) {
    const std::size_t decile = done * 10 / total;
    if (decile != last_decile || done == total) {
      last_decile = decile;
      err << "rlos experiment: " << done << "/" << total << " replicates\n";
    }
  });
  out << "# " << invocation(args) << '\n';
  write_histogram_table(out, result);
  std::ofstream table(prefix + ".tsv");
  std::ofstream manifest(prefix + ".manifest.json");
  if (!table || !manifest) throw DataError(prefix + ": cannot write outputs");
  table << "# " << invocation(args) << '\n';
  write_histogram_table(table, result);
  write_manifest(manifest, result);
  return kExitOk;
}

}  // namespace

std::vector<double> plotting_positions(std::size_t n) {
  std::vector<double> pp(n);
  for (std::size_t i = 0; i < n; ++i) pp[i] = (static_cast<double>(i + 1) - 0.35) / static_cast<double>(n);
  return pp;
}

json report_to_json(const SelectionReport& report) {
  json results = json::array();
  for (const auto& t : report.results) {
    results.push_back({{"r", t.r},
                       {"statistic", number(t.statistic)},
                       {"pvalue", number(t.pvalue)},
                       {"status", to_string(t.status)},
                       {"model", to_string(t.model)},
                       {"notes", t.notes}});
  }
  return {{"method", to_string(report.method)},
          {"alpha", report.alpha},
          {"layer", to_string(report.layer)},
          {"rule", report.rule},
          {"chosen_r", report.chosen_r},
          {"truncated", report.truncated},
          {"raw", report.raw},
          {"forwardstop", report.forwardstop},
          {"strongstop", report.strongstop},
          {"results", results}};
}

SelectionReport report_from_json(const json& j) {
  const Method method = parse_method(j.at("method").get<std::string>());
  std::vector<TestResult> results;
  for (const auto& jr : j.at("results")) {
    TestResult t;
    t.method = method;
    t.r = jr.at("r").get<std::size_t>();
    t.statistic = number(jr.at("statistic"));
    t.pvalue = number(jr.at("pvalue"));
    t.status = parse_status(jr.at("status").get<std::string>());
    t.model = jr.value("model", std::string("stationary")) == "rgev11" ? Model::rgev11 : Model::stationary;
    t.notes = jr.value("notes", std::vector<std::string>{});
    results.push_back(std::move(t));
  }
  return select_r(std::move(results), j.at("alpha").get<double>(), parse_layer(j.at("layer").get<std::string>()));
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fit r-largest order statistics GEV models and select r", "rlos"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common common;
  std::size_t fit_r = 1;
  bool fit_penalize = false;
  std::string fit_json;
  auto* fit = app.add_subcommand("fit", "Fit the rGEV (or rGEV11 with --ns) model to the top r columns");
  fit->add_option("file", common.file, "CSV dataset (year, r1, ..., rR)")->required();
  fit->add_option("-r,--r", fit_r, "Number of order statistics")->required()->check(CLI::PositiveNumber);
  fit->add_flag("--ns", common.ns, "Fit the rGEV11 model (linear location, log-linear scale in time)");
  fit->add_flag("--penalize", fit_penalize, "Penalize negative shape values");
  fit->add_option("--json", fit_json, "Write the fit as JSON to this path");

  SelectOptions sel;
  auto* select = app.add_subcommand("select", "Select r with sequential goodness-of-fit tests");
  select->add_option("file", common.file, "CSV dataset")->required();
  select->add_option("--method", sel.method, "spacings, score, ed, ccdf or all")
      ->check(CLI::IsMember({"spacings", "score", "ed", "ccdf", "all"}));
  select->add_option("--alpha", sel.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  select->add_option("--layer", sel.layer, "p-value layer used for stopping")
      ->check(CLI::IsMember({"raw", "forwardstop", "strongstop"}));
  select->add_flag("--ns", common.ns, "Use the rGEV11 model");
  select->add_option("--rmax", sel.rmax, "Largest r tested (default R)");
  select->add_option("--boot", sel.boot, "Parametric bootstrap samples for the score test");
  select->add_option("--seed", sel.seed, "Bootstrap seed");
  select->add_option("--workers", sel.workers, "Bootstrap worker threads (0 = hardware)");
  select->add_flag("--no-penalty", sel.no_penalty, "Use plain maximum likelihood");
  select->add_option("--out", sel.out_path, "Write the selection report as JSON");

  std::string pp_method = "ccdf";
  std::size_t pp_rmax = 0;
  bool pp_no_penalty = false;
  auto* ppdata = app.add_subcommand("ppdata", "Emit conditional probability-plot data per r");
  ppdata->add_option("file", common.file, "CSV dataset")->required();
  ppdata->add_option("--method", pp_method, "ccdf or spacings")->check(CLI::IsMember({"ccdf", "spacings"}));
  ppdata->add_option("--rmax", pp_rmax, "Largest r (default R)");
  ppdata->add_flag("--ns", common.ns, "Use the rGEV11 model");
  ppdata->add_flag("--no-penalty", pp_no_penalty, "Use plain maximum likelihood");

  std::string config_path;
  std::string prefix = "experiment";
  int exp_workers = -1;
  auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo r-selection experiment");
  experiment->add_option("config", config_path, "key = value configuration file")->required();
  experiment->add_option("--out", prefix, "Output prefix for <prefix>.tsv and <prefix>.manifest.json");
  experiment->add_option("--workers", exp_workers, "Worker threads (overrides the config)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitDataError;
  }

  try {
    if (*fit) return cmd_fit(args, common, fit_r, fit_penalize, fit_json, out, err);
    if (*select) return cmd_select(args, common, sel, out, err);
    if (*ppdata) return cmd_ppdata(args, common, pp_method, pp_rmax, pp_no_penalty, out, err);
    if (*experiment) return cmd_experiment(args, config_path, prefix, exp_workers, out, err);
  } catch (const DataError& e) {
    err << "rlos: " << e.what() << '\n';
    return kExitDataError;
  } catch (const DegenerateDataError& e) {
    err << "rlos: degenerate data: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::invalid_argument& e) {
    err << "rlos: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "rlos: numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  }
  return kExitDataError;
}

}  // namespace rlos
