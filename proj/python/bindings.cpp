#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rlos/cli.hpp"
#include "rlos/dataset.hpp"
#include "rlos/errors.hpp"
#include "rlos/gof.hpp"
#include "rlos/harness.hpp"
#include "rlos/select.hpp"
#include "rlos/simulate.hpp"
#include "rlos/version.hpp"

namespace py = pybind11;
using namespace rlos;

namespace {

RLosSample make_sample(const std::vector<std::vector<double>>& rows, std::optional<std::vector<double>> time) {
  return RLosSample::from_rows(rows, std::move(time));
}

std::vector<std::vector<double>> rows_of(const RLosSample& s) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < s.blocks(); ++i) rows.emplace_back(s.row(i).begin(), s.row(i).end());
  return rows;
}

py::dict histogram_dict(const SelectionHistogram& h) {
  py::dict d;
  d["method"] = std::string(to_string(h.method));
  d["population"] = h.population;
  d["n"] = h.n;
  d["counts"] = h.counts;
  d["replicates"] = h.replicates;
  d["failures"] = h.failures;
  d["mode"] = h.mode();
  return d;
}

}  // namespace

PYBIND11_MODULE(_rlos, m) {
  m.doc() = "r-largest order statistics GEV fitting and selection of r";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<DegenerateDataError>(m, "DegenerateDataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<GevParams>(m, "GevParams")
      .def(py::init<double, double, double>(), py::arg("mu") = 0.0, py::arg("sigma") = 1.0, py::arg("k") = 0.0)
      .def_readwrite("mu", &GevParams::mu)
      .def_readwrite("sigma", &GevParams::sigma)
      .def_readwrite("k", &GevParams::k)
      .def("__repr__", [](const GevParams& p) {
        std::ostringstream s;
        s << "GevParams(mu=" << p.mu << ", sigma=" << p.sigma << ", k=" << p.k << ")";
        return s.str();
      });

  py::class_<NsGevParams>(m, "NsGevParams")
      .def(py::init<double, double, double, double, double>(), py::arg("mu0") = 0.0, py::arg("mu1") = 0.0,
           py::arg("sigma0") = 0.0, py::arg("sigma1") = 0.0, py::arg("k") = 0.0)
      .def_readwrite("mu0", &NsGevParams::mu0)
      .def_readwrite("mu1", &NsGevParams::mu1)
      .def_readwrite("sigma0", &NsGevParams::sigma0)
      .def_readwrite("sigma1", &NsGevParams::sigma1)
      .def_readwrite("k", &NsGevParams::k)
      .def("at", &NsGevParams::at, py::arg("t"));

  py::class_<WakebyParams>(m, "WakebyParams")
      .def(py::init<double, double, double, double, double>(), py::arg("xi") = 0.0, py::arg("alpha") = 1.0,
           py::arg("beta") = 1.0, py::arg("gamma") = 0.0, py::arg("delta") = 0.0)
      .def_readwrite("xi", &WakebyParams::xi)
      .def_readwrite("alpha", &WakebyParams::alpha)
      .def_readwrite("beta", &WakebyParams::beta)
      .def_readwrite("gamma", &WakebyParams::gamma)
      .def_readwrite("delta", &WakebyParams::delta);

  py::class_<RLosSample>(m, "RLosSample")
      .def(py::init(&make_sample), py::arg("rows"), py::arg("time") = std::nullopt,
           "Rows are blocks, each holding its largest values in decreasing order.")
      .def_property_readonly("blocks", &RLosSample::blocks)
      .def_property_readonly("orders", &RLosSample::orders)
      .def_property_readonly("time", [](const RLosSample& s) {
        return s.has_time() ? std::optional(s.time()) : std::nullopt;
      })
      .def("rows", &rows_of)
      .def("column", &RLosSample::column, py::arg("s"))
      .def("truncated", &RLosSample::truncated, py::arg("r"));

  m.def("gev_cdf", &gev_cdf, py::arg("x"), py::arg("params"));
  m.def("gev_quantile", &gev_quantile, py::arg("p"), py::arg("params"));
  m.def("rgev_negloglik", &rgev_negloglik, py::arg("sample"), py::arg("params"), py::arg("r"));
  m.def("digamma", &digamma, py::arg("z"));
  m.def("wakeby_quantile", &wakeby_quantile, py::arg("p"), py::arg("params"));

  py::class_<FitResult>(m, "FitResult")
      .def_property_readonly("model", [](const FitResult& f) { return std::string(to_string(f.model)); })
      .def_property_readonly("params", [](const FitResult& f) -> py::object {
        if (f.model == Model::rgev11) return py::cast(f.nonstationary());
        return py::cast(f.stationary());
      })
      .def_readonly("r", &FitResult::r)
      .def_readonly("nll", &FitResult::nll)
      .def_readonly("unpenalized_nll", &FitResult::unpenalized_nll)
      .def_readonly("penalized", &FitResult::penalized)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("iterations", &FitResult::iterations);

  m.def(
      "fit_rgev", [](const RLosSample& s, std::size_t r, bool penalize) { return fit_rgev(s, r, penalize); },
      py::arg("sample"), py::arg("r"), py::arg("penalize") = false);
  m.def(
      "fit_rgev11", [](const RLosSample& s, std::size_t r, bool penalize) { return fit_rgev11(s, r, penalize); },
      py::arg("sample"), py::arg("r"), py::arg("penalize") = false);

  m.def("sample_rgev", &sample_rgev, py::arg("n"), py::arg("orders"), py::arg("params"), py::arg("seed"));
  m.def("sample_rgev11", &sample_rgev11, py::arg("n"), py::arg("orders"), py::arg("params"), py::arg("seed"));
  m.def("sample_wakeby_rlos", &sample_wakeby_rlos, py::arg("n"), py::arg("orders"), py::arg("params"),
        py::arg("block_size"), py::arg("seed"));
  m.def("contaminate", &contaminate, py::arg("sample"), py::arg("true_r"), py::arg("mixing_p"));

  m.def(
      "cvm_uniform",
      [](const std::vector<double>& u) {
        const CvmResult r = cvm_test(u, [](double x) { return std::clamp(x, 0.0, 1.0); });
        return py::make_tuple(r.statistic, r.pvalue);
      },
      py::arg("values"), "Cramer-von Mises test against the uniform distribution: (statistic, p-value).");
  m.def("cvm_pvalue", &cvm_pvalue, py::arg("statistic"), py::arg("n"));
  m.def(
      "mann_kendall",
      [](const std::vector<double>& x) {
        const MannKendallResult r = mann_kendall(x);
        return py::dict(py::arg("s") = r.s, py::arg("variance") = r.variance, py::arg("z") = r.z,
                        py::arg("pvalue") = r.pvalue);
      },
      py::arg("series"));
  m.def(
      "adjust_pvalues",
      [](const std::vector<double>& p, const std::string& layer) { return adjust_pvalues(p, parse_layer(layer)); },
      py::arg("pvalues"), py::arg("layer"));

  py::class_<TestResult>(m, "TestResult")
      .def_property_readonly("method", [](const TestResult& t) { return std::string(to_string(t.method)); })
      .def_readonly("r", &TestResult::r)
      .def_readonly("statistic", &TestResult::statistic)
      .def_readonly("pvalue", &TestResult::pvalue)
      .def_property_readonly("status", [](const TestResult& t) { return std::string(to_string(t.status)); })
      .def_readonly("notes", &TestResult::notes);

  m.def(
      "run_test",
      [](const RLosSample& s, const std::string& method, std::size_t r, bool ns, bool penalize, std::size_t bootstrap,
         std::uint64_t seed) {
        TestOptions o;
        o.penalize = penalize;
        o.bootstrap = bootstrap;
        o.seed = seed;
        SequenceRunner runner(s, ns ? Model::rgev11 : Model::stationary, o);
        py::gil_scoped_release release;
        return runner.run(parse_method(method), r);
      },
      py::arg("sample"), py::arg("method"), py::arg("r"), py::arg("ns") = false, py::arg("penalize") = true,
      py::arg("bootstrap") = 199, py::arg("seed") = 1);

  m.def(
      "select",
      [](const RLosSample& s, const std::string& method, std::optional<std::size_t> rmax, double alpha,
         const std::string& layer, bool ns, bool penalize, std::size_t bootstrap, std::uint64_t seed) {
        TestOptions o;
        o.penalize = penalize;
        o.bootstrap = bootstrap;
        o.seed = seed;
        SelectionReport report;
        {
          py::gil_scoped_release release;
          SequenceRunner runner(s, ns ? Model::rgev11 : Model::stationary, o);
          report = runner.select(parse_method(method), rmax.value_or(s.orders()), alpha, parse_layer(layer));
        }
        return py::module_::import("json").attr("loads")(report_to_json(report).dump());
      },
      py::arg("sample"), py::arg("method"), py::arg("rmax") = std::nullopt, py::arg("alpha") = 0.05,
      py::arg("layer") = "raw", py::arg("ns") = false, py::arg("penalize") = true, py::arg("bootstrap") = 199,
      py::arg("seed") = 1, "Sequential selection of r; returns the selection report as a dict.");

  m.def(
      "load_dataset",
      [](const std::string& path) {
        const Dataset d = load_dataset_file(path);
        return py::make_tuple(d.years, d.sample);
      },
      py::arg("path"), "Reads a year, r1, ..., rR table; returns (years, sample).");

  m.def(
      "run_experiment",
      [](const std::string& config_text) {
        std::istringstream in(config_text);
        const ExperimentConfig config = parse_experiment_config(in);
        ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(config);
        }
        py::list hist;
        for (const auto& h : result.histograms) hist.append(histogram_dict(h));
        return hist;
      },
      py::arg("config"), "Runs a Monte Carlo selection experiment from key = value text; returns histograms.");
}
