// Python bindings: scenarios, simulation, estimators, detector and the experiment sweep.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "momentid/detector.hpp"
#include "momentid/errors.hpp"
#include "momentid/estimators.hpp"
#include "momentid/harness.hpp"
#include "momentid/io.hpp"
#include "momentid/model.hpp"

namespace py = pybind11;
using namespace momentid;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> from_array(const Array& a) {
  if (a.ndim() != 1) throw Error(ErrorCode::InvalidArgument, "expected a 1-d array");
  return {a.data(), a.data() + a.size()};
}

py::dict report_dict(const EstimateReport& r) {
  py::dict d;
  d["method"] = std::string(method_name(r.method));
  if (r.candidates) d["candidates"] = py::make_tuple(r.candidates->first, r.candidates->second);
  else d["beta_hat"] = r.beta_hat ? py::cast(*r.beta_hat) : py::none();
  d["order_found"] = r.order_found ? py::cast(*r.order_found) : py::none();
  d["branch"] = r.branch ? py::cast(*r.branch) : py::none();
  if (r.detected_source) d["detected_source"] = *r.detected_source;
  d["diagnostics"] = r.diagnostics;
  return d;
}

EstimatorConfig estimator_config(double z, int max_order) {
  EstimatorConfig cfg;
  cfg.z = z;
  cfg.max_order = max_order;
  return cfg;
}

EstimateReport estimate_on(const MomentSource& src, const std::string& method, double weight1,
                           const EstimatorConfig& cfg) {
  if (method == "auto") {
    DetectorConfig dc;
    dc.estimator = cfg;
    return estimate_auto(src, dc);
  }
  return run_method(parse_method(method), src, weight1, cfg);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Treatment effect estimation from two environments via higher-order moments";

  static py::exception<Error> error_type(m, "MomentIdError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      auto cls = py::reinterpret_borrow<py::object>(error_type.ptr());
      py::object exc = cls(std::string(to_string(e.code())), e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::enum_<ChangeKind>(m, "ChangeKind")
      .value("EpsT", ChangeKind::EpsT)
      .value("EpsU", ChangeKind::EpsU)
      .value("Gamma", ChangeKind::Gamma)
      .value("Alpha", ChangeKind::Alpha)
      .value("EpsY", ChangeKind::EpsY)
      .value("EpsTAndEpsU", ChangeKind::EpsTAndEpsU);

  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def_static("exponential", &NoiseSpec::exponential, py::arg("rate"))
      .def_static("gamma", &NoiseSpec::gamma, py::arg("shape"), py::arg("scale"))
      .def_static("gumbel", &NoiseSpec::gumbel, py::arg("scale"))
      .def_static("logistic", &NoiseSpec::logistic, py::arg("scale"))
      .def_static("uniform", &NoiseSpec::uniform, py::arg("halfwidth"))
      .def_static("point_mass", &NoiseSpec::point_mass)
      .def_static("gaussian", &NoiseSpec::gaussian, py::arg("sigma"))
      .def("scaled", &NoiseSpec::scaled, py::arg("factor"))
      .def_property_readonly("family", [](const NoiseSpec& s) { return std::string(family_name(s.family)); })
      .def_readonly("params", &NoiseSpec::params)
      .def_readonly("scale", &NoiseSpec::scale)
      .def("raw_moment", [](const NoiseSpec& s, int order) { return raw_moment(s, order); })
      .def("__eq__", [](const NoiseSpec& a, const NoiseSpec& b) { return a == b; })
      .def("__repr__", [](const NoiseSpec& s) { return describe(s); });

  py::class_<ScmParams>(m, "ScmParams")
      .def(py::init<>())
      .def_readwrite("alpha", &ScmParams::alpha)
      .def_readwrite("beta", &ScmParams::beta)
      .def_readwrite("gamma", &ScmParams::gamma)
      .def_readwrite("noise_u", &ScmParams::noise_u)
      .def_readwrite("noise_t", &ScmParams::noise_t)
      .def_readwrite("noise_y", &ScmParams::noise_y)
      .def("moment", [](const ScmParams& p, int a, int b) { return population_moment(p, a, b); },
           py::arg("p"), py::arg("q"));

  py::class_<ScenarioSpec>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("env1", &ScenarioSpec::env1)
      .def_readwrite("env2", &ScenarioSpec::env2)
      .def_readwrite("change", &ScenarioSpec::change)
      .def_static("from_toml", &parse_scenario_toml, py::arg("text"))
      .def("to_toml", &scenario_to_toml)
      .def("problems", &validate);

  m.def("construct_counterexample", &construct_counterexample, py::arg("scenario"));
  m.def("construct_epsy_counterexample", &construct_epsy_counterexample, py::arg("scenario"));

  py::class_<EnvPairDataset>(m, "Dataset")
      .def(py::init([](const Array& t1, const Array& y1, const Array& t2, const Array& y2) {
             EnvPairDataset d{from_array(t1), from_array(y1), from_array(t2), from_array(y2)};
             d.validate();
             return d;
           }),
           py::arg("t1"), py::arg("y1"), py::arg("t2"), py::arg("y2"))
      .def_property_readonly("t1", [](const EnvPairDataset& d) { return to_array(d.t1); })
      .def_property_readonly("y1", [](const EnvPairDataset& d) { return to_array(d.y1); })
      .def_property_readonly("t2", [](const EnvPairDataset& d) { return to_array(d.t2); })
      .def_property_readonly("y2", [](const EnvPairDataset& d) { return to_array(d.y2); })
      .def_static("read_csv", [](const std::string& path) { return read_dataset_csv(std::filesystem::path(path)); })
      .def("to_csv", [](const EnvPairDataset& d) {
        std::ostringstream out;
        write_dataset_csv(out, d);
        return out.str();
      });

  m.def("simulate", &simulate, py::arg("scenario"), py::arg("n"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());

  m.def(
      "estimate",
      [](const EnvPairDataset& data, const std::string& method, double z, int max_order) {
        const auto cfg = estimator_config(z, max_order);
        EstimateReport r;
        {
          py::gil_scoped_release release;
          if (method == "OlsCombined") {
            r = ols_combined(data, cfg);
          } else {
            const double w1 = static_cast<double>(data.t1.size()) /
                              static_cast<double>(data.t1.size() + data.t2.size());
            r = estimate_on(dataset_moments(data, cfg), method, w1, cfg);
          }
        }
        return report_dict(r);
      },
      py::arg("data"), py::arg("method") = "auto", py::arg("z") = 4.0, py::arg("max_order") = 8);

  m.def(
      "oracle_estimate",
      [](const ScenarioSpec& s, const std::string& method, int max_order) {
        return report_dict(
            estimate_on(population_moments(s, max_order), method, 0.5, estimator_config(4.0, max_order)));
      },
      py::arg("scenario"), py::arg("method"), py::arg("max_order") = 8);

  m.def(
      "detect",
      [](const EnvPairDataset& data, double z, double ks_alpha) {
        DetectorConfig cfg;
        cfg.estimator.z = z;
        cfg.ks_alpha = ks_alpha;
        ChangeVerdict v;
        {
          py::gil_scoped_release release;
          v = detect_source(data, cfg);
        }
        py::dict d;
        d["source"] = std::string(source_name(v.source));
        d["evidence"] = v.evidence;
        return d;
      },
      py::arg("data"), py::arg("z") = 4.0, py::arg("ks_alpha") = 0.01);

  m.def(
      "get_ratio",
      [](const Array& x1, const Array& x2, double z, int max_order) {
        const auto r = get_ratio_detailed(from_array(x1), from_array(x2), estimator_config(z, max_order));
        return py::make_tuple(r.ratio.value, r.ratio.se,
                              r.order ? py::cast(*r.order) : py::none());
      },
      py::arg("x1"), py::arg("x2"), py::arg("z") = 4.0, py::arg("max_order") = 8);

  m.def(
      "run_experiment",
      [](const std::string& config_toml, int threads) {
        auto cfg = parse_experiment_toml(config_toml);
        if (threads > 0) cfg.threads = threads;
        std::ostringstream out;
        {
          py::gil_scoped_release release;
          write_results_csv(out, run_experiment(cfg));
        }
        return out.str();
      },
      py::arg("config_toml"), py::arg("threads") = 0,
      "Runs a sweep described by experiment TOML text and returns the results CSV.");

  m.attr("RESULTS_HEADER") = std::string(kResultsHeader);
}
