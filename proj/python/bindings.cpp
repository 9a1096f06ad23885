#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "safecmaes/cmaes.hpp"
#include "safecmaes/csv_io.hpp"
#include "safecmaes/errors.hpp"
#include "safecmaes/gpr.hpp"
#include "safecmaes/harness.hpp"
#include "safecmaes/mathkit.hpp"
#include "safecmaes/problems.hpp"
#include "safecmaes/safe_layer.hpp"

namespace py = pybind11;
using namespace safecmaes;

namespace {

ExperimentConfig config_from_string(const std::string& text) {
  try {
    return config_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ConfigError, e.what());
  }
}

py::dict trial_to_dict(const TrialLog& t) {
  py::dict d;
  std::vector<long> iter, evals, unsafe;
  std::vector<double> best_safe, best, sigma;
  for (const auto& r : t.rows) {
    iter.push_back(r.iter);
    evals.push_back(r.evals);
    unsafe.push_back(r.unsafe_count);
    best_safe.push_back(r.best_safe_f);
    best.push_back(r.best_f);
    sigma.push_back(r.sigma);
  }
  d["trial"] = t.trial;
  d["termination"] = t.termination;
  d["thresholds"] = t.thresholds;
  d["iter"] = iter;
  d["evals"] = evals;
  d["unsafe_count"] = unsafe;
  d["best_safe_f"] = best_safe;
  d["best_f"] = best;
  d["sigma"] = sigma;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Safe CMA-ES core";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def("chi2_ppf", &chi2_ppf, py::arg("p"), py::arg("dof"));
  m.def("chi2_cdf", &chi2_cdf, py::arg("x"), py::arg("dof"));
  m.def("eig_sym", [](const Matrix& a) {
    const auto e = eig_sym(a);
    return py::make_tuple(e.values, e.vectors);
  });
  m.def("sqrt_spd", &sqrt_spd);

  m.def("default_params", [](int dim) {
    const auto p = default_params(dim);
    py::dict d;
    d["lambda"] = p.lambda;
    d["mu"] = p.mu;
    d["weights"] = p.weights;
    d["mu_eff"] = p.mu_eff;
    d["c_sigma"] = p.c_sigma;
    d["d_sigma"] = p.d_sigma;
    d["c_c"] = p.c_c;
    d["c_1"] = p.c_1;
    d["c_mu"] = p.c_mu;
    d["chi_d"] = p.chi_d;
    return d;
  });

  m.def("rbf_kernel", &rbf_kernel, py::arg("a"), py::arg("b"), py::arg("length_scale"));
  py::class_<GprModel>(m, "GprModel")
      .def_static("fit", &GprModel::fit, py::arg("inputs"), py::arg("targets"), py::arg("length_scale"))
      .def("mean", &GprModel::mean)
      .def("mean_gradient", &GprModel::mean_gradient)
      .def_property_readonly("jitter", &GprModel::jitter);

  m.def("benchmark_names", &benchmark_names);
  m.def("eval_benchmark", &eval_benchmark, py::arg("name"), py::arg("x"));

  m.def(
      "project",
      [](const Vector& z, const std::vector<Vector>& centers, const std::vector<double>& radii) {
        SafeRegion region;
        for (std::size_t i = 0; i < centers.size(); ++i) region.anchors.push_back({centers[i], radii.at(i), i});
        const Projection p = project(z, region);
        return py::make_tuple(p.z, p.xi, p.anchor);
      },
      py::arg("z"), py::arg("centers"), py::arg("radii"));

  m.def("run_trial", [](const std::string& config, int trial) {
    return trial_to_dict(run_trial(config_from_string(config), trial));
  });
  m.def("run_experiment", [](const std::string& config, const std::string& out) {
    const ExperimentConfig c = config_from_string(config);
    const ExperimentSummary s = run_experiment(c);
    std::string path;
    if (!out.empty()) path = write_experiment(out, s, experiment_stem(c)).string();
    py::list trials;
    for (const auto& t : s.trials) trials.append(trial_to_dict(t));
    py::dict d;
    d["trials"] = trials;
    d["summary_path"] = path;
    return d;
  }, py::arg("config"), py::arg("out") = "");
  m.attr("RNG_TAG") = std::string(RngStream::kVersionTag);
}
