#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "optalarm/alarms.hpp"
#include "optalarm/bounds.hpp"
#include "optalarm/geometry.hpp"
#include "optalarm/harness.hpp"
#include "optalarm/regression.hpp"
#include "optalarm/scenarios.hpp"

namespace py = pybind11;
using namespace optalarm;

namespace {

// Configs cross the boundary as JSON text; the Python package wraps these
// with dict-based helpers.
ScenarioConfig scenario_config(const std::string& text) {
  return scenario_config_from_json(nlohmann::json::parse(text));
}

nlohmann::json row_json(const CostRow& r) {
  nlohmann::json j = {{"r_fn", r.r_fn},         {"r_fp", r.r_fp},         {"c_cut", r.c_cut},
                      {"ec", r.ec},             {"ec_se", r.ec_se},       {"eac", r.eac},
                      {"eac_se", r.eac_se},     {"joint_fn", r.joint_fn}, {"joint_fp", r.joint_fp},
                      {"alarm_rate", r.alarm_rate}};
  j["fnr"] = r.fnr ? nlohmann::json(*r.fnr) : nlohmann::json(nullptr);
  j["fpr"] = r.fpr ? nlohmann::json(*r.fpr) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json evaluation_json(const EvaluationResult& e) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : e.rows) rows.push_back(row_json(r));
  nlohmann::json j = {{"alarm", e.alarm},
                      {"scenarios", e.scenario_count},
                      {"collision_rate", e.collision_rate},
                      {"rows", rows}};
  if (!e.error.empty()) j["error"] = e.error;
  return j;
}

std::string benchmark(const std::string& config_text) {
  const BenchmarkConfig config = benchmark_config_from_json(nlohmann::json::parse(config_text));
  BenchmarkReport report;
  {
    py::gil_scoped_release release;
    report = run_benchmark(config);
  }
  nlohmann::json alarms = nlohmann::json::array();
  for (const auto& a : report.alarms) alarms.push_back(evaluation_json(a));
  nlohmann::json timings = nlohmann::json::array();
  for (const auto& t : report.timings) {
    timings.push_back({{"alarm", t.alarm},
                       {"calls", t.calls},
                       {"mean_seconds", t.mean_seconds},
                       {"p50_seconds", t.p50_seconds},
                       {"p95_seconds", t.p95_seconds}});
  }
  return nlohmann::json{{"oracle", evaluation_json(report.oracle)},
                        {"alarms", alarms},
                        {"timings", timings},
                        {"files", report.files}}
      .dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Collision alarms, expected-cost scoring and error bounds.";
  m.attr("__version__") = OPTALARM_VERSION;

  py::class_<CostConfig>(m, "CostConfig")
      .def(py::init<double, double>(), py::arg("r_fn"), py::arg("r_fp"))
      .def_property_readonly("r_fn", &CostConfig::r_fn)
      .def_property_readonly("r_fp", &CostConfig::r_fp)
      .def("__repr__", [](const CostConfig& c) {
        return "CostConfig(r_fn=" + format_number(c.r_fn()) + ", r_fp=" + format_number(c.r_fp()) + ")";
      });

  m.def("optimal_cutoff", &optimal_cutoff, py::arg("costs"));
  m.def("optimal_ec_ceiling", &optimal_ec_ceiling, py::arg("costs"));
  m.def("hoeffding_p_eps", &hoeffding_p_eps, py::arg("n"), py::arg("eps"));
  m.def("eac_bound", &eac_bound, py::arg("eps"), py::arg("p_eps"), py::arg("costs"));
  m.def("mc_optimal_eps", &mc_optimal_eps, py::arg("n"));
  m.def("mc_eac_bound", &mc_eac_bound, py::arg("n"), py::arg("costs"));
  m.def("mc_eac_bound_at", &mc_eac_bound_at, py::arg("n"), py::arg("eps"), py::arg("costs"));
  m.def("rmse_eac_bound", &rmse_eac_bound, py::arg("rmse"), py::arg("costs"));

  py::class_<Pose>(m, "Pose")
      .def(py::init<double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0,
           py::arg("theta") = 0.0)
      .def_readwrite("x", &Pose::x)
      .def_readwrite("y", &Pose::y)
      .def_readwrite("theta", &Pose::theta);

  py::class_<OrientedRect>(m, "OrientedRect")
      .def(py::init<Pose, double, double>(), py::arg("center"),
           py::arg("length") = OrientedRect::kDefaultLength,
           py::arg("width") = OrientedRect::kDefaultWidth)
      .def_property_readonly("center", &OrientedRect::center)
      .def_property_readonly("length", &OrientedRect::length)
      .def_property_readonly("width", &OrientedRect::width);
  m.def("rect_overlap", &rect_overlap, py::arg("a"), py::arg("b"));
  m.def("inflate", &inflate, py::arg("rect"), py::arg("margin"));

  py::class_<HorizonConfig>(m, "HorizonConfig")
      .def(py::init([](double dt, double t_f, double margin, bool check_initial) {
             HorizonConfig h{dt, t_f, margin, check_initial};
             h.validate();
             return h;
           }),
           py::arg("dt") = 0.1, py::arg("t_f") = 1.0, py::arg("margin") = 0.0,
           py::arg("check_initial") = false)
      .def_readonly("dt", &HorizonConfig::dt)
      .def_readonly("t_f", &HorizonConfig::t_f)
      .def_readonly("margin", &HorizonConfig::margin)
      .def_readonly("check_initial", &HorizonConfig::check_initial);

  py::class_<JointBelief>(m, "JointBelief")
      .def_property_readonly("mean", &JointBelief::mean)
      .def_property_readonly("covariance", &JointBelief::covariance)
      .def_property_readonly("dim", &JointBelief::dim);
  m.def(
      "_make_belief",
      [](const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const std::string& config) {
        return JointBelief(mean, cov, make_models(scenario_config(config)));
      },
      py::arg("mean"), py::arg("covariance"), py::arg("config"));

  py::class_<AlarmResult>(m, "AlarmResult")
      .def_readonly("estimate", &AlarmResult::estimate)
      .def_readonly("decision", &AlarmResult::decision)
      .def_readonly("samples_used", &AlarmResult::samples_used)
      .def_readonly("hits", &AlarmResult::hits)
      .def_readonly("wall_time", &AlarmResult::wall_time)
      .def("decide", &decide, py::arg("c_cut"));

  m.def("mc_alarm", &mc_alarm, py::arg("belief"), py::arg("horizon"), py::arg("n"),
        py::arg("c_cut"), py::arg("seed"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("expected_value_alarm", &expected_value_alarm, py::arg("belief"), py::arg("horizon"));
  m.def("unscented_alarm", &unscented_alarm, py::arg("belief"), py::arg("horizon"),
        py::arg("kappa") = 0.0, py::arg("c_cut") = 0.5);
  m.def("estimate_ttc", &estimate_ttc, py::arg("belief"), py::arg("horizon"),
        py::arg("max_horizon"), py::arg("n"), py::arg("c_cut"), py::arg("seed"),
        py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("index", &Scenario::index)
      .def_readonly("belief", &Scenario::belief)
      .def_readonly("trajectory", &Scenario::trajectory)
      .def_readonly("collided", &Scenario::collided)
      .def_readonly("first_collision_time", &Scenario::first_collision_time)
      .def_readonly("initial_overlap", &Scenario::initial_overlap);
  m.def(
      "_generate_scenario",
      [](const std::string& config, std::size_t index) {
        return generate_scenario(scenario_config(config), index);
      },
      py::arg("config"), py::arg("index"));
  m.def(
      "_generate_batch",
      [](const std::string& config, std::size_t count, int threads) {
        const ScenarioConfig c = scenario_config(config);
        py::gil_scoped_release release;
        return generate_batch(c, count, threads);
      },
      py::arg("config"), py::arg("count"), py::arg("threads") = 1);
  m.def(
      "_horizon",
      [](const std::string& config) { return scenario_config(config).horizon(); },
      py::arg("config"));
  m.def(
      "_config_json",
      [](const std::string& config) { return to_json(scenario_config(config)).dump(); },
      py::arg("config"));

  py::class_<RegressionModel>(m, "RegressionModel")
      .def_static("load", &RegressionModel::load, py::arg("path"))
      .def("save", &RegressionModel::save, py::arg("path"))
      .def_property_readonly("input_dim", &RegressionModel::input_dim)
      .def_property_readonly("hidden", &RegressionModel::hidden)
      .def(
          "probability",
          [](const RegressionModel& model, const JointBelief& belief) {
            return *regression_alarm(model, belief, 0.5).estimate;
          },
          py::arg("belief"));
  m.def("regression_alarm", &regression_alarm, py::arg("model"), py::arg("belief"),
        py::arg("c_cut"));

  py::class_<TrainingReport>(m, "TrainingReport")
      .def_readonly("train_rmse", &TrainingReport::train_rmse)
      .def_readonly("validation_rmse", &TrainingReport::validation_rmse)
      .def_readonly("epochs", &TrainingReport::epochs)
      .def_readonly("train_size", &TrainingReport::train_size)
      .def_readonly("validation_size", &TrainingReport::validation_size);
  m.def(
      "_train",
      [](const std::string& config, std::size_t n, std::size_t label_samples, int hidden,
         int epochs, bool ttc_surrogate, int threads) {
        const ScenarioConfig c = scenario_config(config);
        TrainingOptions opts;
        opts.hidden = hidden;
        opts.max_epochs = epochs;
        opts.seed = derive_seed(c.seed, hash_name("fit"));
        FeatureOptions features;
        features.ttc_surrogate = ttc_surrogate;
        py::gil_scoped_release release;
        TrainedRegression t = train_regression(training_beliefs(c), c.horizon(), label_samples, n,
                                               opts, features, threads);
        return std::make_pair(std::move(t.model), t.report);
      },
      py::arg("config"), py::arg("n"), py::arg("label_samples"), py::arg("hidden"),
      py::arg("epochs"), py::arg("ttc_surrogate"), py::arg("threads"));

  m.def("_run_benchmark", &benchmark, py::arg("config"));
}
