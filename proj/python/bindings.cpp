// Python bindings. Structured arguments (policies, instances, configs) cross
// the boundary as JSON text in the same schema the CLI reads; the Python
// package wraps these with dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "allocvar/config.hpp"
#include "allocvar/errors.hpp"
#include "allocvar/fluid.hpp"
#include "allocvar/report.hpp"
#include "allocvar/runner.hpp"
#include "allocvar/sim.hpp"
#include "allocvar/theory.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace allocvar;

namespace {

json fluid_json(const FluidSolution& s) {
  return {{"t", s.t}, {"f_t", s.f_t}, {"n", s.n}, {"lambda", s.lambda},
          {"residual", s.residual}, {"iterations", s.iterations}};
}

std::string run_experiment_json(const std::string& instance, const std::string& policy, std::int64_t T,
                                std::int64_t n_trials, std::uint64_t seed, unsigned threads) {
  const auto inst = instance_from_json(json::parse(instance)).build();
  const auto spec = policy_from_json(json::parse(policy));
  py::gil_scoped_release release;
  return to_json(run_experiment(inst, spec, T, n_trials, seed, threads)).dump();
}

std::string sweep_delta_json(const std::string& policy, std::int64_t T, const std::vector<double>& grid,
                             std::int64_t n_trials, std::uint64_t seed, unsigned threads) {
  const auto spec = policy_from_json(json::parse(policy));
  py::gil_scoped_release release;
  return to_json(sweep_delta(spec, T, grid, n_trials, seed, threads)).dump();
}

std::string pair_check_json(const std::string& policy, double delta, std::int64_t T, std::int64_t n_trials,
                            std::uint64_t seed, unsigned threads) {
  const auto spec = policy_from_json(json::parse(policy));
  py::gil_scoped_release release;
  return to_json(check_instance_pair(spec, delta, T, n_trials, seed, threads)).dump();
}

std::vector<std::string> run_json(const std::string& config) {
  const auto cfg = config_from_json(json::parse(config));
  py::gil_scoped_release release;
  return run(cfg);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "allocvar native core";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);

  m.def("exploration_value", [](const std::string& f, double t) {
    return exploration_from_json(json::parse(f))(t);
  });
  m.def("validate_exploration", [](const std::string& f) {
    const auto r = validate_exploration_function(exploration_from_json(json::parse(f)));
    return json{{"ok", r.ok()}, {"violations", r.violations}, {"advisories", r.advisories},
                {"monotone_from", r.monotone_from}}.dump();
  });
  m.def("solve_fluid", [](const std::vector<double>& means, double f_t, double t) {
    return fluid_json(solve_fluid(means, f_t, t)).dump();
  });
  m.def("fluid_trajectory", [](const std::vector<double>& means, const std::string& f,
                               const std::vector<std::int64_t>& ts) {
    json out = json::array();
    for (const auto& s : fluid_trajectory(means, exploration_from_json(json::parse(f)), ts)) {
      out.push_back(fluid_json(s));
    }
    return out.dump();
  });
  m.def("run_experiment", &run_experiment_json);
  m.def("sweep_delta", &sweep_delta_json);
  m.def("check_instance_pair", &pair_check_json);
  m.def("kl_gaussian", &kl_gaussian);
  m.def("divergence_decomposition", &divergence_decomposition);
  m.def("bh_bound", &bh_bound);
  m.def("resolve_config", [](const std::string& config) {
    return to_json(resolve(config_from_json(json::parse(config)))).dump();
  });
  m.def("run", &run_json);
  m.def("results_columns", &results_columns);
  m.def("frontier_columns", &frontier_columns);
  m.def("slopes_columns", &slopes_columns);
}
