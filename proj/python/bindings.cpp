#include "gotube/engine.hpp"
#include "gotube/extremes.hpp"
#include "gotube/oracle.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace gotube;

namespace {

py::dict tube_to_dict(const BoundingTube& tube) {
  std::vector<double> times, radii, coverage, max_distance, delta_lambda;
  std::vector<std::size_t> samples;
  const int n = tube.config.system ? tube.config.system->dimension() : 0;
  Matrix centers(static_cast<Eigen::Index>(tube.balls.size()), n);
  for (std::size_t i = 0; i < tube.balls.size(); ++i) {
    const auto& b = tube.balls[i];
    times.push_back(b.time);
    radii.push_back(b.radius);
    coverage.push_back(b.coverage);
    max_distance.push_back(b.max_distance);
    delta_lambda.push_back(b.delta_lambda);
    samples.push_back(b.samples);
    centers.row(static_cast<Eigen::Index>(i)) = b.center.transpose();
  }
  py::dict d;
  d["times"] = times;
  d["radii"] = radii;
  d["centers"] = centers;
  d["coverage"] = coverage;
  d["max_distance"] = max_distance;
  d["delta_lambda"] = delta_lambda;
  d["samples"] = samples;
  d["runtime_seconds"] = tube.runtime_seconds;
  return d;
}

GoTubeConfig make_config(const std::string& system, const std::map<std::string, double>& params,
                         std::optional<Vector> center, double radius, double time_horizon,
                         double dt, double mu, double gamma, std::size_t batch,
                         std::size_t max_samples, std::uint64_t seed, unsigned threads) {
  auto spec = std::make_shared<const SystemSpec>(load_system(system, params));
  GoTubeConfig c;
  c.center = center ? *center : spec->default_center();
  c.system = std::move(spec);
  c.radius = radius;
  c.times = uniform_grid(time_horizon, dt);
  c.mu = mu;
  c.gamma = gamma;
  c.batch = batch;
  c.max_samples = max_samples;
  c.seed = seed;
  c.threads = threads;
  return c;
}

}  // namespace

PYBIND11_MODULE(_gotube, m) {
  m.doc() = "Statistical bounding tubes for continuous-time flows";

  py::register_exception<Error>(m, "GoTubeError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UnknownSystemError>(m, "UnknownSystemError", PyExc_KeyError);
  py::register_exception<BudgetExceededError>(m, "BudgetExceededError", PyExc_RuntimeError);
  py::register_exception<IntegrationBlowupError>(m, "IntegrationBlowupError", PyExc_ArithmeticError);

  m.def("systems", &registry_names);

  m.def(
      "rhs",
      [](const std::string& system, const Vector& x, const std::map<std::string, double>& params) {
        return load_system(system, params).rhs(x);
      },
      py::arg("system"), py::arg("x"), py::arg("params") = std::map<std::string, double>{});

  m.def(
      "flow",
      [](const std::string& system, const Vector& x, double t,
         const std::map<std::string, double>& params) {
        const auto out = integrate_augmented(load_system(system, params), x, 0.0, t);
        return py::make_tuple(out.state, out.sensitivity);
      },
      py::arg("system"), py::arg("x"), py::arg("t"),
      py::arg("params") = std::map<std::string, double>{},
      "(state, sensitivity) of the flow at time t");

  m.def("cap_fraction", &cap_fraction, py::arg("dimension"), py::arg("chord_radius"),
        py::arg("sphere_radius"));
  m.def("cap_radius", &compute_cap_radius, py::arg("stretch"), py::arg("delta_lambda"),
        py::arg("slack"));
  m.def("ball_volume", &ball_volume, py::arg("dimension"), py::arg("radius"));
  m.def("dkw_epsilon", &dkw_epsilon, py::arg("n"), py::arg("gamma"));

  m.def(
      "fit_gev",
      [](const std::vector<double>& xs) {
        const auto g = fit_gev(xs);
        return py::make_tuple(g.location, g.scale, g.shape);
      },
      py::arg("samples"), "(location, scale, shape) by maximum likelihood");

  m.def(
      "certify_quantile",
      [](const std::vector<double>& xs, double gamma, double q) -> py::object {
        const auto c = certify_quantile(xs, gamma, q);
        if (!c.quantile) return py::none();
        return py::float_(*c.quantile);
      },
      py::arg("samples"), py::arg("gamma"), py::arg("q"),
      "Certified q-quantile of the sampled statistic, or None when unbounded");

  m.def(
      "run",
      [](const std::string& system, const std::map<std::string, double>& params,
         std::optional<Vector> center, double radius, double time_horizon, double dt, double mu,
         double gamma, std::size_t batch, std::size_t max_samples, std::uint64_t seed,
         unsigned threads) {
        const auto config = make_config(system, params, std::move(center), radius, time_horizon,
                                         dt, mu, gamma, batch, max_samples, seed, threads);
        BoundingTube tube;
        {
          py::gil_scoped_release release;
          tube = run_gotube(config);
        }
        return tube_to_dict(tube);
      },
      py::arg("system") = "vanderpol", py::arg("params") = std::map<std::string, double>{},
      py::arg("center") = std::nullopt, py::arg("radius") = 0.01, py::arg("time_horizon") = 1.0,
      py::arg("dt") = 0.1, py::arg("mu") = 1.1, py::arg("gamma") = 0.05, py::arg("batch") = 100,
      py::arg("max_samples") = 0, py::arg("seed") = 0, py::arg("threads") = 1,
      "Builds a bounding tube; returns a dict of per-timestep arrays");

  m.def(
      "audit",
      [](const std::string& system, const std::map<std::string, double>& params,
         std::optional<Vector> center, double radius, double time_horizon, double dt, double mu,
         double gamma, std::size_t batch, std::uint64_t seed, std::size_t count,
         std::uint64_t audit_seed, unsigned threads) {
        const auto config = make_config(system, params, std::move(center), radius, time_horizon,
                                        dt, mu, gamma, batch, 0, seed, threads);
        ContainmentReport report;
        {
          py::gil_scoped_release release;
          const auto tube = run_gotube(config);
          Rng rng(audit_seed);
          report = audit_tube(tube, count, rng, threads);
        }
        std::vector<double> rates;
        for (const auto& s : report.steps) rates.push_back(s.violation_rate);
        py::dict d;
        d["violation_rates"] = rates;
        d["max_violation_rate"] = report.max_violation_rate;
        d["trajectories"] = report.trajectories;
        d["excluded"] = report.excluded;
        return d;
      },
      py::arg("system") = "vanderpol", py::arg("params") = std::map<std::string, double>{},
      py::arg("center") = std::nullopt, py::arg("radius") = 0.01, py::arg("time_horizon") = 1.0,
      py::arg("dt") = 0.1, py::arg("mu") = 1.1, py::arg("gamma") = 0.05, py::arg("batch") = 100,
      py::arg("seed") = 0, py::arg("count") = 1000, py::arg("audit_seed") = 1,
      py::arg("threads") = 1, "Builds a tube and checks it against fresh trajectories");
}
