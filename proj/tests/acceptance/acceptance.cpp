// One line per acceptance criterion: "[PASS|FAIL] <n> <name>: <detail>".
// Usage: gotube_acceptance [criterion numbers...]   (default: all)

#include "gotube/artifacts.hpp"
#include "gotube/commands.hpp"
#include "gotube/engine.hpp"
#include "gotube/extremes.hpp"
#include "gotube/oracle.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>

using namespace gotube;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

unsigned workers() { return default_threads(); }

GoTubeConfig make_config(SystemSpec sys, Vector center, double radius, double horizon, double dt,
                         double mu, double gamma, std::size_t batch, std::uint64_t seed) {
  GoTubeConfig c;
  c.system = std::make_shared<const SystemSpec>(std::move(sys));
  c.center = std::move(center);
  c.radius = radius;
  c.times = uniform_grid(horizon, dt);
  c.mu = mu;
  c.gamma = gamma;
  c.batch = batch;
  c.seed = seed;
  c.threads = workers();
  return c;
}

Outcome tightness() {
  std::size_t balls = 0, samples = 0;
  double slowest = 0.0;
  bool ok = true;
  std::vector<GoTubeConfig> configs = {
      make_config(make_vanderpol(), Vector::Constant(2, 1.0), 0.05, 2.0, 0.1, 1.1, 0.05, 100, 1),
      make_config(make_cardiac(), make_cardiac().default_center(), 0.05, 1.0, 0.1, 1.2, 0.1, 50, 2),
      make_config(make_dubins(), Vector::Zero(3), 0.01, 1.0, 0.1, 1.1, 0.01, 100, 3)};
  for (const auto& c : configs) {
    run_gotube(c, [&](const BoundingBall& ball, std::span<const SampleRecord> recs) {
      const auto t0 = std::chrono::steady_clock::now();
      double m = 0.0;
      for (const auto& r : recs) m = std::max(m, r.distance);
      ok = ok && ball.radius == c.mu * m && ball.max_distance == m;
      for (const auto& r : recs) ok = ok && r.distance <= ball.radius;
      ++balls;
      samples += recs.size();
      slowest = std::max(
          slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    });
  }
  std::ostringstream d;
  d << balls << " balls, " << samples << " sample-distances checked, slowest check " << slowest
    << " s";
  return {ok && slowest < 1.0, d.str()};
}

Outcome linear_conservativeness() {
  const double delta0 = 0.1;
  int failures = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    auto c = make_config(load_system("linear-test"), Vector::Zero(2), delta0, 1.0, 0.05, 1.05, 0.2,
                         100, 1000 + run);
    const auto tube = run_gotube(c);
    bool held = true;
    for (const auto& ball : tube.balls) {
      held = held && ball.radius >= delta0 * std::exp(-ball.time);
    }
    if (!held) ++failures;
  }
  std::ostringstream d;
  d << failures << " of 100 runs failed (limit 32)";
  return {failures <= 32, d.str()};
}

Outcome brusselator_containment() {
  auto c = make_config(make_brusselator(), Vector::Ones(2), 0.05, 5.0, 0.05, 1.1, 0.1, 500, 1);
  const auto tube = run_gotube(c);
  Rng rng(20240601);
  const auto report = audit_tube(tube, 100000, rng, workers());
  std::ostringstream d;
  d << "max violation rate " << report.max_violation_rate << " over " << report.steps.size()
    << " steps, " << report.trajectories << " trajectories, tube built in "
    << tube.runtime_seconds << " s";
  return {report.max_violation_rate <= 0.01 && report.excluded == 0, d.str()};
}

Outcome sensitivities() {
  double worst_fd = 0.0, worst_expm = 0.0;
  std::vector<SystemSpec> systems = {make_vanderpol(), make_brusselator(), make_dubins(),
                                     make_ctrnn(random_ctrnn_weights(8, 17))};
  Rng rng(5);
  std::normal_distribution<double> normal(0.0, 0.5);
  for (const auto& sys : systems) {
    for (double t : {0.5, 1.0, 2.0}) {
      Vector x = sys.default_center();
      for (int i = 0; i < x.size(); ++i) x[i] += normal(rng);
      const Matrix s = integrate_augmented(sys, x, 0.0, t).sensitivity;
      const Matrix fd = fd_sensitivity(sys, x, t, 1e-5);
      worst_fd = std::max(worst_fd, (s - fd).norm() / fd.norm());
    }
  }
  for (double rate : {0.5, 1.0, 3.0}) {
    const auto sys = load_system("linear-test", {{"n", 3}, {"rate", rate}});
    Matrix a = -rate * Matrix::Identity(3, 3);
    for (double t : {0.5, 1.0, 2.0}) {
      const Matrix s = integrate_augmented(sys, Vector::Ones(3), 0.0, t).sensitivity;
      const Matrix e = (a * t).exp();
      worst_expm = std::max(worst_expm, (s - e).norm() / e.norm());
    }
  }
  // A non-normal linear system exercises the off-diagonal terms as well.
  Matrix a(3, 3);
  a << -0.3, 2.0, 0.0, -1.0, -0.2, 0.5, 0.1, 0.0, -0.7;
  const auto sys = make_linear(a);
  for (double t : {0.5, 1.0, 2.0}) {
    const Matrix s = integrate_augmented(sys, Vector::Ones(3), 0.0, t).sensitivity;
    const Matrix e = (a * t).exp();
    worst_expm = std::max(worst_expm, (s - e).norm() / e.norm());
  }
  std::ostringstream d;
  d << "worst relative error vs finite differences " << worst_fd << ", vs expm " << worst_expm;
  return {worst_fd <= 1e-4 && worst_expm <= 1e-6, d.str()};
}

Outcome cap_geometry() {
  const std::size_t draws = 1000000;
  double worst_z = 0.0, worst_half = 0.0;
  Rng rng(77);
  for (int n : {2, 5, 10}) {
    Ball unit{Vector::Zero(n), 1.0};
    Vector pole = Vector::Zero(n);
    pole[0] = 1.0;
    const auto pts = sample_surface(unit, draws, rng);
    for (double r : {0.3, 0.7, 1.0, 1.4}) {
      std::size_t hits = 0;
      for (const auto& p : pts) hits += (p - pole).norm() <= r;
      const double p = cap_fraction(n, r, 1.0);
      const double se = std::sqrt(std::max(p * (1 - p), 1e-300) / draws);
      worst_z = std::max(worst_z, std::abs(static_cast<double>(hits) / draws - p) / se);
    }
    worst_half = std::max(worst_half, std::abs(cap_fraction(n, std::sqrt(2.0), 1.0) - 0.5));
  }
  for (int n : {3, 4, 20, 50}) {
    worst_half = std::max(worst_half, std::abs(cap_fraction(n, std::sqrt(2.0) * 3, 3.0) - 0.5));
  }
  std::ostringstream d;
  d << "worst |z| " << worst_z << ", worst hemisphere error " << worst_half;
  return {worst_z <= 3.0 && worst_half <= 1e-12, d.str()};
}

Outcome cap_radius() {
  Rng rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double lambda = std::exp(8 * u(rng) - 4);
    const double dl = std::exp(8 * u(rng) - 4);
    const double slack = std::exp(8 * u(rng) - 4);
    const double r = compute_cap_radius(lambda, dl, slack);
    worst = std::max(worst, std::abs(dl * r * r + lambda * r - slack) / slack);
  }
  const bool zero = compute_cap_radius(1.3, 0.4, 0.0) == 0.0;
  const bool linear = compute_cap_radius(2.0, 0.0, 3.0) == 1.5;
  std::ostringstream d;
  d << "worst relative residual " << worst;
  return {worst <= 1e-9 && zero && linear, d.str()};
}

Outcome lower_bound_suite() {
  // (a) dominance over the empirical CDF for every fit
  Rng rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_dom = -1.0;
  auto gap = [](const StochasticLowerBound& b, const EmpiricalCdf& f) {
    double g = b.cdf(1e300) - 1.0;
    for (double x : f.sorted()) g = std::max(g, b.cdf(std::nextafter(x, -1e300)) - f.left_limit(x));
    return g;
  };
  for (int rep = 0; rep < 60; ++rep) {
    std::vector<double> xs(100);
    for (auto& v : xs) {
      const double w = u(rng);
      v = rep % 3 == 0 ? -std::log(-std::log(w)) : rep % 3 == 1 ? std::pow(w, 3.0)
                                                                 : std::sin(M_PI * w / 2);
    }
    const EmpiricalCdf f(xs);
    worst_dom = std::max(worst_dom, gap(build_lower_bound(xs, 0.05), f));
    worst_dom = std::max(worst_dom, gap(certify_quantile(xs, 0.05, 0.9).bound, f));
  }
  // (b) frozen DKW value
  const double eps = dkw_epsilon(100, 0.05);
  // (c) coverage against the true Gumbel CDF
  int held = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> xs(100);
    for (auto& v : xs) v = -std::log(-std::log(u(rng)));
    const auto bound = build_lower_bound(xs, 0.05);
    double sup = -1.0;
    for (int k = 0; k <= 40000; ++k) {
      const double x = -6.0 + 26.0 * k / 40000.0;
      sup = std::max(sup, bound.cdf(x) - std::exp(-std::exp(-x)));
    }
    if (sup <= 0.0) ++held;
  }
  std::ostringstream d;
  d << "worst F_L - F_n " << worst_dom << "; dkw(100, 0.05) = " << eps << "; coverage held in "
    << held << "/200";
  return {worst_dom <= 0.0 && std::abs(eps - 0.122387) <= 1e-6 && held >= 180, d.str()};
}

Outcome long_horizon() {
  auto c = make_config(make_dubins(), Vector::Zero(3), 0.01, 40.0, 0.5, 1.1, 0.01, 100, 1);
  try {
    const auto tube = run_gotube(c);
    bool finite = true;
    double mx = 0.0;
    for (const auto& b : tube.balls) {
      finite = finite && std::isfinite(b.radius);
      mx = std::max(mx, b.radius);
    }
    std::ostringstream d;
    d << tube.balls.size() << " balls, max radius " << mx << ", " << tube.runtime_seconds << " s";
    return {finite && tube.balls.size() == c.times.size() - 1, d.str()};
  } catch (const BudgetExceededError& e) {
    return {false, std::string("budget exceeded: ") + e.what()};
  }
}

Outcome pareto() {
  const auto weights = random_ctrnn_weights(8, 2024);
  std::vector<double> volumes;
  std::vector<std::size_t> counts;
  std::ostringstream d;
  for (double mu : {1.5, 1.2, 1.1, 1.05}) {
    auto c = make_config(make_ctrnn(weights), Vector::Zero(8), 0.05, 2.0, 0.5, mu, 0.2, 100, 7);
    c.max_samples = 200000;
    try {
      const auto tube = run_gotube(c);
      volumes.push_back(tube_metrics(tube).average_volume);
      std::size_t n = 0;
      for (const auto& b : tube.balls) n = std::max(n, b.samples);
      counts.push_back(n);
      d << "mu " << mu << ": vol " << volumes.back() << ", samples " << n << "; ";
    } catch (const BudgetExceededError& e) {
      d << "mu " << mu << ": " << e.what();
      return {false, d.str()};
    }
  }
  bool ok = true;
  for (std::size_t i = 1; i < volumes.size(); ++i) {
    ok = ok && volumes[i] <= volumes[i - 1] && counts[i] >= counts[i - 1];
  }
  return {ok, d.str()};
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "gotube_acceptance_det";
  fs::remove_all(root);
  RunOptions o;
  o.system = "brusselator";
  o.radius = 0.05;
  o.time_horizon = 1.0;
  o.dt = 0.1;
  o.seed = 42;
  o.threads = workers();
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    o.out_dir = (root / std::to_string(i)).string();
    if (cmd_run(o) != kExitOk) return {false, "run failed"};
    csv[i] = read_text_file((root / std::to_string(i) / "tube.csv").string());
  }
  // Re-derive the metrics from the CSV alone.
  const auto rows = parse_tube_csv(csv[0]);
  const auto metrics = nlohmann::json::parse(read_text_file((root / "0" / "metrics.json").string()));
  const int n = static_cast<int>(rows.front().center.size());
  double sum = 0.0, mx = 0.0;
  bool series = metrics["radii"].size() == rows.size();
  for (std::size_t i = 0; i < rows.size() && series; ++i) {
    sum += ball_volume(n, rows[i].radius);
    mx = std::max(mx, rows[i].radius);
    series = metrics["radii"][i].get<double>() == rows[i].radius &&
             metrics["times"][i].get<double>() == rows[i].time;
  }
  const double avg = sum / rows.size();
  const bool consistent = series && metrics["max_radius"].get<double>() == mx &&
                          std::abs(metrics["average_volume"].get<double>() - avg) <= 1e-12 * avg &&
                          metrics["dimension"].get<int>() == n;
  std::ostringstream d;
  d << "byte-identical " << (csv[0] == csv[1]) << ", metrics consistent " << consistent;
  fs::remove_all(root);
  return {csv[0] == csv[1] && consistent, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    double seconds;  // wall-clock budget
  };
  // The tightness check is timed per ball inside the criterion itself.
  const std::vector<Criterion> criteria = {
      {"tightness identity", tightness, 600},
      {"linear-decay conservativeness", linear_conservativeness, 300},
      {"brusselator containment", brusselator_containment, 600},
      {"sensitivity correctness", sensitivities, 60},
      {"cap geometry", cap_geometry, 120},
      {"cap radius equation", cap_radius, 1},
      {"lower-bound suite", lower_bound_suite, 180},
      {"long-horizon dubins", long_horizon, 3600},
      {"runtime-tightness trade-off", pareto, 1800},
      {"determinism and artifacts", determinism, 60},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > criteria[i].seconds) out.pass = false;
    std::cout << (out.pass ? "[PASS] " : "[FAIL] ") << id << " " << criteria[i].name << ": "
              << out.detail << " (" << secs << " s, budget " << criteria[i].seconds << " s)"
              << std::endl;
    failed += !out.pass;
  }
  return failed == 0 ? 0 : 1;
}
