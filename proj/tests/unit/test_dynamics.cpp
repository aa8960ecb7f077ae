#include <doctest.h>

#include "gotube/dynamics.hpp"
#include "gotube/errors.hpp"
#include "gotube/geometry.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace gotube;

namespace {

// Central differences of the right-hand side, used to check every analytic Jacobian.
Matrix numeric_jacobian(const SystemSpec& sys, const Vector& x) {
  const int n = sys.dimension();
  Matrix j(n, n);
  for (int k = 0; k < n; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    j.col(k) = (sys.rhs(xp) - sys.rhs(xm)) / (2 * h);
  }
  return j;
}

}  // namespace

TEST_CASE("brusselator rhs at (1, 1)") {
  const auto sys = make_brusselator();
  const Vector f = sys.rhs(Vector::Ones(2));
  CHECK(f[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(f[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("van der pol jacobian at the origin") {
  const auto sys = make_vanderpol();
  const Matrix j = sys.jacobian(Vector::Zero(2));
  CHECK(j(0, 0) == 0.0);
  CHECK(j(0, 1) == 1.0);
  CHECK(j(1, 0) == -1.0);
  CHECK(j(1, 1) == 1.0);
}

TEST_CASE("dubins rhs follows the heading") {
  const auto sys = make_dubins(2.0, 0.3);
  Vector x(3);
  x << 0.0, 0.0, M_PI / 2;
  const Vector f = sys.rhs(x);
  CHECK(std::abs(f[0]) < 1e-15);
  CHECK(f[1] == doctest::Approx(2.0));
  CHECK(f[2] == doctest::Approx(0.3));
}

TEST_CASE("analytic jacobians agree with differenced rhs") {
  std::vector<SystemSpec> systems = {make_vanderpol(), make_brusselator(), make_dubins(),
                                     make_cardiac(), make_ctrnn(random_ctrnn_weights(6, 3))};
  Rng rng(11);
  std::normal_distribution<double> normal;
  for (const auto& sys : systems) {
    CAPTURE(sys.name());
    for (int trial = 0; trial < 5; ++trial) {
      Vector x(sys.dimension());
      for (int i = 0; i < x.size(); ++i) x[i] = normal(rng);
      const Matrix diff = sys.jacobian(x) - numeric_jacobian(sys, x);
      CHECK(diff.cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("non-finite state raises a domain error") {
  const auto sys = make_vanderpol();
  Vector x(2);
  x << std::numeric_limits<double>::quiet_NaN(), 0.0;
  CHECK_THROWS_AS(sys.rhs(x), IntegrationDomainError);
  CHECK_THROWS_AS(sys.jacobian(x), IntegrationDomainError);
}

TEST_CASE("ctrnn weights round trip through json") {
  const auto w = random_ctrnn_weights(4, 7);
  const auto back = parse_ctrnn_json(ctrnn_to_json(w));
  CHECK(back.tau == w.tau);
  CHECK(back.w == w.w);
  CHECK(back.b == w.b);
  CHECK(random_ctrnn_weights(4, 7).w == w.w);
  CHECK(random_ctrnn_weights(4, 8).w != w.w);
}

TEST_CASE("malformed weight files name the offending field") {
  auto field_of = [](const std::string& text) {
    try {
      parse_ctrnn_json(text);
    } catch (const WeightFormatError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of(R"({"n":2,"tau":[1,1],"W":[[0,0],[0]],"b":[0,0]})") == "/W/1");
  CHECK(field_of(R"({"n":2,"tau":[1,-1],"W":[[0,0],[0,0]],"b":[0,0]})") == "/tau/1");
  CHECK(field_of(R"({"n":2,"tau":[1,1],"W":[[0,0],[0,0]]})") == "/b");
  CHECK(field_of(R"({"n":2,"tau":[1,1],"W":[[0,0],[0,0]],"b":[0,0],"x":1})") == "/x");
  CHECK(field_of(R"({"n":2,"tau":[1,1],"W":[[0,0],[0,0]],"b":[0,0]})") == "<none>");
}

TEST_CASE("registry lookup and overrides") {
  CHECK(load_system("vanderpol").parameters().at("mu") == 1.0);
  CHECK(load_system("vanderpol", {{"mu", 2.5}}).parameters().at("mu") == 2.5);
  CHECK(load_system("ctrnn", {{"n", 5}}).dimension() == 5);
  CHECK(load_system("linear-test", {{"n", 3}}).dimension() == 3);
  CHECK_THROWS_AS(load_system("no-such-system"), UnknownSystemError);
  CHECK_THROWS_AS(load_system("vanderpol", {{"nope", 1.0}}), UnknownSystemError);
  for (const auto& name : registry_names()) CHECK_NOTHROW(load_system(name));
}

TEST_CASE("weight file paths load as ctrnn systems") {
  const auto path = std::filesystem::temp_directory_path() / "gotube_unit_weights.json";
  {
    std::ofstream out(path);
    out << ctrnn_to_json(random_ctrnn_weights(3, 1));
  }
  const auto sys = load_system(path.string());
  CHECK(sys.dimension() == 3);
  CHECK(sys.weights().has_value());
  std::filesystem::remove(path);
}
