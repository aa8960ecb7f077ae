#include <doctest.h>

#include "gotube/dynamics.hpp"
#include "gotube/errors.hpp"
#include "gotube/integrator.hpp"
#include "gotube/oracle.hpp"

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace gotube;

TEST_CASE("linear flow matches the matrix exponential") {
  Matrix a(3, 3);
  a << -0.5, 1.0, 0.0, -1.0, -0.5, 0.2, 0.0, 0.3, -1.0;
  const auto sys = make_linear(a);
  Vector x0(3);
  x0 << 1.0, -2.0, 0.5;
  for (double t : {0.3, 1.0, 2.0}) {
    const auto out = integrate_augmented(sys, x0, 0.0, t);
    const Matrix expm = (a * t).exp();
    CHECK((out.sensitivity - expm).norm() / expm.norm() < 1e-6);
    CHECK((out.state - expm * x0).norm() < 1e-6);
  }
}

TEST_CASE("chained segments equal one long integration") {
  const auto sys = make_vanderpol();
  Vector x0(2);
  x0 << 1.0, 0.5;
  const auto whole = integrate_augmented(sys, x0, 0.0, 2.0);
  auto part = integrate_augmented(sys, x0, 0.0, 0.7);
  part = integrate_augmented(sys, part, 1.3);
  part = integrate_augmented(sys, part, 2.0);
  CHECK(part.time == 2.0);
  CHECK((part.state - whole.state).norm() < 1e-6);
  CHECK((part.sensitivity - whole.sensitivity).norm() < 1e-5);
}

TEST_CASE("zero-length integration is the identity") {
  const auto sys = make_brusselator();
  const Vector x0 = Vector::Ones(2);
  const auto out = integrate_augmented(sys, x0, 1.0, 1.0);
  CHECK(out.state == x0);
  CHECK(out.sensitivity == Matrix::Identity(2, 2));
}

TEST_CASE("sensitivity agrees with finite differences") {
  const auto sys = make_cardiac();
  Vector x0(2);
  x0 << -1.0, 1.0;
  const auto out = integrate_augmented(sys, x0, 0.0, 1.5, {1e-12, 1e-11});
  const Matrix fd = fd_sensitivity(sys, x0, 1.5, 1e-5);
  CHECK((out.sensitivity - fd).norm() / fd.norm() < 1e-6);
}

TEST_CASE("finite-time blowup is reported") {
  // e^{1600} overflows long before t = 2.
  Matrix a = Matrix::Identity(1, 1) * 800.0;
  const auto sys = make_linear(a);
  CHECK_THROWS_AS(integrate_augmented(sys, Vector::Ones(1), 0.0, 2.0), IntegrationBlowupError);
}

TEST_CASE("spectral norm matches the SVD") {
  Rng rng(5);
  std::normal_distribution<double> normal;
  for (int n : {1, 2, 5, 8}) {
    Matrix m(n, n);
    for (int i = 0; i < n * n; ++i) m.data()[i] = normal(rng);
    const double svd = Eigen::JacobiSVD<Matrix>(m).singularValues()[0];
    CHECK(spectral_norm(m) == doctest::Approx(svd).epsilon(1e-7));
  }
  CHECK(spectral_norm(Matrix::Zero(3, 3)) == 0.0);
}
