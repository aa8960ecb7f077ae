#include "gotube/integrator.hpp"

#include "gotube/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gotube {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr long kMaxSteps = 5'000'000;

/// Adaptive DOPRI5 on a flat state vector. `Rhs` is callable as rhs(y, dy).
template <typename Rhs>
void dopri5(Rhs&& rhs, Vector& y, double t0, double t1, const Tolerances& tol,
            const std::string& label) {
  if (t1 == t0) return;
  const Eigen::Index dim = y.size();
  Vector k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), tmp(dim), ynew(dim),
      err(dim);

  auto error_norm = [&](const Vector& e, const Vector& ya, const Vector& yb) {
    const Vector scale =
        (tol.abs + tol.rel * ya.cwiseAbs().cwiseMax(yb.cwiseAbs()).array()).matrix();
    return std::sqrt((e.cwiseQuotient(scale)).squaredNorm() / static_cast<double>(dim));
  };

  auto blowup = [&](double t, const std::string& why) {
    std::ostringstream os;
    os.precision(17);
    os << label << ": integration failed at t=" << t << " (" << why << ")";
    return IntegrationBlowupError(os.str(), t);
  };

  rhs(y, k1);
  if (!k1.allFinite()) throw blowup(t0, "non-finite derivative");

  // Initial step guess (Hairer, Norsett & Wanner II.4).
  const double span = t1 - t0;
  double h;
  {
    const Vector zero = Vector::Zero(dim);
    const double d0 = error_norm(y, y, zero);
    const double d1 = error_norm(k1, y, zero);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    tmp = y + h0 * k1;
    rhs(tmp, k2);
    const double d2 = error_norm(k2 - k1, y, zero) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    h = std::min({100.0 * h0, h1, span});
  }

  double t = t0;
  long steps = 0;
  double previous_error = 1e-4;
  bool last_rejected = false;
  while (t < t1) {
    if (++steps > kMaxSteps) throw blowup(t, "step limit exceeded");
    const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < min_step) throw blowup(t, "step size underflow");
    bool final_step = false;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      final_step = true;
    }

    tmp = y + h * (a21 * k1);
    rhs(tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    rhs(tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(tmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double en = error_norm(err, y, ynew);
    if (!std::isfinite(en) || !ynew.allFinite() || !k7.allFinite()) {
      h *= 0.2;
      last_rejected = true;
      continue;
    }
    if (en <= 1.0) {
      // PI step-size controller.
      const double e = std::max(en, 1e-10);
      double factor = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(previous_error, 0.4 / 5.0);
      factor = std::clamp(factor, 0.2, last_rejected ? 1.0 : 10.0);
      previous_error = e;
      t = final_step ? t1 : t + h;
      y.swap(ynew);
      k1.swap(k7);
      h *= factor;
      last_rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      last_rejected = true;
    }
  }
}

}  // namespace

AugmentedState integrate_augmented(const SystemSpec& system, const Vector& initial, double t_from,
                                   double t_to, const Tolerances& tolerances) {
  const int n = system.dimension();
  if (initial.size() != n) {
    throw ContractViolation(system.name() + ": initial state has length " +
                            std::to_string(initial.size()) + ", expected " + std::to_string(n));
  }
  if (!(t_to >= t_from)) throw ContractViolation("integrate_augmented requires t_to >= t_from");
  if (!initial.allFinite()) throw IntegrationBlowupError(system.name() + ": non-finite initial state", t_from);

  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  Vector y(n + nn);
  y.head(n) = initial;
  Eigen::Map<Matrix>(y.data() + n, n, n).setIdentity();

  Matrix jac(n, n);
  auto rhs = [&](const Vector& in, Vector& out) {
    const auto x = in.head(n);
    system.rhs_into(x, out.head(n));
    system.jacobian_into(x, jac);
    Eigen::Map<Matrix>(out.data() + n, n, n).noalias() =
        jac * Eigen::Map<const Matrix>(in.data() + n, n, n);
  };
  dopri5(rhs, y, t_from, t_to, tolerances, system.name());

  AugmentedState result;
  result.time = t_to;
  result.state = y.head(n);
  result.sensitivity = Eigen::Map<const Matrix>(y.data() + n, n, n);
  return result;
}

AugmentedState integrate_augmented(const SystemSpec& system, const AugmentedState& from,
                                   double t_to, const Tolerances& tolerances) {
  AugmentedState segment = integrate_augmented(system, from.state, from.time, t_to, tolerances);
  segment.sensitivity = segment.sensitivity * from.sensitivity;
  return segment;
}

Vector integrate_state(const SystemSpec& system, const Vector& initial, double t_from, double t_to,
                       const Tolerances& tolerances) {
  const int n = system.dimension();
  if (initial.size() != n) throw ContractViolation(system.name() + ": initial state has wrong length");
  if (!(t_to >= t_from)) throw ContractViolation("integrate_state requires t_to >= t_from");
  Vector y = initial;
  auto rhs = [&](const Vector& in, Vector& out) { system.rhs_into(in, out); };
  dopri5(rhs, y, t_from, t_to, tolerances, system.name());
  return y;
}

double spectral_norm(const Matrix& m, double tolerance, int max_iterations) {
  if (m.size() == 0) return 0.0;
  const Matrix gram = m.transpose() * m;
  Vector v = Vector::Ones(gram.cols()) / std::sqrt(static_cast<double>(gram.cols()));
  // Break the symmetry of the all-ones start so it is not orthogonal to the
  // dominant singular vector in symmetric cases.
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += 1e-3 * static_cast<double>(i + 1);
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector w = gram * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - estimate) <= tolerance * std::abs(next)) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  // Rayleigh quotient of the final iterate.
  estimate = std::max(estimate, v.dot(gram * v));
  return std::sqrt(std::max(estimate, 0.0));
}

}  // namespace gotube
