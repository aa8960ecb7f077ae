#pragma once

#include "gotube/dynamics.hpp"

namespace gotube {

struct Tolerances {
  double abs = 1e-9;
  double rel = 1e-7;

  Tolerances tightened(double factor) const { return {abs / factor, rel / factor}; }
};

/// Flow value chi(t, x) together with the sensitivity d chi / dx.
struct AugmentedState {
  double time = 0.0;
  Vector state;
  Matrix sensitivity;
};

/// Integrates x' = f(x), S' = Df(x) S with S(t_from) = I using adaptive
/// Dormand-Prince 5(4). Throws IntegrationBlowupError on step-size underflow
/// or non-finite values.
AugmentedState integrate_augmented(const SystemSpec& system, const Vector& initial, double t_from,
                                   double t_to, const Tolerances& tolerances = {});

/// Continues an augmented trajectory to `t_to`. The segment's sensitivity is
/// integrated from the identity and chained onto `from.sensitivity`.
AugmentedState integrate_augmented(const SystemSpec& system, const AugmentedState& from,
                                   double t_to, const Tolerances& tolerances = {});

/// State-only integration (no sensitivity).
Vector integrate_state(const SystemSpec& system, const Vector& initial, double t_from, double t_to,
                       const Tolerances& tolerances = {});

/// Largest singular value by power iteration on S^T S.
double spectral_norm(const Matrix& m, double tolerance = 1e-8, int max_iterations = 200);

}  // namespace gotube
