#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <cstdint>
#include <string>
#include <vector>

namespace gotube {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Continuous-time RNN parameters for x' = -x/tau + W tanh(x) + b.
struct CtrnnWeights {
  Vector tau;
  Matrix w;
  Vector b;
};

/// An autonomous ODE x' = f(x) together with its analytic Jacobian.
///
/// Instances are immutable once built and may be shared freely between
/// threads. The raw evaluators skip finiteness checks and are what the
/// integrator calls in its inner loop; `rhs()` and `jacobian()` validate.
class SystemSpec {
 public:
  using RhsFn = std::function<void(const Eigen::Ref<const Vector>&, Eigen::Ref<Vector>)>;
  using JacobianFn = std::function<void(const Eigen::Ref<const Vector>&, Eigen::Ref<Matrix>)>;

  SystemSpec(std::string name, int dimension, std::map<std::string, double> parameters,
             RhsFn rhs, JacobianFn jacobian, Vector default_center,
             std::optional<CtrnnWeights> weights = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  int dimension() const noexcept { return dimension_; }
  const std::map<std::string, double>& parameters() const noexcept { return parameters_; }
  const std::optional<CtrnnWeights>& weights() const noexcept { return weights_; }
  const Vector& default_center() const noexcept { return default_center_; }

  /// f(state). Throws IntegrationDomainError on non-finite input or output.
  Vector rhs(const Vector& state) const;
  /// Df(state). Throws IntegrationDomainError on non-finite entries.
  Matrix jacobian(const Vector& state) const;

  void rhs_into(const Eigen::Ref<const Vector>& state, Eigen::Ref<Vector> out) const {
    rhs_(state, out);
  }
  void jacobian_into(const Eigen::Ref<const Vector>& state, Eigen::Ref<Matrix> out) const {
    jacobian_(state, out);
  }

 private:
  std::string name_;
  int dimension_;
  std::map<std::string, double> parameters_;
  RhsFn rhs_;
  JacobianFn jacobian_;
  Vector default_center_;
  std::optional<CtrnnWeights> weights_;
};

using SystemPtr = std::shared_ptr<const SystemSpec>;

// Benchmark factories. Parameter values are the usual textbook settings and
// can be overridden through `load_system`.
SystemSpec make_vanderpol(double mu = 1.0);
SystemSpec make_brusselator(double a = 1.0, double b = 1.5);
/// Dubins car (x, y, heading) at speed v with constant steering rate u.
SystemSpec make_dubins(double v = 1.0, double u = 0.5);
/// FitzHugh-Nagumo cardiac cell: v' = v - v^3/3 - w + I, w' = eps (v + a - b w).
SystemSpec make_cardiac(double a = 0.7, double b = 0.8, double eps = 0.08, double current = 0.5);
SystemSpec make_ctrnn(CtrnnWeights weights);
/// x' = A x.
SystemSpec make_linear(const Matrix& a);
/// x' = 0 in `dimension` dimensions.
SystemSpec make_zero(int dimension);

/// Validates shapes and tau > 0; throws WeightFormatError.
void validate_ctrnn(const CtrnnWeights& weights);
/// Parses the CT-RNN JSON weight schema {"n", "tau", "W", "b"}.
CtrnnWeights parse_ctrnn_json(const std::string& text);
CtrnnWeights load_ctrnn_file(const std::string& path);
std::string ctrnn_to_json(const CtrnnWeights& weights);
/// Seeded random CT-RNN: tau in [0.5, 2], W ~ N(0, scale^2 / n), b ~ N(0, 0.1^2).
CtrnnWeights random_ctrnn_weights(int n, std::uint64_t seed, double scale = 1.0);

/// Registry names accepted by `load_system`.
const std::vector<std::string>& registry_names();

/// Looks up a registry name, or reads a CT-RNN weight file when `source`
/// names an existing file. `overrides` replaces named scalar parameters.
/// Throws UnknownSystemError for unknown names or parameters.
SystemSpec load_system(const std::string& source,
                       const std::map<std::string, double>& overrides = {});

}  // namespace gotube
