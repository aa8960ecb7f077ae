#include "gotube/dynamics.hpp"

#include "gotube/errors.hpp"

#include <sstream>

namespace gotube {

namespace {

std::string describe(const std::string& system, const Vector& state) {
  std::ostringstream os;
  os.precision(17);
  os << system << " at state (";
  for (Eigen::Index i = 0; i < state.size(); ++i) os << (i ? ", " : "") << state[i];
  os << ")";
  return os.str();
}

void check_state(const std::string& system, int n, const Vector& state) {
  if (state.size() != n) {
    throw ContractViolation(system + ": state has length " + std::to_string(state.size()) +
                            ", expected " + std::to_string(n));
  }
  if (!state.allFinite()) {
    throw IntegrationDomainError("non-finite state for " + describe(system, state));
  }
}

}  // namespace

SystemSpec::SystemSpec(std::string name, int dimension, std::map<std::string, double> parameters,
                       RhsFn rhs, JacobianFn jacobian, Vector default_center,
                       std::optional<CtrnnWeights> weights)
    : name_(std::move(name)),
      dimension_(dimension),
      parameters_(std::move(parameters)),
      rhs_(std::move(rhs)),
      jacobian_(std::move(jacobian)),
      default_center_(std::move(default_center)),
      weights_(std::move(weights)) {
  if (dimension_ < 1) throw ContractViolation(name_ + ": dimension must be >= 1");
  if (default_center_.size() != dimension_) {
    throw ContractViolation(name_ + ": default center has wrong length");
  }
}

Vector SystemSpec::rhs(const Vector& state) const {
  check_state(name_, dimension_, state);
  Vector out(dimension_);
  rhs_(state, out);
  if (!out.allFinite()) throw IntegrationDomainError("non-finite f for " + describe(name_, state));
  return out;
}

Matrix SystemSpec::jacobian(const Vector& state) const {
  check_state(name_, dimension_, state);
  Matrix out(dimension_, dimension_);
  jacobian_(state, out);
  if (!out.allFinite()) throw IntegrationDomainError("non-finite Df for " + describe(name_, state));
  return out;
}

}  // namespace gotube
