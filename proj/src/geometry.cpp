#include "gotube/geometry.hpp"

#include "gotube/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gotube {

std::vector<Vector> sample_surface(const Ball& ball, std::size_t count, Rng& rng) {
  if (count < 1) throw ContractViolation("sample_surface needs count >= 1");
  if (!(ball.radius > 0.0)) throw ContractViolation("sample_surface needs a positive radius");
  const Eigen::Index n = ball.center.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> points;
  points.reserve(count);
  Vector direction(n);
  while (points.size() < count) {
    for (Eigen::Index i = 0; i < n; ++i) direction[i] = normal(rng);
    const double norm = direction.norm();
    if (!(norm > 0.0)) continue;
    points.emplace_back(ball.center + (ball.radius / norm) * direction);
  }
  return points;
}

double cap_fraction(int dimension, double chord_radius, double sphere_radius) {
  if (dimension < 2) throw ContractViolation("cap_fraction needs dimension >= 2");
  if (!(sphere_radius > 0.0)) throw ContractViolation("cap_fraction needs a positive sphere radius");
  if (!(chord_radius > 0.0)) return 0.0;
  if (chord_radius >= 2.0 * sphere_radius) return 1.0;
  // Colatitude of the cap boundary seen from the sphere center.
  const double phi = 2.0 * std::asin(std::min(chord_radius / (2.0 * sphere_radius), 1.0));
  const double s = std::sin(phi);
  const double half = 0.5 * regularized_incomplete_beta(s * s, 0.5 * (dimension - 1), 0.5);
  return phi <= 0.5 * std::numbers::pi ? half : 1.0 - half;
}

double ball_volume(int dimension, double radius) {
  if (dimension < 1) throw ContractViolation("ball_volume needs dimension >= 1");
  if (radius < 0.0) throw ContractViolation("ball_volume needs radius >= 0");
  const double half = 0.5 * dimension;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0) * std::pow(radius, dimension);
}

}  // namespace gotube
