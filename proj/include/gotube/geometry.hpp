#pragma once

#include "gotube/dynamics.hpp"

#include <cstddef>
#include <random>
#include <vector>

namespace gotube {

using Rng = std::mt19937_64;

struct Ball {
  Vector center;
  double radius = 0.0;
};

/// `count` points uniformly distributed on the sphere bounding `ball`.
std::vector<Vector> sample_surface(const Ball& ball, std::size_t count, Rng& rng);

/// Fraction of the (n-1)-sphere of radius `sphere_radius` lying within
/// Euclidean distance `chord_radius` of a point on the sphere.
double cap_fraction(int dimension, double chord_radius, double sphere_radius);

/// Volume of the n-ball of radius r.
double ball_volume(int dimension, double radius);

/// Regularized incomplete beta I_x(a, b) by continued fraction (Lentz).
double regularized_incomplete_beta(double x, double a, double b);

}  // namespace gotube
