#include <doctest.h>

#include "gotube/errors.hpp"
#include "gotube/extremes.hpp"

#include <algorithm>
#include <cmath>

using namespace gotube;

namespace {

std::vector<double> gumbel_draws(std::size_t n, double loc, double scale, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = loc - scale * std::log(-std::log(u(rng)));
  return out;
}

// Supremum of F_L - F_n over the real line: F_L is increasing, so it is
// enough to compare against the left limits at the jump points and 1 at +inf.
double dominance_gap(const StochasticLowerBound& bound, const EmpiricalCdf& ecdf) {
  double gap = bound.cdf(1e300) - 1.0;
  const auto xs = ecdf.sorted();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    gap = std::max(gap, bound.cdf(std::nextafter(xs[i], -1e300)) - ecdf.left_limit(xs[i]));
  }
  return gap;
}

}  // namespace

TEST_CASE("dkw epsilon frozen values") {
  CHECK(dkw_epsilon(100, 0.05) == doctest::Approx(0.122387).epsilon(1e-6));
  CHECK(dkw_epsilon(2, 0.5) == doctest::Approx(0.416277).epsilon(1e-6));
  // alpha is capped at one half
  CHECK(dkw_epsilon(2, 0.9) == dkw_epsilon(2, 0.5));
}

TEST_CASE("empirical cdf steps") {
  const EmpiricalCdf f({3.0, 1.0, 2.0, 2.0});
  CHECK(f(0.5) == 0.0);
  CHECK(f(1.0) == 0.25);
  CHECK(f.left_limit(2.0) == 0.25);
  CHECK(f(2.0) == 0.75);
  CHECK(f(10.0) == 1.0);
}

TEST_CASE("gev cdf and quantile are inverse") {
  for (double shape : {-0.8, -0.2, 0.0, 1e-8, 0.3, 0.8}) {
    const GevParams g{1.5, 0.7, shape};
    for (double p : {0.01, 0.3, 0.5, 0.9, 0.999}) {
      CHECK(g.cdf(g.quantile(p)) == doctest::Approx(p).epsilon(1e-10));
    }
  }
  const GevParams gumbel{0.0, 1.0, 0.0};
  CHECK(gumbel.cdf(0.0) == doctest::Approx(std::exp(-1.0)));
  // bounded support above for negative shape
  const GevParams weibull{0.0, 1.0, -0.5};
  CHECK(weibull.cdf(2.0) == 1.0);
  CHECK(weibull.cdf(2.5) == 1.0);
}

TEST_CASE("ks_minus of a single point under Gumbel") {
  const EmpiricalCdf f({0.0});
  CHECK(ks_minus(GevParams{0.0, 1.0, 0.0}, f) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("ks_minus is floored at zero") {
  // A GEV far to the right of all data never exceeds the empirical CDF.
  const EmpiricalCdf f({0.0, 0.1, 0.2});
  CHECK(ks_minus(GevParams{100.0, 1.0, 0.0}, f) == 0.0);
}

TEST_CASE("likelihood fit recovers Gumbel parameters") {
  Rng rng(3);
  const auto xs = gumbel_draws(5000, 2.0, 0.5, rng);
  const auto g = fit_gev(xs);
  CHECK(g.location == doctest::Approx(2.0).epsilon(0.02));
  CHECK(g.scale == doctest::Approx(0.5).epsilon(0.05));
  CHECK(std::abs(g.shape) < 0.05);
}

TEST_CASE("fit is equivariant under affine maps") {
  Rng rng(4);
  const auto xs = gumbel_draws(400, 0.0, 1.0, rng);
  std::vector<double> ys(xs.size());
  std::transform(xs.begin(), xs.end(), ys.begin(), [](double x) { return 3.0 * x + 7.0; });
  const auto a = fit_gev(xs);
  const auto b = fit_gev(ys);
  CHECK(b.location == doctest::Approx(3.0 * a.location + 7.0).epsilon(1e-5));
  CHECK(b.scale == doctest::Approx(3.0 * a.scale).epsilon(1e-5));
  CHECK(b.shape == doctest::Approx(a.shape).epsilon(1e-5));
}

TEST_CASE("fit rejects degenerate and short samples") {
  CHECK_THROWS_AS(fit_gev(std::vector<double>(50, 1.25)), DegenerateSampleError);
  CHECK_THROWS_AS(fit_gev(std::vector<double>(5, 1.0)), InsufficientSamplesError);
}

TEST_CASE("lower bound never exceeds the empirical cdf") {
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> xs(60);
    // mix of shapes: Gumbel, uniform, and arcsine-like bounded samples
    for (auto& v : xs) {
      const double w = u(rng);
      v = rep % 3 == 0 ? -std::log(-std::log(w)) : rep % 3 == 1 ? w : std::sin(M_PI * w / 2);
    }
    const EmpiricalCdf ecdf(xs);
    const auto ml = build_lower_bound(xs, 0.05);
    CHECK(dominance_gap(ml, ecdf) <= 1e-12);
    const auto cert = certify_quantile(xs, 0.05, 0.9);
    CHECK(dominance_gap(cert.bound, ecdf) <= 1e-12);
  }
}

TEST_CASE("certified quantile is unbounded when the level is out of reach") {
  Rng rng(9);
  const auto xs = gumbel_draws(30, 0.0, 1.0, rng);
  const auto bound = build_lower_bound(xs, 0.05);
  // epsilon(30, 0.05) is about 0.22, so q = 0.9 cannot be certified.
  CHECK_FALSE(lower_bound_quantile(bound, 0.9).has_value());
  CHECK(lower_bound_quantile(bound, 0.3).has_value());
}

TEST_CASE("certified quantile dominates the true quantile for Gumbel data") {
  Rng rng(10);
  int below = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto xs = gumbel_draws(400, 0.0, 1.0, rng);
    const auto cert = certify_quantile(xs, 0.05, 0.8);
    REQUIRE(cert.quantile.has_value());
    const double truth = -std::log(-std::log(0.8));
    if (*cert.quantile < truth) ++below;
  }
  CHECK(below <= 5);
}

TEST_CASE("max quotients") {
  std::vector<Vector> pos = {Vector::Zero(1), Vector::Ones(1), Vector::Constant(1, 3.0)};
  std::vector<double> lam = {0.0, 2.0, 2.0};
  Rng rng(2);
  const auto q = sample_max_quotients(pos, lam, 50, 40, rng);
  REQUIRE(q.size() == 40);
  for (double v : q) {
    CHECK(v <= 2.0 + 1e-15);
    CHECK(v >= 0.0);
  }
  // 50 pairs virtually always include the steepest pair (0, 1).
  CHECK(*std::max_element(q.begin(), q.end()) == 2.0);

  std::vector<Vector> same = {Vector::Zero(2), Vector::Zero(2)};
  std::vector<double> lam2 = {1.0, 2.0};
  CHECK_THROWS_AS(sample_max_quotients(same, lam2, 5, 5, rng), InsufficientSamplesError);
}
