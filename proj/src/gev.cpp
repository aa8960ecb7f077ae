#include "gotube/errors.hpp"
#include "gotube/extremes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace gotube {

namespace {

constexpr double kGumbelThreshold = 1e-6;
constexpr double kShapeBound = 0.9;
constexpr double kEcdfShapeMin = -4.0;
constexpr double kEulerGamma = 0.5772156649015329;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double GevParams::cdf(double x) const {
  const double y = (x - location) / scale;
  if (std::abs(shape) < 1e-12) return std::exp(-std::exp(-y));
  const double z = 1.0 + shape * y;
  if (z <= 0.0) return shape > 0.0 ? 0.0 : 1.0;
  // log1p keeps the near-Gumbel regime accurate
  return std::exp(-std::exp(-std::log1p(shape * y) / shape));
}

double GevParams::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw ContractViolation("GEV quantile needs p in (0, 1)");
  const double y = -std::log(p);
  if (std::abs(shape) < 1e-12) return location - scale * std::log(y);
  return location + scale * std::expm1(-shape * std::log(y)) / shape;
}

double GevParams::log_pdf(double x) const {
  const double y = (x - location) / scale;
  if (std::abs(shape) < 1e-12) return -std::log(scale) - y - std::exp(-y);
  const double z = 1.0 + shape * y;
  if (z <= 0.0) return -kInf;
  const double lz = std::log1p(shape * y);
  return -std::log(scale) - (1.0 + 1.0 / shape) * lz - std::exp(-lz / shape);
}

namespace {

// Negative log-likelihood over (location, log scale, eta) with
// shape = kShapeBound * tanh(eta), so the shape box is enforced smoothly.
struct Objective {
  std::span<const double> data;

  double operator()(const std::array<double, 3>& p, std::array<double, 3>* grad) const {
    const double mu = p[0];
    const double sigma = std::exp(p[1]);
    const double th = std::tanh(p[2]);
    const double xi = kShapeBound * th;
    const double n = static_cast<double>(data.size());
    double f = n * p[1];
    double g_mu = 0.0, g_ls = n, g_xi = 0.0;
    if (std::abs(xi) < kGumbelThreshold) {
      // First-order expansion around the Gumbel limit.
      for (double x : data) {
        const double y = (x - mu) / sigma;
        const double ey = std::exp(-y);
        const double dxi = y - 0.5 * y * y * (1.0 - ey);
        f += y + ey + xi * dxi;
        g_mu += (ey - 1.0) / sigma;
        g_ls += y * (ey - 1.0);
        g_xi += dxi;
      }
    } else {
      for (double x : data) {
        const double y = (x - mu) / sigma;
        const double z = 1.0 + xi * y;
        if (!(z > 0.0)) return kInf;
        const double lz = std::log(z);
        const double t = std::exp(-lz / xi);
        f += (1.0 + 1.0 / xi) * lz + t;
        const double common = (t - 1.0 - xi) / z;
        g_mu += common / sigma;
        g_ls += y * common;
        g_xi += lz / (xi * xi) * (t - 1.0) + y * (1.0 + 1.0 / xi - t / xi) / z;
      }
    }
    if (!std::isfinite(f)) return kInf;
    if (grad) {
      (*grad)[0] = g_mu;
      (*grad)[1] = g_ls;
      (*grad)[2] = g_xi * kShapeBound * (1.0 - th * th);
    }
    return f;
  }
};

GevParams pwm_estimate(std::span<const double> sorted) {
  const double n = static_cast<double>(sorted.size());
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double r = static_cast<double>(i);
    b0 += sorted[i];
    b1 += r / (n - 1.0) * sorted[i];
    b2 += r * (r - 1.0) / ((n - 1.0) * (n - 2.0)) * sorted[i];
  }
  b0 /= n;
  b1 /= n;
  b2 /= n;
  const double c = (2.0 * b1 - b0) / (3.0 * b2 - b0) - std::log(2.0) / std::log(3.0);
  const double k = 7.8590 * c + 2.9554 * c * c;
  GevParams g;
  if (!std::isfinite(k) || std::abs(k) < 1e-6) {
    g.scale = (2.0 * b1 - b0) / std::log(2.0);
    g.location = b0 - kEulerGamma * g.scale;
    g.shape = 0.0;
  } else {
    const double gk = std::tgamma(1.0 + k);
    g.scale = (2.0 * b1 - b0) * k / (gk * (1.0 - std::pow(2.0, -k)));
    g.location = b0 + g.scale * (gk - 1.0) / k;
    g.shape = -k;
  }
  return g;
}

std::array<double, 3> to_internal(const GevParams& g) {
  const double xi = std::clamp(g.shape, -0.85, 0.85);
  return {g.location, std::log(g.scale), std::atanh(xi / kShapeBound)};
}

std::array<double, 3> bfgs(const Objective& objective, std::array<double, 3> x) {
  using Vec3 = Eigen::Vector3d;
  std::array<double, 3> g{};
  double f = objective(x, &g);
  Eigen::Matrix3d h_inv = Eigen::Matrix3d::Identity() / std::max(1.0, static_cast<double>(objective.data.size()));
  const double gtol = 1e-10 * static_cast<double>(objective.data.size());
  int stalled = 0;
  for (int iter = 0; iter < 500; ++iter) {
    const Vec3 gv(g[0], g[1], g[2]);
    if (gv.cwiseAbs().maxCoeff() <= gtol) break;
    Vec3 dir = -h_inv * gv;
    if (dir.dot(gv) >= 0.0) {
      h_inv = Eigen::Matrix3d::Identity() / std::max(1.0, static_cast<double>(objective.data.size()));
      dir = -h_inv * gv;
    }
    double step = 1.0;
    std::array<double, 3> x_new{}, g_new{};
    double f_new = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < 3; ++i) x_new[i] = x[i] + step * dir[i];
      f_new = objective(x_new, &g_new);
      if (f_new <= f + 1e-4 * step * dir.dot(gv)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Vec3 s(x_new[0] - x[0], x_new[1] - x[1], x_new[2] - x[2]);
    const Vec3 y(g_new[0] - g[0], g_new[1] - g[1], g_new[2] - g[2]);
    const double sy = s.dot(y);
    const double f_old = f;
    x = x_new;
    g = g_new;
    f = f_new;
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix3d i3 = Eigen::Matrix3d::Identity();
      h_inv = (i3 - rho * s * y.transpose()) * h_inv * (i3 - rho * y * s.transpose()) +
              rho * s * s.transpose();
    }
    // Bounded-support data drive the shape onto its clip, where tanh flattens
    // the gradient without ever meeting gtol; stop once progress stalls.
    if (std::abs(f_old - f) <= 1e-12 * (1.0 + std::abs(f))) {
      if (++stalled >= 3) break;
    } else {
      stalled = 0;
    }
  }
  return x;
}

struct Standardized {
  std::vector<double> sorted;
  double mean = 0.0;
  double sd = 1.0;
};

Standardized standardize(std::span<const double> samples) {
  if (samples.size() < 20) throw InsufficientSamplesError("GEV fit needs at least 20 samples");
  for (double v : samples) {
    if (!std::isfinite(v)) throw ContractViolation("GEV fit needs finite samples");
  }
  const double n = static_cast<double>(samples.size());
  Standardized st;
  st.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - st.mean) * (v - st.mean);
  st.sd = std::sqrt(ss / (n - 1.0));
  if (!(st.sd > 1e-13 * std::abs(st.mean)) || !(st.sd > 0.0)) {
    throw DegenerateSampleError("GEV fit: samples have zero variance");
  }
  st.sorted.resize(samples.size());
  std::transform(samples.begin(), samples.end(), st.sorted.begin(),
                 [&](double v) { return (v - st.mean) / st.sd; });
  std::sort(st.sorted.begin(), st.sorted.end());
  return st;
}

GevParams fit_standardized_ml(const std::vector<double>& z) {
  const Objective objective{z};
  std::array<double, 3> start = to_internal(pwm_estimate(z));
  if (!std::isfinite(objective(start, nullptr))) {
    GevParams gumbel;
    gumbel.scale = std::sqrt(6.0) / std::numbers::pi;
    gumbel.location = -kEulerGamma * gumbel.scale;
    start = to_internal(gumbel);
  }
  const auto best = bfgs(objective, start);
  return {best[0], std::exp(best[1]), kShapeBound * std::tanh(best[2])};
}

GevParams unstandardize(const GevParams& g, const Standardized& st) {
  return {st.mean + st.sd * g.location, st.sd * g.scale, g.shape};
}

// sup_x |G(x) - F_n(x)| over a sorted sample.
double ks_two_sided(const GevParams& g, const std::vector<double>& sorted) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double c = g.cdf(sorted[i]);
    d = std::max({d, c - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - c});
  }
  return d;
}

template <typename F>
std::array<double, 3> nelder_mead(F&& f, std::array<double, 3> start, double initial_step,
                                  int max_evaluations) {
  std::array<std::array<double, 3>, 4> simplex;
  std::array<double, 4> values;
  simplex[0] = start;
  for (int i = 0; i < 3; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1][i] += initial_step;
  }
  int evaluations = 0;
  auto eval = [&](const std::array<double, 3>& p) {
    ++evaluations;
    return f(p);
  };
  for (int i = 0; i < 4; ++i) values[i] = eval(simplex[i]);
  auto lerp = [](const std::array<double, 3>& a, const std::array<double, 3>& b, double t) {
    std::array<double, 3> r{};
    for (int i = 0; i < 3; ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
  };
  while (evaluations < max_evaluations) {
    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    const int best = order[0], worst = order[3], second = order[2];
    if (values[worst] - values[best] <= 1e-12 * (1.0 + std::abs(values[best]))) {
      double spread = 0.0;
      for (int i = 0; i < 3; ++i) spread = std::max(spread, std::abs(simplex[worst][i] - simplex[best][i]));
      if (spread < 1e-9) break;
    }
    std::array<double, 3> centroid{};
    for (int k : {order[0], order[1], order[2]}) {
      for (int i = 0; i < 3; ++i) centroid[i] += simplex[k][i] / 3.0;
    }
    const auto reflected = lerp(centroid, simplex[worst], -1.0);
    const double fr = eval(reflected);
    if (fr < values[best]) {
      const auto expanded = lerp(centroid, simplex[worst], -2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
    } else {
      const bool outside = fr < values[worst];
      const auto contracted = lerp(centroid, outside ? reflected : simplex[worst], 0.5);
      const double fc = eval(contracted);
      if (fc < std::min(fr, values[worst])) {
        simplex[worst] = contracted;
        values[worst] = fc;
      } else {
        for (int k : {order[1], order[2], order[3]}) {
          simplex[k] = lerp(simplex[best], simplex[k], 0.5);
          values[k] = eval(simplex[k]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 4; ++i) {
    if (values[i] < values[best]) best = i;
  }
  return simplex[best];
}

}  // namespace

GevParams fit_gev_ecdf(std::span<const double> samples) {
  const Standardized st = standardize(samples);
  const GevParams ml = fit_standardized_ml(st.sorted);
  auto objective = [&](const std::array<double, 3>& p) {
    const double shape = std::clamp(p[2], kEcdfShapeMin, kShapeBound);
    return ks_two_sided({p[0], std::exp(p[1]), shape}, st.sorted);
  };
  std::array<double, 3> best{ml.location, std::log(ml.scale), ml.shape};
  double best_value = objective(best);
  for (double shape : {ml.shape, -0.5, -1.5, -2.5}) {
    std::array<double, 3> start{ml.location, std::log(ml.scale), shape};
    if (shape != ml.shape) {
      // Moment-matched start for the requested shape.
      const double g1 = std::tgamma(1.0 - shape);
      const double g2 = std::tgamma(1.0 - 2.0 * shape);
      const double scale = std::abs(shape) / std::sqrt(std::max(g2 - g1 * g1, 1e-300));
      start = {-scale * (g1 - 1.0) / shape, std::log(scale), shape};
    }
    const auto candidate = nelder_mead(objective, start, 0.1, 2000);
    const double value = objective(candidate);
    if (value < best_value) {
      best_value = value;
      best = candidate;
    }
  }
  return unstandardize({best[0], std::exp(best[1]), std::clamp(best[2], kEcdfShapeMin, kShapeBound)}, st);
}

constexpr std::size_t kQuantileFitPoints = 4096;

GevParams fit_gev_for_quantile(std::span<const double> samples, double epsilon, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ContractViolation("quantile level must lie in (0, 1)");
  const Standardized st = standardize(samples);
  const double n = static_cast<double>(st.sorted.size());
  const GevParams ml = fit_standardized_ml(st.sorted);

  // On large samples D^- is evaluated on every k-th order statistic (the
  // last one always included). Between kept points G grows while the
  // empirical step falls behind by at most k/n, so adding k/n keeps the
  // search objective an upper bound of the exact certified quantile.
  const std::size_t total = st.sorted.size();
  const std::size_t stride = std::max<std::size_t>(1, (total + kQuantileFitPoints - 1) / kQuantileFitPoints);
  std::vector<std::size_t> kept;
  for (std::size_t i = total - 1;; i -= stride) {
    kept.push_back(i);
    if (i < stride) break;
  }
  const double slack = stride > 1 ? static_cast<double>(stride) / n : 0.0;

  // Certified quantile G^{-1}(q + eps + D^-(G)); infeasible candidates are
  // ranked by how far the level overshoots 1 so the search can recover.
  auto objective = [&](const std::array<double, 3>& p) {
    const GevParams g{p[0], std::exp(p[1]), std::clamp(p[2], kEcdfShapeMin, kShapeBound)};
    double d = 0.0;
    for (std::size_t i : kept) d = std::max(d, g.cdf(st.sorted[i]) - static_cast<double>(i) / n);
    const double level = q + epsilon + d + slack;
    if (level >= 1.0) return 1e6 * (1.0 + level);
    const double x = g.quantile(level);
    return std::isfinite(x) ? x : 1e6;
  };

  std::vector<std::array<double, 3>> starts = {{ml.location, std::log(ml.scale), ml.shape}};
  for (double shape : {-0.5, -1.0, -2.0, -3.0}) {
    const double g1 = std::tgamma(1.0 - shape);
    const double g2 = std::tgamma(1.0 - 2.0 * shape);
    const double scale = std::abs(shape) / std::sqrt(std::max(g2 - g1 * g1, 1e-300));
    starts.push_back({-scale * (g1 - 1.0) / shape, std::log(scale), shape});
  }
  // Sliding a fit to the right always drives D^- to zero eventually, so a
  // coarse location scan gives every start a feasible foothold.
  auto slide = [&](std::array<double, 3> p) {
    std::array<double, 3> out = p;
    double out_value = objective(p);
    for (double shift = 1e-4; shift < 4.0; shift *= 1.5) {
      std::array<double, 3> trial = p;
      trial[0] += shift;
      const double value = objective(trial);
      if (value < out_value) {
        out_value = value;
        out = trial;
      }
    }
    return out;
  };

  std::array<double, 3> best = starts.front();
  double best_value = objective(best);
  for (const auto& start : starts) {
    auto candidate = slide(start);
    // Restarting from the previous optimum unsticks collapsed simplices.
    for (double step : {0.2, 0.05, 0.01}) candidate = slide(nelder_mead(objective, candidate, step, 300));
    const double value = objective(candidate);
    if (value < best_value) {
      best_value = value;
      best = candidate;
    }
  }
  return unstandardize({best[0], std::exp(best[1]), std::clamp(best[2], kEcdfShapeMin, kShapeBound)}, st);
}

GevParams fit_gev(std::span<const double> samples) {
  // Fit in standardized coordinates; the location-scale family makes the
  // result equivariant under shifts and positive rescaling of the data.
  const Standardized st = standardize(samples);
  return unstandardize(fit_standardized_ml(st.sorted), st);
}

}  // namespace gotube
