#include "gotube/dynamics.hpp"

#include "gotube/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace gotube {

using json = nlohmann::json;

SystemSpec make_vanderpol(double mu) {
  auto rhs = [mu](const Eigen::Ref<const Vector>& s, Eigen::Ref<Vector> out) {
    out[0] = s[1];
    out[1] = mu * (1.0 - s[0] * s[0]) * s[1] - s[0];
  };
  auto jac = [mu](const Eigen::Ref<const Vector>& s, Eigen::Ref<Matrix> out) {
    out(0, 0) = 0.0;
    out(0, 1) = 1.0;
    out(1, 0) = -2.0 * mu * s[0] * s[1] - 1.0;
    out(1, 1) = mu * (1.0 - s[0] * s[0]);
  };
  return SystemSpec("vanderpol", 2, {{"mu", mu}}, rhs, jac, Vector::Constant(2, 1.0));
}

SystemSpec make_brusselator(double a, double b) {
  auto rhs = [a, b](const Eigen::Ref<const Vector>& s, Eigen::Ref<Vector> out) {
    const double x2y = s[0] * s[0] * s[1];
    out[0] = a + x2y - (b + 1.0) * s[0];
    out[1] = b * s[0] - x2y;
  };
  auto jac = [b](const Eigen::Ref<const Vector>& s, Eigen::Ref<Matrix> out) {
    const double xy = s[0] * s[1];
    const double xx = s[0] * s[0];
    out(0, 0) = 2.0 * xy - (b + 1.0);
    out(0, 1) = xx;
    out(1, 0) = b - 2.0 * xy;
    out(1, 1) = -xx;
  };
  return SystemSpec("brusselator", 2, {{"A", a}, {"B", b}}, rhs, jac, Vector::Constant(2, 1.0));
}

SystemSpec make_dubins(double v, double u) {
  auto rhs = [v, u](const Eigen::Ref<const Vector>& s, Eigen::Ref<Vector> out) {
    out[0] = v * std::cos(s[2]);
    out[1] = v * std::sin(s[2]);
    out[2] = u;
  };
  auto jac = [v](const Eigen::Ref<const Vector>& s, Eigen::Ref<Matrix> out) {
    out.setZero();
    out(0, 2) = -v * std::sin(s[2]);
    out(1, 2) = v * std::cos(s[2]);
  };
  return SystemSpec("dubins", 3, {{"v", v}, {"u", u}}, rhs, jac, Vector::Zero(3));
}

SystemSpec make_cardiac(double a, double b, double eps, double current) {
  auto rhs = [=](const Eigen::Ref<const Vector>& s, Eigen::Ref<Vector> out) {
    out[0] = s[0] - s[0] * s[0] * s[0] / 3.0 - s[1] + current;
    out[1] = eps * (s[0] + a - b * s[1]);
  };
  auto jac = [=](const Eigen::Ref<const Vector>& s, Eigen::Ref<Matrix> out) {
    out(0, 0) = 1.0 - s[0] * s[0];
    out(0, 1) = -1.0;
    out(1, 0) = eps;
    out(1, 1) = -eps * b;
  };
  Vector center(2);
  center << 0.0, 0.0;
  return SystemSpec("cardiac", 2, {{"a", a}, {"b", b}, {"eps", eps}, {"I", current}}, rhs, jac,
                    center);
}

void validate_ctrnn(const CtrnnWeights& weights) {
  const auto n = weights.tau.size();
  if (n < 1) throw WeightFormatError("/tau", "must contain at least one entry");
  if (weights.w.rows() != n || weights.w.cols() != n) {
    std::ostringstream os;
    os << "expected " << n << "x" << n << " matrix, got " << weights.w.rows() << "x"
       << weights.w.cols();
    throw WeightFormatError("/W", os.str());
  }
  if (weights.b.size() != n) {
    throw WeightFormatError("/b", "expected " + std::to_string(n) + " entries, got " +
                                      std::to_string(weights.b.size()));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(weights.tau[i] > 0.0) || !std::isfinite(weights.tau[i])) {
      throw WeightFormatError("/tau/" + std::to_string(i), "time constant must be finite and > 0");
    }
  }
  if (!weights.w.allFinite()) throw WeightFormatError("/W", "entries must be finite");
  if (!weights.b.allFinite()) throw WeightFormatError("/b", "entries must be finite");
}

SystemSpec make_ctrnn(CtrnnWeights weights) {
  validate_ctrnn(weights);
  const int n = static_cast<int>(weights.tau.size());
  const Vector inv_tau = weights.tau.cwiseInverse();
  const Matrix w = weights.w;
  const Vector b = weights.b;
  auto rhs = [inv_tau, w, b](const Eigen::Ref<const Vector>& s, Eigen::Ref<Vector> out) {
    out.noalias() = w * s.array().tanh().matrix();
    out += b - inv_tau.cwiseProduct(s);
  };
  auto jac = [inv_tau, w](const Eigen::Ref<const Vector>& s, Eigen::Ref<Matrix> out) {
    const Vector dt = (1.0 - s.array().tanh().square()).matrix();
    out.noalias() = w * dt.asDiagonal();
    out.diagonal() -= inv_tau;
  };
  return SystemSpec("ctrnn", n, {}, rhs, jac, Vector::Zero(n), std::move(weights));
}

SystemSpec make_linear(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw ContractViolation("linear system needs a non-empty square matrix");
  }
  const int n = static_cast<int>(a.rows());
  auto rhs = [a](const Eigen::Ref<const Vector>& s, Eigen::Ref<Vector> out) {
    out.noalias() = a * s;
  };
  auto jac = [a](const Eigen::Ref<const Vector>&, Eigen::Ref<Matrix> out) { out = a; };
  Vector center = Vector::Zero(n);
  center[0] = 1.0;
  return SystemSpec("linear-test", n, {}, rhs, jac, center);
}

SystemSpec make_zero(int dimension) {
  auto rhs = [](const Eigen::Ref<const Vector>&, Eigen::Ref<Vector> out) { out.setZero(); };
  auto jac = [](const Eigen::Ref<const Vector>&, Eigen::Ref<Matrix> out) { out.setZero(); };
  return SystemSpec("zero-test", dimension, {{"n", dimension}}, rhs, jac,
                    Vector::Zero(dimension));
}

namespace {

Vector read_vector(const json& j, const std::string& field) {
  if (!j.is_array()) throw WeightFormatError(field, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw WeightFormatError(field + "/" + std::to_string(i), "expected a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

}  // namespace

CtrnnWeights parse_ctrnn_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw WeightFormatError("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw WeightFormatError("", "expected a JSON object");
  for (const char* key : {"n", "tau", "W", "b"}) {
    if (!doc.contains(key)) throw WeightFormatError(std::string("/") + key, "missing field");
  }
  for (const auto& item : doc.items()) {
    const auto& k = item.key();
    if (k != "n" && k != "tau" && k != "W" && k != "b") {
      throw WeightFormatError("/" + k, "unknown field");
    }
  }
  if (!doc["n"].is_number_integer() || doc["n"].get<long long>() < 1) {
    throw WeightFormatError("/n", "expected a positive integer");
  }
  const auto n = static_cast<Eigen::Index>(doc["n"].get<long long>());

  CtrnnWeights weights;
  weights.tau = read_vector(doc["tau"], "/tau");
  weights.b = read_vector(doc["b"], "/b");
  const json& rows = doc["W"];
  if (!rows.is_array()) throw WeightFormatError("/W", "expected an array of rows");
  if (static_cast<Eigen::Index>(rows.size()) != n) {
    throw WeightFormatError("/W", "expected " + std::to_string(n) + " rows, got " +
                                      std::to_string(rows.size()));
  }
  weights.w.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::string field = "/W/" + std::to_string(r);
    const Vector row = read_vector(rows[static_cast<std::size_t>(r)], field);
    if (row.size() != n) {
      throw WeightFormatError(field, "expected " + std::to_string(n) + " columns, got " +
                                         std::to_string(row.size()));
    }
    weights.w.row(r) = row.transpose();
  }
  if (weights.tau.size() != n) {
    throw WeightFormatError("/tau", "expected " + std::to_string(n) + " entries, got " +
                                        std::to_string(weights.tau.size()));
  }
  validate_ctrnn(weights);
  return weights;
}

CtrnnWeights load_ctrnn_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightFormatError("", "cannot open weight file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_ctrnn_json(buffer.str());
}

std::string ctrnn_to_json(const CtrnnWeights& weights) {
  json doc;
  const auto n = weights.tau.size();
  doc["n"] = n;
  doc["tau"] = std::vector<double>(weights.tau.data(), weights.tau.data() + n);
  doc["b"] = std::vector<double>(weights.b.data(), weights.b.data() + n);
  json rows = json::array();
  for (Eigen::Index r = 0; r < n; ++r) {
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c < n; ++c) row[static_cast<std::size_t>(c)] = weights.w(r, c);
    rows.push_back(row);
  }
  doc["W"] = rows;
  return doc.dump();
}

CtrnnWeights random_ctrnn_weights(int n, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> tau_dist(0.5, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  CtrnnWeights weights;
  weights.tau.resize(n);
  weights.w.resize(n, n);
  weights.b.resize(n);
  for (int i = 0; i < n; ++i) weights.tau[i] = tau_dist(rng);
  const double w_scale = scale / std::sqrt(static_cast<double>(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) weights.w(r, c) = w_scale * normal(rng);
  }
  for (int i = 0; i < n; ++i) weights.b[i] = 0.1 * normal(rng);
  return weights;
}

const std::vector<std::string>& registry_names() {
  static const std::vector<std::string> names = {"brusselator", "vanderpol",   "dubins",   "cardiac",
                                                 "ctrnn",       "linear-test", "zero-test"};
  return names;
}

namespace {

class ParamReader {
 public:
  ParamReader(std::string system, std::map<std::string, double> defaults,
              const std::map<std::string, double>& overrides)
      : system_(std::move(system)), values_(std::move(defaults)) {
    for (const auto& [key, value] : overrides) {
      if (!values_.contains(key)) {
        throw UnknownSystemError("system '" + system_ + "' has no parameter '" + key + "'");
      }
      if (!std::isfinite(value)) {
        throw UnknownSystemError("parameter '" + key + "' of '" + system_ + "' must be finite");
      }
      values_[key] = value;
    }
  }
  double operator[](const std::string& key) const { return values_.at(key); }
  int integer(const std::string& key) const {
    const double v = values_.at(key);
    if (v < 1 || std::floor(v) != v) {
      throw UnknownSystemError("parameter '" + key + "' of '" + system_ +
                               "' must be a positive integer");
    }
    return static_cast<int>(v);
  }

 private:
  std::string system_;
  std::map<std::string, double> values_;
};

}  // namespace

SystemSpec load_system(const std::string& source, const std::map<std::string, double>& overrides) {
  if (source == "vanderpol") {
    ParamReader p(source, {{"mu", 1.0}}, overrides);
    return make_vanderpol(p["mu"]);
  }
  if (source == "brusselator") {
    ParamReader p(source, {{"A", 1.0}, {"B", 1.5}}, overrides);
    return make_brusselator(p["A"], p["B"]);
  }
  if (source == "dubins") {
    ParamReader p(source, {{"v", 1.0}, {"u", 0.5}}, overrides);
    return make_dubins(p["v"], p["u"]);
  }
  if (source == "cardiac") {
    ParamReader p(source, {{"a", 0.7}, {"b", 0.8}, {"eps", 0.08}, {"I", 0.5}}, overrides);
    return make_cardiac(p["a"], p["b"], p["eps"], p["I"]);
  }
  if (source == "ctrnn") {
    ParamReader p(source, {{"n", 8.0}, {"weight_seed", 0.0}, {"scale", 1.0}}, overrides);
    const double seed = p["weight_seed"];
    if (seed < 0 || std::floor(seed) != seed) {
      throw UnknownSystemError("parameter 'weight_seed' of 'ctrnn' must be a non-negative integer");
    }
    SystemSpec base = make_ctrnn(
        random_ctrnn_weights(p.integer("n"), static_cast<std::uint64_t>(seed), p["scale"]));
    return SystemSpec("ctrnn", base.dimension(),
                      {{"n", p["n"]}, {"weight_seed", seed}, {"scale", p["scale"]}},
                      [base](const Eigen::Ref<const Vector>& s, Eigen::Ref<Vector> o) { base.rhs_into(s, o); },
                      [base](const Eigen::Ref<const Vector>& s, Eigen::Ref<Matrix> o) { base.jacobian_into(s, o); },
                      base.default_center(), base.weights());
  }
  if (source == "linear-test") {
    ParamReader p(source, {{"n", 2.0}, {"rate", 1.0}}, overrides);
    const int n = p.integer("n");
    SystemSpec base = make_linear(-p["rate"] * Matrix::Identity(n, n));
    return SystemSpec("linear-test", n, {{"n", n}, {"rate", p["rate"]}},
                      [base](const Eigen::Ref<const Vector>& s, Eigen::Ref<Vector> o) { base.rhs_into(s, o); },
                      [base](const Eigen::Ref<const Vector>& s, Eigen::Ref<Matrix> o) { base.jacobian_into(s, o); },
                      base.default_center());
  }
  if (source == "zero-test") {
    ParamReader p(source, {{"n", 2.0}}, overrides);
    return make_zero(p.integer("n"));
  }
  std::error_code ec;
  if (std::filesystem::is_regular_file(source, ec)) {
    if (!overrides.empty()) {
      throw UnknownSystemError("weight-file systems take no scalar parameters");
    }
    return make_ctrnn(load_ctrnn_file(source));
  }
  throw UnknownSystemError("unknown system '" + source + "'");
}

}  // namespace gotube
