#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netcut/error.hpp"

// Epsilon-insensitive support vector regression.
//
// The dual is the standard 2l-variable form
//   min 1/2 a^T Q a + p^T a   s.t.  y^T a = 0,  0 <= a_t <= C
// with a = (alpha, alpha*), y = (+1..., -1...), p = (eps - z, eps + z), solved
// by SMO with second-order working-set selection. The regression weights are
// beta_i = alpha_i - alpha*_i and f(x) = sum_i beta_i K(x_i, x) + b.
namespace netcut::svr {

enum class Kernel { Rbf, Linear };

inline const char* to_string(Kernel k) { return k == Kernel::Rbf ? "rbf" : "linear"; }

inline Kernel parse_kernel(const std::string& s) {
  if (s == "rbf") return Kernel::Rbf;
  if (s == "linear") return Kernel::Linear;
  throw ConfigError("unknown kernel '" + s + "'");
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    d += t * t;
  }
  return d;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d += a[k] * b[k];
  return d;
}

// exp(-gamma * |a - b|^2), in (0, 1], equal to 1 iff a == b.
inline double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
  return std::exp(-gamma * squared_distance(a, b));
}

inline double kernel_value(Kernel k, std::span<const double> a, std::span<const double> b, double gamma) {
  return k == Kernel::Rbf ? rbf(a, b, gamma) : dot(a, b);
}

// Per-component standardization. Components with zero variance keep a unit
// divisor so they map to 0 and drop out of the kernel.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> std;

  static FeatureScaler fit(const std::vector<std::vector<double>>& rows) {
    FeatureScaler s;
    if (rows.empty()) return s;
    const std::size_t d = rows.front().size();
    s.mean.assign(d, 0.0);
    s.std.assign(d, 0.0);
    for (const auto& r : rows)
      for (std::size_t k = 0; k < d; ++k) s.mean[k] += r[k];
    for (auto& m : s.mean) m /= static_cast<double>(rows.size());
    for (const auto& r : rows)
      for (std::size_t k = 0; k < d; ++k) s.std[k] += (r[k] - s.mean[k]) * (r[k] - s.mean[k]);
    for (std::size_t k = 0; k < d; ++k) {
      const double sd = std::sqrt(s.std[k] / static_cast<double>(rows.size()));
      // Relative threshold: a spread of a few ulps around a large mean is noise.
      s.std[k] = (sd > 1e-12 * std::max(1.0, std::abs(s.mean[k]))) ? sd : 1.0;
    }
    return s;
  }

  std::vector<double> transform(std::span<const double> raw) const {
    if (raw.size() != mean.size()) {
      throw ConfigError("feature dimension " + std::to_string(raw.size()) + " does not match scaler dimension " +
                        std::to_string(mean.size()));
    }
    std::vector<double> out(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) out[k] = (raw[k] - mean[k]) / std[k];
    return out;
  }
};

struct Params {
  Kernel kernel = Kernel::Rbf;
  double gamma = 0.1;
  double c = 1e6;
  double epsilon = 0.01;
  // Stop when the maximal KKT violation, measured in target units, drops
  // below this value.
  double tolerance = 1e-5;
  std::size_t max_iterations = 100000;
};

struct Model {
  Kernel kernel = Kernel::Rbf;
  double gamma = 0.1;
  double c = 1.0;
  double epsilon = 0.01;
  double bias = 0;
  FeatureScaler scaler;
  std::vector<std::vector<double>> support_vectors;  // scaled
  std::vector<double> dual_coefficients;
  // Raw per-component training range, used to flag extrapolation.
  std::vector<double> feature_min;
  std::vector<double> feature_max;

  // Diagnostics from the solver; not persisted.
  std::size_t iterations = 0;
  bool converged = true;

  double decision(std::span<const double> scaled) const {
    double f = bias;
    for (std::size_t j = 0; j < support_vectors.size(); ++j) {
      f += dual_coefficients[j] * kernel_value(kernel, support_vectors[j], scaled, gamma);
    }
    return f;
  }

  // Raw regression output; callers that need a latency clamp at zero.
  double predict(std::span<const double> raw) const { return decision(scaler.transform(raw)); }

  bool outside_training_range(std::span<const double> raw) const {
    if (feature_min.size() != raw.size()) return false;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (raw[k] < feature_min[k] || raw[k] > feature_max[k]) return true;
    }
    return false;
  }
};

namespace detail {

// LIBSVM-style SMO over the 2l-variable epsilon-SVR dual. Returns
// (alpha, rho, iterations, converged).
struct SmoResult {
  std::vector<double> alpha;
  double rho = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

inline SmoResult solve_dual(const std::vector<std::vector<double>>& kmat, std::span<const double> z,
                            const Params& prm) {
  constexpr double kTau = 1e-12;
  const std::size_t l = z.size();
  const std::size_t n = 2 * l;
  const double C = prm.c;
  std::vector<double> alpha(n, 0.0), grad(n);
  std::vector<signed char> y(n);
  for (std::size_t t = 0; t < l; ++t) {
    y[t] = 1;
    y[t + l] = -1;
    grad[t] = prm.epsilon - z[t];
    grad[t + l] = prm.epsilon + z[t];
  }
  auto K = [&](std::size_t a, std::size_t b) { return kmat[a % l][b % l]; };
  auto Q = [&](std::size_t a, std::size_t b) { return static_cast<double>(y[a] * y[b]) * K(a, b); };
  auto at_upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto at_lower = [&](std::size_t t) { return alpha[t] <= 0; };

  SmoResult res;
  std::size_t iter = 0;
  for (; iter < prm.max_iterations; ++iter) {
    // First index: maximal violating gradient.
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (!at_upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          i = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!at_lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        i = static_cast<std::ptrdiff_t>(t);
      }
    }
    // Second index: largest guaranteed objective decrease.
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t j = -1;
    double obj_min = std::numeric_limits<double>::infinity();
    if (i >= 0) {
      const auto ui = static_cast<std::size_t>(i);
      const double qii = K(ui, ui);
      for (std::size_t t = 0; t < n; ++t) {
        if (y[t] == 1) {
          if (at_lower(t)) continue;
          const double gd = gmax + grad[t];
          gmax2 = std::max(gmax2, grad[t]);
          if (gd > 0) {
            double quad = qii + K(t, t) - 2.0 * y[ui] * Q(ui, t);
            if (quad <= 0) quad = kTau;
            const double obj = -(gd * gd) / quad;
            if (obj <= obj_min) {
              obj_min = obj;
              j = static_cast<std::ptrdiff_t>(t);
            }
          }
        } else {
          if (at_upper(t)) continue;
          const double gd = gmax - grad[t];
          gmax2 = std::max(gmax2, -grad[t]);
          if (gd > 0) {
            double quad = qii + K(t, t) + 2.0 * y[ui] * Q(ui, t);
            if (quad <= 0) quad = kTau;
            const double obj = -(gd * gd) / quad;
            if (obj <= obj_min) {
              obj_min = obj;
              j = static_cast<std::ptrdiff_t>(t);
            }
          }
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < prm.tolerance) {
      res.converged = true;
      break;
    }

    const auto ui = static_cast<std::size_t>(i);
    const auto uj = static_cast<std::size_t>(j);
    const double old_ai = alpha[ui], old_aj = alpha[uj];
    const double qij = Q(ui, uj);
    if (y[ui] != y[uj]) {
      double quad = K(ui, ui) + K(uj, uj) + 2 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[ui] - grad[uj]) / quad;
      const double diff = alpha[ui] - alpha[uj];
      alpha[ui] += delta;
      alpha[uj] += delta;
      if (diff > 0) {
        if (alpha[uj] < 0) {
          alpha[uj] = 0;
          alpha[ui] = diff;
        }
      } else if (alpha[ui] < 0) {
        alpha[ui] = 0;
        alpha[uj] = -diff;
      }
      if (diff > 0) {
        if (alpha[ui] > C) {
          alpha[ui] = C;
          alpha[uj] = C - diff;
        }
      } else if (alpha[uj] > C) {
        alpha[uj] = C;
        alpha[ui] = C + diff;
      }
    } else {
      double quad = K(ui, ui) + K(uj, uj) - 2 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[ui] - grad[uj]) / quad;
      const double sum = alpha[ui] + alpha[uj];
      alpha[ui] -= delta;
      alpha[uj] += delta;
      if (sum > C) {
        if (alpha[ui] > C) {
          alpha[ui] = C;
          alpha[uj] = sum - C;
        }
      } else if (alpha[uj] < 0) {
        alpha[uj] = 0;
        alpha[ui] = sum;
      }
      if (sum > C) {
        if (alpha[uj] > C) {
          alpha[uj] = C;
          alpha[ui] = sum - C;
        }
      } else if (alpha[ui] < 0) {
        alpha[ui] = 0;
        alpha[uj] = sum;
      }
    }
    const double dai = alpha[ui] - old_ai;
    const double daj = alpha[uj] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += Q(ui, t) * dai + Q(uj, t) * daj;
  }
  res.iterations = iter;

  // Offset from free variables, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0;
  std::size_t nr_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++nr_free;
      sum_free += yg;
    }
  }
  res.rho = nr_free > 0 ? sum_free / static_cast<double>(nr_free) : (ub + lb) / 2;
  res.alpha = std::move(alpha);
  return res;
}

}  // namespace detail

// Trains on raw (unscaled) rows. The scaler is fit to `x` first.
inline Model train(const std::vector<std::vector<double>>& x, std::span<const double> y, const Params& prm) {
  if (x.size() != y.size()) throw ConfigError("svr: feature and target counts differ");
  if (x.size() < 2) throw ConfigError("svr: need at least 2 training samples, got " + std::to_string(x.size()));
  if (prm.kernel == Kernel::Rbf && !(prm.gamma > 0)) throw ConfigError("svr: gamma must be > 0");
  if (!(prm.c > 0)) throw ConfigError("svr: C must be > 0");
  if (!(prm.epsilon >= 0)) throw ConfigError("svr: epsilon must be >= 0");
  const std::size_t d = x.front().size();
  for (const auto& r : x) {
    if (r.size() != d) throw ConfigError("svr: ragged feature rows");
    for (double v : r)
      if (!std::isfinite(v)) throw ConfigError("svr: non-finite feature value");
  }

  Model m;
  m.kernel = prm.kernel;
  m.gamma = prm.gamma;
  m.c = prm.c;
  m.epsilon = prm.epsilon;
  m.scaler = FeatureScaler::fit(x);
  m.feature_min.assign(d, std::numeric_limits<double>::infinity());
  m.feature_max.assign(d, -std::numeric_limits<double>::infinity());
  for (const auto& r : x) {
    for (std::size_t k = 0; k < d; ++k) {
      m.feature_min[k] = std::min(m.feature_min[k], r[k]);
      m.feature_max[k] = std::max(m.feature_max[k], r[k]);
    }
  }

  std::vector<std::vector<double>> xs;
  xs.reserve(x.size());
  for (const auto& r : x) xs.push_back(m.scaler.transform(r));
  const std::size_t l = xs.size();
  std::vector<std::vector<double>> kmat(l, std::vector<double>(l));
  for (std::size_t a = 0; a < l; ++a)
    for (std::size_t b = a; b < l; ++b)
      kmat[a][b] = kmat[b][a] = kernel_value(prm.kernel, xs[a], xs[b], prm.gamma);

  auto sol = detail::solve_dual(kmat, y, prm);
  m.iterations = sol.iterations;
  m.converged = sol.converged;
  m.bias = -sol.rho;
  for (std::size_t t = 0; t < l; ++t) {
    const double beta = sol.alpha[t] - sol.alpha[t + l];
    if (beta != 0) {
      m.support_vectors.push_back(xs[t]);
      m.dual_coefficients.push_back(beta);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Persistence

inline nlohmann::json to_json(const Model& m) {
  nlohmann::json j = {{"kernel", to_string(m.kernel)},
                      {"gamma", m.gamma},
                      {"c", m.c},
                      {"epsilon", m.epsilon},
                      {"bias", m.bias},
                      {"scaler", {{"mean", m.scaler.mean}, {"std", m.scaler.std}}},
                      {"support_vectors", m.support_vectors},
                      {"dual_coefficients", m.dual_coefficients}};
  if (!m.feature_min.empty()) j["feature_range"] = {{"min", m.feature_min}, {"max", m.feature_max}};
  return j;
}

inline Model model_from_json(const nlohmann::json& j, const std::string& source = "model") {
  try {
    Model m;
    m.kernel = parse_kernel(j.at("kernel").get<std::string>());
    m.gamma = j.at("gamma").get<double>();
    m.c = j.at("c").get<double>();
    m.epsilon = j.at("epsilon").get<double>();
    m.bias = j.at("bias").get<double>();
    m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    m.scaler.std = j.at("scaler").at("std").get<std::vector<double>>();
    m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    m.dual_coefficients = j.at("dual_coefficients").get<std::vector<double>>();
    if (auto it = j.find("feature_range"); it != j.end()) {
      m.feature_min = it->at("min").get<std::vector<double>>();
      m.feature_max = it->at("max").get<std::vector<double>>();
    }
    if (m.scaler.mean.size() != m.scaler.std.size()) throw ValidationError(source + ": scaler size mismatch");
    if (m.support_vectors.size() != m.dual_coefficients.size()) {
      throw ValidationError(source + ": support_vectors and dual_coefficients differ in length");
    }
    for (const auto& sv : m.support_vectors) {
      if (sv.size() != m.scaler.mean.size()) throw ValidationError(source + ": support vector dimension mismatch");
    }
    for (double s : m.scaler.std) {
      if (!(s > 0)) throw ValidationError(source + ": scaler std must be > 0");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(source + ": malformed model JSON: " + e.what());
  }
}

}  // namespace netcut::svr
