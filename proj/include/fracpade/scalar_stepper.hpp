#pragma once

// Scalar recurrences for a single eigenvalue lambda >= delta:
//
//   mu_0 = delta^-alpha,   mu_l = r_m(theta_l) mu_{l-1},
//   theta_l = k_l (lambda - delta) / (delta + t_{l-1} (lambda - delta)),
//
// whose exact counterpart (r_m replaced by (1+x)^-alpha) telescopes to lambda^-alpha.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracpade/pade.hpp"
#include "fracpade/time_mesh.hpp"

namespace fracpade {

enum class Scheme { GRM, UM };

inline const char* to_string(Scheme s) { return s == Scheme::GRM ? "GRM" : "UM"; }

struct ScalarRunConfig {
  ScalarRunConfig(double alpha_, double delta_, int m_, TimeMesh mesh_)
      : alpha(alpha_), delta(delta_), m(m_), mesh(std::move(mesh_)), pade(pade_coefficients(m_, alpha_)) {
    if (!(delta > 0.0)) throw std::invalid_argument("ScalarRunConfig: delta must be positive");
  }

  double alpha;
  double delta;
  int m;
  TimeMesh mesh;
  PadeRational<double> pade;
};

inline double exact_power(double lambda, double alpha) {
  if (!(lambda > 0.0)) throw std::invalid_argument("exact_power: lambda must be positive");
  return std::pow(lambda, -alpha);
}

namespace detail {

inline double scalar_run(double lambda, const ScalarRunConfig& cfg) {
  if (lambda < cfg.delta) throw std::invalid_argument("scalar stepper: lambda below delta");
  const double beta = lambda - cfg.delta;
  double mu = std::pow(cfg.delta, -cfg.alpha);
  for (const TimeStep& s : cfg.mesh.steps()) mu *= cfg.pade(s.k * beta / (cfg.delta + s.t * beta));
  return mu;
}

}  // namespace detail

/// mu(lambda) on a geometric mesh.
inline double scalar_grm(double lambda, const ScalarRunConfig& cfg) {
  if (!cfg.mesh.is_geometric()) throw std::invalid_argument("scalar_grm: mesh is not geometric");
  return detail::scalar_run(lambda, cfg);
}

/// delta^-alpha prod_n r_m(theta_n) on a uniform mesh.
inline double scalar_um(double lambda, const ScalarRunConfig& cfg) {
  if (cfg.mesh.is_geometric()) throw std::invalid_argument("scalar_um: mesh is not uniform");
  return detail::scalar_run(lambda, cfg);
}

/// |lambda^-alpha - mu(lambda)| for every grid point.
inline std::vector<double> scalar_error_sweep(std::span<const double> lambda_grid, const ScalarRunConfig& cfg) {
  std::vector<double> errors;
  errors.reserve(lambda_grid.size());
  for (double lambda : lambda_grid)
    errors.push_back(std::abs(exact_power(lambda, cfg.alpha) - detail::scalar_run(lambda, cfg)));
  return errors;
}

/// `count` points log-spaced from lo to hi, both endpoints included.
inline std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi >= lo) || count < 1) throw std::invalid_argument("log_spaced: bad range");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < count; ++i) out[i] = std::pow(10.0, a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

/// Least-squares rate p in err ~ C N^-p, fitted on log2 scales over >= 2 points.
inline double fit_convergence_rate(std::span<const double> step_counts, std::span<const double> errors) {
  if (step_counts.size() != errors.size() || step_counts.size() < 2)
    throw std::invalid_argument("fit_convergence_rate: need matching inputs with >= 2 points");
  const double n = static_cast<double>(errors.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0)) throw std::invalid_argument("fit_convergence_rate: errors must be positive");
    const double x = std::log2(step_counts[i]), y = std::log2(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fracpade
