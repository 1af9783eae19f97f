#pragma once

// Padé time stepping for A_h^-alpha v with B = A_h - delta I, S_t = delta I + t B:
//
//   U_0 = delta^-alpha v,   U_l = r_m(k_l B S_{t_{l-1}}^-1) U_{l-1}.
//
// With r_m(z) = r_inf + sum_i res_i / (z - x_i), each pole contributes
// res_i S_t (k B - x_i S_t)^-1 u. Writing k B - x_i S_t = M^-1 G_i with
//
//   G_i = a_i K + b_i M,   a_i = k - x_i t,   b_i = -delta (k + x_i (1 - t)),
//
// and S_t = (delta k / a_i) I + (t / a_i) (k B - x_i S_t), one step is
//
//   U_new = (r_inf + sum_i res_i t / a_i) u + sum_i res_i (delta k / a_i) z_i,   G_i z_i = M u.
//
// Every G_i is SPD since x_i < -1 gives a_i > 0 and G_i = a_i (K - delta M) - x_i delta M.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fracpade/fem.hpp"
#include "fracpade/pade.hpp"
#include "fracpade/scalar_stepper.hpp"
#include "fracpade/spd_solver.hpp"
#include "fracpade/time_mesh.hpp"

namespace fracpade {

struct SpectralBounds {
  double lambda_min_est;
  double lambda_max_est;
  bool certified;  // both ends bracket the spectrum (Lanczos converged, bounds widened)
  int iterations = 0;
};

namespace detail {

struct LanczosTop {
  double value;
  int iterations;
};

/// Largest eigenvalue of the B-selfadjoint map q -> apply(q) by Lanczos in the
/// B inner product, with two-pass full reorthogonalization.
template <class Apply>
LanczosTop lanczos_top(const SparseMatrix& B, Apply apply, unsigned seed, int max_iter, double rel_tol) {
  const int n = static_cast<int>(B.rows());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector q(n);
  for (int i = 0; i < n; ++i) q[i] = dist(rng);
  q /= std::sqrt(q.dot(B * q));

  const int limit = std::min(n, max_iter);
  std::vector<Vector> Q, BQ;
  std::vector<double> diag, off;
  double top_prev = 0.0;
  Vector w(n);
  for (int k = 0; k < limit; ++k) {
    Q.push_back(q);
    BQ.push_back(B * q);
    apply(q, w);
    diag.push_back(BQ[k].dot(w));
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j <= k; ++j) w -= BQ[j].dot(w) * Q[j];
    const double beta = std::sqrt(std::max(0.0, w.dot(B * w)));

    const int dim = k + 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(Eigen::Map<const Vector>(diag.data(), dim), Eigen::Map<const Vector>(off.data(), dim - 1),
                              Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues()[dim - 1];
    if ((k > 0 && std::abs(top - top_prev) <= rel_tol * std::abs(top)) || beta <= 1e-14 * std::abs(top) || dim == n)
      return {top, dim};
    top_prev = top;
    off.push_back(beta);
    q = w / beta;
  }
  throw std::runtime_error("estimate_spectral_bounds: Lanczos did not converge");
}

}  // namespace detail

/// Extreme eigenvalues of (K, M).
///
/// lambda_min comes from Lanczos on K^-1 M in the K inner product, whose top
/// Ritz value 1/lambda_min is well separated and converges in a few steps; it is
/// widened by 1%. For meshed operators lambda_max is the elementwise bound
/// dim * 12 / h_min^2, which dominates the largest eigenvalue of every P1 or Q1
/// element pencil. Operators without a mesh use Lanczos on M^-1 K, widened by 1%.
inline SpectralBounds estimate_spectral_bounds(const OperatorPtr& op, unsigned seed = 12345, int max_iter = 10000,
                                               double rel_tol = 1e-10) {
  const SparseMatrix& K = op->stiffness();
  const SparseMatrix& M = op->mass();
  PencilSolver solver(op, SolverPolicy::direct());
  const auto inv = detail::lanczos_top(
      K, [&](const Vector& q, Vector& w) { solver.solve(1.0, 0.0, M * q, w); }, seed, max_iter, rel_tol);
  if (!(inv.value > 0.0)) throw std::runtime_error("estimate_spectral_bounds: pencil is not positive definite");
  if (op->has_mesh()) {
    const double h = op->min_cell_width();
    return {0.99 / inv.value, op->dim() * 12.0 / (h * h), true, inv.iterations};
  }
  const auto top = detail::lanczos_top(
      M, [&](const Vector& q, Vector& w) { solver.solve(0.0, 1.0, K * q, w); }, seed, max_iter, rel_tol);
  return {0.99 / inv.value, 1.01 * top.value, true, inv.iterations + top.iterations};
}

struct StepperConfig {
  double alpha;
  int m;
  double delta;
  TimeMesh mesh;
  SolverPolicy solver = SolverPolicy::direct();
};

struct StepperStats {
  long steps = 0;
  long solves = 0;
  long solver_iterations = 0;
  double max_solver_residual = 0.0;
  /// max over steps of (||U_l||_M - ||U_{l-1}||_M) / ||U_{l-1}||_M.
  double max_norm_growth = -1.0;
};

/// Applies Padé steps to grid functions on one operator; owns one pencil solver per pole.
class PadeStepper {
 public:
  PadeStepper(OperatorPtr op, double alpha, int m, double delta, SolverPolicy policy = SolverPolicy::direct())
      : op_(std::move(op)), pade_(pade_coefficients(m, alpha)), delta_(delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("PadeStepper: delta must be positive");
    for (int i = 0; i < m; ++i) {
      solvers_.emplace_back(op_, policy);
      warm_.emplace_back(Vector::Zero(op_->dofs()));
    }
  }

  const PadeRational<double>& pade() const { return pade_; }
  double delta() const { return delta_; }
  const StepperStats& stats() const { return stats_; }

  /// r_m(k B S_t^-1) u.
  Vector step(const Vector& u, double t, double k) {
    if (!(t >= 0.0 && t < 1.0)) throw std::invalid_argument("apply_pade_step: t must lie in [0, 1)");
    if (k < 0.0 || t + k > 1.0 + 1e-12) throw std::invalid_argument("apply_pade_step: need k >= 0 and t + k <= 1");
    ++stats_.steps;
    if (k == 0.0) return u;
    const Vector Mu = op_->mass() * u;
    double self = pade_.limit_at_infinity();
    Vector out = Vector::Zero(u.size());
    const auto& poles = pade_.poles();
    const auto& res = pade_.residues();
    for (std::size_t i = 0; i < poles.size(); ++i) {
      const double a = k - poles[i] * t;
      const double b = -delta_ * (k + poles[i] * (1.0 - t));
      solvers_[i].solve(a, b, Mu, warm_[i]);
      self += res[i] * t / a;
      out += (res[i] * delta_ * k / a) * warm_[i];
    }
    out += self * u;
    return out;
  }

  /// Runs every step of `mesh` starting from U_0 = delta^-alpha v.
  Vector run(const Vector& v, const TimeMesh& mesh) {
    Vector U = std::pow(delta_, -pade_.alpha()) * v;
    double norm = m_norm(*op_, U);
    for (const TimeStep& s : mesh.steps()) {
      U = step(U, s.t, s.k);
      const double next = m_norm(*op_, U);
      if (norm > 0.0) stats_.max_norm_growth = std::max(stats_.max_norm_growth, (next - norm) / norm);
      norm = next;
    }
    collect_solver_stats();
    return U;
  }

 private:
  void collect_solver_stats() {
    stats_.solves = stats_.solver_iterations = 0;
    for (const auto& s : solvers_) {
      stats_.solves += s.stats().solves;
      stats_.solver_iterations += s.stats().iterations;
      stats_.max_solver_residual = std::max(stats_.max_solver_residual, s.stats().max_relative_residual);
    }
  }

  OperatorPtr op_;
  PadeRational<double> pade_;
  double delta_;
  std::vector<PencilSolver> solvers_;
  std::vector<Vector> warm_;
  StepperStats stats_;
};

namespace detail {

inline void check_config(const OperatorPtr& op, const GridFunction& v, const StepperConfig& cfg) {
  if (v.op != op) throw std::invalid_argument("stepper: grid function lives on another operator");
  if (!(cfg.delta > 0.0)) throw std::invalid_argument("stepper: delta must be positive");
}

}  // namespace detail

inline GridFunction apply_pade_step(const GridFunction& u, double t, double k, const OperatorPtr& op,
                                    const StepperConfig& cfg) {
  detail::check_config(op, u, cfg);
  PadeStepper stepper(op, cfg.alpha, cfg.m, cfg.delta, cfg.solver);
  return {op, stepper.step(u.coeffs, t, k)};
}

/// Geometric-mesh scheme; `stats` receives step and stability counters when given.
inline GridFunction run_grm(const GridFunction& v, const OperatorPtr& op, const StepperConfig& cfg,
                            StepperStats* stats = nullptr) {
  detail::check_config(op, v, cfg);
  if (!cfg.mesh.is_geometric()) throw std::invalid_argument("run_grm: mesh is not geometric");
  PadeStepper stepper(op, cfg.alpha, cfg.m, cfg.delta, cfg.solver);
  GridFunction out{op, stepper.run(v.coeffs, cfg.mesh)};
  if (stats) *stats = stepper.stats();
  return out;
}

inline GridFunction run_um(const GridFunction& v, const OperatorPtr& op, const StepperConfig& cfg,
                           StepperStats* stats = nullptr) {
  detail::check_config(op, v, cfg);
  if (cfg.mesh.is_geometric()) throw std::invalid_argument("run_um: mesh is not uniform");
  PadeStepper stepper(op, cfg.alpha, cfg.m, cfg.delta, cfg.solver);
  GridFunction out{op, stepper.run(v.coeffs, cfg.mesh)};
  if (stats) *stats = stepper.stats();
  return out;
}

}  // namespace fracpade
