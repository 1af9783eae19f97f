#pragma once

// SPD linear solves: LDL^T for symmetric tridiagonal systems, Jacobi-preconditioned
// conjugate gradients, and sparse LDL^T for everything else. `PencilSolver`
// repeatedly solves (a K + b M) x = rhs for one operator with varying a, b > 0.

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/SparseCholesky>

#include "fracpade/fem.hpp"

namespace fracpade {

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct SolverPolicy {
  enum class Kind { Direct, Iterative };
  Kind kind = Kind::Direct;
  double rel_tol = 1e-12;  // iterative only
  int max_iter = 50000;

  static SolverPolicy direct() { return {}; }
  static SolverPolicy iterative(double tol = 1e-12) { return {Kind::Iterative, tol}; }
};

inline std::string describe(const SolverPolicy& p) {
  if (p.kind == SolverPolicy::Kind::Direct) return "direct";
  std::ostringstream os;
  os << "pcg(tol=" << p.rel_tol << ")";
  return os.str();
}

/// LDL^T factorization of a symmetric tridiagonal matrix.
class TridiagonalLdlt {
 public:
  TridiagonalLdlt() = default;
  TridiagonalLdlt(const Vector& diag, const Vector& off) { factor(diag, off); }

  void factor(const Vector& diag, const Vector& off) {
    const auto n = diag.size();
    d_.resize(n);
    l_.resize(n > 0 ? n - 1 : 0);
    d_[0] = diag[0];
    if (!(d_[0] > 0.0)) throw SolverError("tridiagonal LDL^T: matrix not positive definite", 0.0);
    for (Eigen::Index i = 1; i < n; ++i) {
      l_[i - 1] = off[i - 1] / d_[i - 1];
      d_[i] = diag[i] - l_[i - 1] * off[i - 1];
      if (!(d_[i] > 0.0)) throw SolverError("tridiagonal LDL^T: matrix not positive definite", 0.0);
    }
  }

  void solve_in_place(Vector& x) const {
    const auto n = d_.size();
    for (Eigen::Index i = 1; i < n; ++i) x[i] -= l_[i - 1] * x[i - 1];
    for (Eigen::Index i = 0; i < n; ++i) x[i] /= d_[i];
    for (Eigen::Index i = n - 1; i-- > 0;) x[i] -= l_[i] * x[i + 1];
  }

 private:
  Vector d_, l_;
};

/// Diagonal and first off-diagonal of a tridiagonal sparse matrix; throws otherwise.
inline std::pair<Vector, Vector> tridiagonal_bands(const SparseMatrix& A) {
  const auto n = A.rows();
  Vector diag = Vector::Zero(n), off = Vector::Zero(n > 0 ? n - 1 : 0);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      const auto r = it.row(), c = it.col();
      if (r == c)
        diag[r] = it.value();
      else if (r == c + 1)
        off[c] = it.value();
      else if (c != r + 1)
        throw std::invalid_argument("tridiagonal_bands: matrix is not tridiagonal");
    }
  return {diag, off};
}

inline bool is_tridiagonal(const SparseMatrix& A) {
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      if (std::abs(it.row() - it.col()) > 1) return false;
  return true;
}

struct IterativeReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned CG. `x` holds the initial guess on entry.
inline IterativeReport pcg(const SparseMatrix& A, const Vector& b, Vector& x, double rel_tol, int max_iter) {
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    return {};
  }
  if (x.size() != b.size()) x = Vector::Zero(b.size());
  const Vector inv_diag = A.diagonal().cwiseInverse();
  Vector r = b - A * x;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  Vector Ap(b.size());
  for (int it = 0; it < max_iter; ++it) {
    double res = r.norm() / bnorm;
    if (res <= rel_tol) {
      // Guard against drift of the recursive residual.
      res = (b - A * x).norm() / bnorm;
      if (res <= rel_tol) return {it, res};
      r = b - A * x;
      z = inv_diag.cwiseProduct(r);
      p = z;
      rz = r.dot(z);
    }
    Ap.noalias() = A * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) throw SolverError("pcg: breakdown (matrix not positive definite)", res);
    const double step = rz / pAp;
    x += step * p;
    r -= step * Ap;
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  const double res = (b - A * x).norm() / bnorm;
  if (res <= rel_tol) return {max_iter, res};
  std::ostringstream os;
  os << "pcg: no convergence after " << max_iter << " iterations, relative residual " << res;
  throw SolverError(os.str(), res);
}

/// Solve A x = b for SPD A under the given policy.
inline Vector solve_spd(const SparseMatrix& A, const Vector& b, const SolverPolicy& policy = {}) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw std::invalid_argument("solve_spd: dimension mismatch");
  if (policy.kind == SolverPolicy::Kind::Iterative) {
    Vector x = Vector::Zero(b.size());
    pcg(A, b, x, policy.rel_tol, policy.max_iter);
    return x;
  }
  if (is_tridiagonal(A)) {
    auto [diag, off] = tridiagonal_bands(A);
    Vector x = b;
    TridiagonalLdlt(diag, off).solve_in_place(x);
    return x;
  }
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw SolverError("solve_spd: sparse LDL^T factorization failed", 0.0);
  return ldlt.solve(b);
}

struct SolveStats {
  long solves = 0;
  long iterations = 0;
  double max_relative_residual = 0.0;
};

/// Solves (a K + b M) x = rhs for a fixed operator and varying a, b.
class PencilSolver {
 public:
  PencilSolver(OperatorPtr op, SolverPolicy policy) : op_(std::move(op)), policy_(policy) {
    tridiagonal_ = op_->dim() == 1 && is_tridiagonal(op_->stiffness()) && is_tridiagonal(op_->mass());
    if (tridiagonal_) {
      std::tie(kd_, ko_) = tridiagonal_bands(op_->stiffness());
      std::tie(md_, mo_) = tridiagonal_bands(op_->mass());
    }
    if (policy_.kind == SolverPolicy::Kind::Direct && !tridiagonal_) {
      ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>();
      pattern_ = op_->stiffness() + op_->mass();
      ldlt_->analyzePattern(pattern_);
    }
  }

  const SolverPolicy& policy() const { return policy_; }
  const SolveStats& stats() const { return stats_; }

  /// `x` is the initial guess for iterative policies and receives the solution.
  void solve(double a, double b, const Vector& rhs, Vector& x) {
    ++stats_.solves;
    if (policy_.kind == SolverPolicy::Kind::Direct && tridiagonal_) {
      tri_.factor(a * kd_ + b * md_, a * ko_ + b * mo_);
      x = rhs;
      tri_.solve_in_place(x);
      return;
    }
    const SparseMatrix G = a * op_->stiffness() + b * op_->mass();
    if (policy_.kind == SolverPolicy::Kind::Direct) {
      ldlt_->factorize(G);
      if (ldlt_->info() != Eigen::Success) throw SolverError("PencilSolver: sparse factorization failed", 0.0);
      x = ldlt_->solve(rhs);
      return;
    }
    const auto rep = pcg(G, rhs, x, policy_.rel_tol, policy_.max_iter);
    stats_.iterations += rep.iterations;
    stats_.max_relative_residual = std::max(stats_.max_relative_residual, rep.relative_residual);
  }

 private:
  OperatorPtr op_;
  SolverPolicy policy_;
  bool tridiagonal_ = false;
  Vector kd_, ko_, md_, mo_;
  TridiagonalLdlt tri_;
  SparseMatrix pattern_;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
  SolveStats stats_;
};

/// Coefficients c with M c = b.
inline Vector mass_solve(const DiscreteOperator& op, const Vector& b) { return solve_spd(op.mass(), b); }

}  // namespace fracpade
