#pragma once

// Ground truth through the generalized eigendecomposition K psi = lambda M psi
// with M-orthonormal modes:
//
//   A_h^-alpha v = sum_j lambda_j^-alpha (v, psi_j)_M psi_j
//   ||v||_{s,h}  = ( sum_j lambda_j^s (v, psi_j)_M^2 )^(1/2)
//
// For tensor 2D operators the modes are psi_i (x) psi_j with eigenvalues
// lambda_i + lambda_j and are never formed densely.

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "fracpade/fem.hpp"

namespace fracpade {

inline constexpr int kMaxDenseEigenDofs = 4000;

class SpectralDecomposition {
 public:
  const OperatorPtr& op() const { return op_; }
  bool is_tensor() const { return tensor_; }
  int size() const { return static_cast<int>(lambdas_.size()); }

  /// Eigenvalues; ascending for dense decompositions, dof-style order
  /// (i + n1 j -> lambda_i + lambda_j) for tensor ones.
  const Vector& lambdas() const { return lambdas_; }

  /// (v, psi_j)_M for every mode, in the order of lambdas().
  Vector coefficients(const Vector& v) const {
    if (v.size() != op_->dofs()) throw std::invalid_argument("coefficients: length mismatch");
    if (!tensor_) return modes_.transpose() * (op_->mass() * v);
    const auto n1 = modes_.rows();
    const Eigen::Map<const Eigen::MatrixXd> V(v.data(), n1, n1);
    const Eigen::MatrixXd MPsi = mass1_ * modes_;
    Eigen::MatrixXd C = MPsi.transpose() * V * MPsi;
    return Eigen::Map<const Vector>(C.data(), C.size());
  }

  /// sum_j c_j psi_j.
  Vector synthesize(const Vector& c) const {
    if (c.size() != lambdas_.size()) throw std::invalid_argument("synthesize: length mismatch");
    if (!tensor_) return modes_ * c;
    const auto n1 = modes_.rows();
    const Eigen::Map<const Eigen::MatrixXd> C(c.data(), n1, n1);
    Eigen::MatrixXd V = modes_ * C * modes_.transpose();
    return Eigen::Map<const Vector>(V.data(), V.size());
  }

  Vector mode(int j) const {
    if (!tensor_) return modes_.col(j);
    Vector e = Vector::Zero(size());
    e[j] = 1.0;
    return synthesize(e);
  }

  friend SpectralDecomposition eig_1d(const OperatorPtr& op);
  friend SpectralDecomposition eig_2d_tensor(const OperatorPtr& op);

 private:
  OperatorPtr op_;
  bool tensor_ = false;
  Vector lambdas_;
  Eigen::MatrixXd modes_;  // dense: all modes; tensor: 1D factor modes
  Eigen::MatrixXd mass1_;  // tensor: dense 1D mass matrix
};

/// Dense decomposition by Cholesky reduction: M = L L^T, C = L^-1 K L^-T, psi = L^-T y.
inline SpectralDecomposition eig_1d(const OperatorPtr& op) {
  if (op->dofs() > kMaxDenseEigenDofs) throw std::invalid_argument("eig_1d: dof count above the dense eigensolve cap");
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> chol(op->mass());
  if (chol.info() != Eigen::Success) throw std::runtime_error("eig_1d: mass matrix not positive definite");
  const Eigen::MatrixXd K(op->stiffness());
  Eigen::MatrixXd X = chol.matrixL().solve(K);
  Eigen::MatrixXd C = chol.matrixL().solve(Eigen::MatrixXd(X.transpose()));
  C = 0.5 * (C + C.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success) throw std::runtime_error("eig_1d: symmetric eigensolve failed");
  SpectralDecomposition d;
  d.op_ = op;
  d.lambdas_ = es.eigenvalues();
  d.modes_ = chol.matrixU().solve(es.eigenvectors());
  return d;
}

/// Decomposition of a tensor 2D operator from the eigenpairs of its 1D factor.
inline SpectralDecomposition eig_2d_tensor(const OperatorPtr& op) {
  if (op->dim() != 2 || !op->tensor_factor()) throw std::invalid_argument("eig_2d_tensor: not a tensor 2D operator");
  const SpectralDecomposition f = eig_1d(op->tensor_factor());
  const auto n1 = f.size();
  SpectralDecomposition d;
  d.op_ = op;
  d.tensor_ = true;
  d.modes_ = f.modes_;
  d.mass1_ = Eigen::MatrixXd(op->tensor_factor()->mass());
  d.lambdas_.resize(static_cast<Eigen::Index>(n1) * n1);
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n1; ++i) d.lambdas_[i + n1 * j] = f.lambdas_[i] + f.lambdas_[j];
  return d;
}

inline SpectralDecomposition decompose(const OperatorPtr& op) {
  return op->dim() == 2 && op->tensor_factor() ? eig_2d_tensor(op) : eig_1d(op);
}

/// sum_j lambda_j^-alpha (v, psi_j)_M psi_j.
inline GridFunction reference_power(const SpectralDecomposition& d, const GridFunction& v, double alpha) {
  if (v.op != d.op()) throw std::invalid_argument("reference_power: grid function lives on another operator");
  Vector c = d.coefficients(v.coeffs);
  for (int j = 0; j < c.size(); ++j) c[j] *= std::pow(d.lambdas()[j], -alpha);
  return {v.op, d.synthesize(c)};
}

inline double discrete_sobolev_norm(const SpectralDecomposition& d, const GridFunction& v, double s) {
  if (v.op != d.op()) throw std::invalid_argument("discrete_sobolev_norm: grid function lives on another operator");
  const Vector c = d.coefficients(v.coeffs);
  double acc = 0.0;
  for (int j = 0; j < c.size(); ++j) acc += std::pow(d.lambdas()[j], s) * c[j] * c[j];
  return std::sqrt(acc);
}

}  // namespace fracpade
