#pragma once

// Piecewise-linear (1D) and bilinear tensor-product (2D) finite elements for
// A(w, phi) = (grad w, grad phi) with homogeneous Dirichlet conditions.
// Only interior nodes carry degrees of freedom; A_h = M^-1 K in coefficient space.
//
// 2D dofs are numbered d = i + n1 * j for the node (x_i, y_j).

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

namespace fracpade {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

class DiscreteOperator;
using OperatorPtr = std::shared_ptr<const DiscreteOperator>;

class DiscreteOperator {
 public:
  int dim() const { return dim_; }
  int dofs() const { return static_cast<int>(mass_.rows()); }
  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  /// Half bandwidth in the natural dof ordering.
  int bandwidth() const { return bandwidth_; }

  /// All mesh nodes along one axis, boundary included.
  const std::vector<double>& nodes() const { return nodes_; }

  /// The 1D operator a 2D tensor operator was built from; null in 1D.
  const OperatorPtr& tensor_factor() const { return factor_; }

  /// False for operators built from raw matrices by make_operator.
  bool has_mesh() const { return !nodes_.empty(); }

  /// Coordinates of dof d (y = 0 in 1D).
  std::array<double, 2> dof_coord(int d) const {
    if (!has_mesh()) throw std::logic_error("dof_coord: operator has no mesh");
    if (dim_ == 1) return {nodes_[d + 1], 0.0};
    const int n1 = factor_->dofs();
    return {nodes_[d % n1 + 1], nodes_[d / n1 + 1]};
  }

  /// Smallest element width along an axis.
  double min_cell_width() const {
    if (!has_mesh()) throw std::logic_error("min_cell_width: operator has no mesh");
    double hmin = 1.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) hmin = std::min(hmin, nodes_[i] - nodes_[i - 1]);
    return hmin;
  }

  friend OperatorPtr assemble_1d(std::span<const double> nodes);
  friend OperatorPtr assemble_2d_tensor(int n_per_side);
  friend OperatorPtr make_operator(SparseMatrix mass, SparseMatrix stiffness);

 private:
  DiscreteOperator() = default;

  int dim_ = 1;
  SparseMatrix mass_, stiffness_;
  int bandwidth_ = 1;
  std::vector<double> nodes_;
  OperatorPtr factor_;
};

/// Coefficient vector in the nodal basis of one operator.
struct GridFunction {
  OperatorPtr op;
  Vector coeffs;

  GridFunction() = default;
  GridFunction(OperatorPtr op_, Vector c) : op(std::move(op_)), coeffs(std::move(c)) {
    if (!op) throw std::invalid_argument("GridFunction: null operator");
    if (coeffs.size() != op->dofs()) throw std::invalid_argument("GridFunction: length does not match dof count");
  }

  static GridFunction zero(const OperatorPtr& op) { return {op, Vector::Zero(op->dofs())}; }
};

inline OperatorPtr assemble_1d(std::span<const double> nodes) {
  if (nodes.size() < 3) throw std::invalid_argument("assemble_1d: need at least 3 nodes");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1])) throw std::invalid_argument("assemble_1d: nodes must be strictly increasing");

  const int n = static_cast<int>(nodes.size()) - 2;
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(3 * n);
  mt.reserve(3 * n);
  // Element e spans [nodes[e], nodes[e+1]]; its local nodes are dofs e-1 and e.
  for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
    const double h = nodes[e + 1] - nodes[e];
    const int a = static_cast<int>(e) - 1, b = static_cast<int>(e);
    const bool a_in = a >= 0, b_in = b < n;
    if (a_in) {
      kt.emplace_back(a, a, 1.0 / h);
      mt.emplace_back(a, a, h / 3.0);
    }
    if (b_in) {
      kt.emplace_back(b, b, 1.0 / h);
      mt.emplace_back(b, b, h / 3.0);
    }
    if (a_in && b_in) {
      kt.emplace_back(a, b, -1.0 / h);
      kt.emplace_back(b, a, -1.0 / h);
      mt.emplace_back(a, b, h / 6.0);
      mt.emplace_back(b, a, h / 6.0);
    }
  }
  auto op = std::shared_ptr<DiscreteOperator>(new DiscreteOperator());
  op->dim_ = 1;
  op->nodes_.assign(nodes.begin(), nodes.end());
  op->stiffness_.resize(n, n);
  op->mass_.resize(n, n);
  op->stiffness_.setFromTriplets(kt.begin(), kt.end());
  op->mass_.setFromTriplets(mt.begin(), mt.end());
  op->bandwidth_ = 1;
  return op;
}

/// A one-dimensional operator from an arbitrary SPD pair (M, K) without a mesh.
inline OperatorPtr make_operator(SparseMatrix mass, SparseMatrix stiffness) {
  if (mass.rows() != mass.cols() || stiffness.rows() != stiffness.cols() || mass.rows() != stiffness.rows() ||
      mass.rows() == 0)
    throw std::invalid_argument("make_operator: M and K must be square and of equal nonzero size");
  auto op = std::shared_ptr<DiscreteOperator>(new DiscreteOperator());
  op->dim_ = 1;
  op->mass_ = std::move(mass);
  op->stiffness_ = std::move(stiffness);
  op->mass_.makeCompressed();
  op->stiffness_.makeCompressed();
  int bw = 0;
  for (const SparseMatrix* A : {&op->mass_, &op->stiffness_})
    for (int k = 0; k < A->outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(*A, k); it; ++it) bw = std::max(bw, static_cast<int>(std::abs(it.row() - it.col())));
  op->bandwidth_ = bw;
  return op;
}

inline std::vector<double> uniform_nodes(int cells) {
  if (cells < 2) throw std::invalid_argument("uniform_nodes: need at least 2 cells");
  std::vector<double> x(cells + 1);
  for (int i = 0; i <= cells; ++i) x[i] = static_cast<double>(i) / cells;
  return x;
}

/// Uniform mesh of (0,1)^2 with `n_per_side` cells per side: K2 = K(x)M + M(x)K, M2 = M(x)M.
inline OperatorPtr assemble_2d_tensor(int n_per_side) {
  if (n_per_side < 3) throw std::invalid_argument("assemble_2d_tensor: n_per_side must be >= 3");
  const auto x = uniform_nodes(n_per_side);
  OperatorPtr factor = assemble_1d(x);
  const SparseMatrix& K = factor->stiffness();
  const SparseMatrix& M = factor->mass();

  auto op = std::shared_ptr<DiscreteOperator>(new DiscreteOperator());
  op->dim_ = 2;
  op->nodes_ = x;
  op->factor_ = factor;
  op->mass_ = Eigen::kroneckerProduct(M, M).eval();
  op->stiffness_ = SparseMatrix(Eigen::kroneckerProduct(K, M).eval()) + SparseMatrix(Eigen::kroneckerProduct(M, K).eval());
  op->mass_.makeCompressed();
  op->stiffness_.makeCompressed();
  op->bandwidth_ = factor->dofs() + 1;
  return op;
}

// ---------------------------------------------------------------------------
// Data functions

enum class DataCase { A, B, C, D, E, F };

inline DataCase parse_data_case(const std::string& tag) {
  if (tag.size() == 1) {
    switch (tag[0]) {
      case 'a': return DataCase::A;
      case 'b': return DataCase::B;
      case 'c': return DataCase::C;
      case 'd': return DataCase::D;
      case 'e': return DataCase::E;
      case 'f': return DataCase::F;
      default: break;
    }
  }
  throw std::invalid_argument("unknown data case '" + tag + "' (expected a..f)");
}

inline char to_char(DataCase c) { return static_cast<char>('a' + static_cast<int>(c)); }

inline int data_case_dim(DataCase c) { return c == DataCase::E || c == DataCase::F ? 2 : 1; }

/// Points where the data function has a kink or jump, per axis.
inline std::vector<double> data_case_breakpoints(DataCase c) {
  switch (c) {
    case DataCase::C: return {0.5};
    case DataCase::F: return {0.25, 0.75};
    default: return {};
  }
}

inline double data_case(DataCase c, std::span<const double> p) {
  if (static_cast<int>(p.size()) != data_case_dim(c))
    throw std::invalid_argument(std::string("data_case: point dimension does not match case ") + to_char(c));
  const double x = p[0];
  switch (c) {
    case DataCase::A:
      if (x <= 0.0 || x >= 1.0) return 0.0;
      return std::exp(-1.0 / x - 1.0 / (1.0 - x) + 4.0);
    case DataCase::B: return x * (1.0 - x);
    case DataCase::C: return std::min(x, 1.0 - x);
    case DataCase::D: return 1.0;
    case DataCase::E: return x * (1.0 - x) * p[1] * (1.0 - p[1]);
    case DataCase::F: return (x >= 0.25 && x <= 0.75 && p[1] >= 0.25 && p[1] <= 0.75) ? 1.0 : 0.0;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// L2 projection

namespace detail {

inline constexpr std::array<double, 5> kGaussNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                                      0.5384693101056831, 0.9061798459386640};
inline constexpr std::array<double, 5> kGaussWeights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                        0.4786286704993665, 0.2369268850561891};

/// Sub-intervals of [a, b] split at the breakpoints strictly inside it.
inline std::vector<std::array<double, 2>> split_interval(double a, double b, std::span<const double> breaks) {
  std::vector<std::array<double, 2>> parts;
  double lo = a;
  for (double c : breaks)
    if (c > a && c < b) {
      parts.push_back({lo, c});
      lo = c;
    }
  parts.push_back({lo, b});
  return parts;
}

/// 5-point Gauss rule on [a, b], as (point, weight) pairs.
inline std::vector<std::array<double, 2>> gauss_rule(double a, double b, std::span<const double> breaks) {
  std::vector<std::array<double, 2>> rule;
  for (auto [lo, hi] : split_interval(a, b, breaks)) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int q = 0; q < 5; ++q) rule.push_back({mid + half * kGaussNodes[q], half * kGaussWeights[q]});
  }
  return rule;
}

}  // namespace detail

/// Load vector b_i = int f phi_i, with elements split at `breaks` (per axis in 2D).
inline Vector load_vector(const DiscreteOperator& op, const std::function<double(std::span<const double>)>& f,
                          std::span<const double> breaks) {
  const auto& x = op.nodes();
  const int cells = static_cast<int>(x.size()) - 1;
  Vector b = Vector::Zero(op.dofs());
  if (op.dim() == 1) {
    for (int e = 0; e < cells; ++e) {
      const double h = x[e + 1] - x[e];
      double bl = 0, br = 0;
      for (auto [p, w] : detail::gauss_rule(x[e], x[e + 1], breaks)) {
        const double fp = f(std::span<const double>(&p, 1));
        bl += w * fp * (x[e + 1] - p) / h;
        br += w * fp * (p - x[e]) / h;
      }
      if (e >= 1) b[e - 1] += bl;
      if (e < cells - 1) b[e] += br;
    }
    return b;
  }
  const int n1 = cells - 1;
  std::vector<std::vector<std::array<double, 2>>> rules(cells);
  for (int e = 0; e < cells; ++e) rules[e] = detail::gauss_rule(x[e], x[e + 1], breaks);
  for (int ey = 0; ey < cells; ++ey) {
    const double hy = x[ey + 1] - x[ey];
    for (int ex = 0; ex < cells; ++ex) {
      const double hx = x[ex + 1] - x[ex];
      std::array<double, 4> local{};  // (x0,y0) (x1,y0) (x0,y1) (x1,y1)
      for (auto [py, wy] : rules[ey]) {
        const double ly[2] = {(x[ey + 1] - py) / hy, (py - x[ey]) / hy};
        for (auto [px, wx] : rules[ex]) {
          const double pt[2] = {px, py};
          const double fw = f(std::span<const double>(pt, 2)) * wx * wy;
          const double lx[2] = {(x[ex + 1] - px) / hx, (px - x[ex]) / hx};
          for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c) local[a + 2 * c] += fw * lx[a] * ly[c];
        }
      }
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) {
          const int i = ex + a - 1, j = ey + c - 1;
          if (i >= 0 && i < n1 && j >= 0 && j < n1) b[i + n1 * j] += local[a + 2 * c];
        }
    }
  }
  return b;
}

inline double m_inner(const DiscreteOperator& op, const Vector& u, const Vector& v) { return u.dot(op.mass() * v); }

inline double m_inner(const GridFunction& u, const GridFunction& v) {
  if (u.op != v.op) throw std::invalid_argument("m_inner: grid functions live on different operators");
  return m_inner(*u.op, u.coeffs, v.coeffs);
}

inline double m_norm(const DiscreteOperator& op, const Vector& u) { return std::sqrt(std::max(0.0, m_inner(op, u, u))); }

inline double m_norm(const GridFunction& u) { return m_norm(*u.op, u.coeffs); }

// ---------------------------------------------------------------------------
// Debug export

/// One "row col value" line per stored entry, 0-based indices.
inline void write_matrix_coo(std::ostream& os, const SparseMatrix& A) {
  os.precision(17);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

inline void write_dof_coords_csv(std::ostream& os, const DiscreteOperator& op) {
  os.precision(17);
  os << (op.dim() == 1 ? "dof,x\n" : "dof,x,y\n");
  for (int d = 0; d < op.dofs(); ++d) {
    const auto c = op.dof_coord(d);
    os << d << ',' << c[0];
    if (op.dim() == 2) os << ',' << c[1];
    os << '\n';
  }
}

}  // namespace fracpade
