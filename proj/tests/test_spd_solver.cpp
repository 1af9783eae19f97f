#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "fracpade/fem.hpp"
#include "fracpade/spd_solver.hpp"

using namespace fracpade;

namespace {

SparseMatrix random_spd(int n, unsigned seed, double density = 0.1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1), pick(0, 1);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (pick(rng) < density) R(i, j) = u(rng);
  const Eigen::MatrixXd A = R.transpose() * R + Eigen::MatrixXd::Identity(n, n);
  return A.sparseView();
}

Vector random_vector(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vector v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

double rel_residual(const SparseMatrix& A, const Vector& x, const Vector& b) { return (A * x - b).norm() / b.norm(); }

}  // namespace

TEST(SolveSpd, IdentityReturnsRhs) {
  SparseMatrix I(20, 20);
  I.setIdentity();
  const Vector b = random_vector(20, 1);
  EXPECT_EQ(solve_spd(I, b), b);
  EXPECT_LE((solve_spd(I, b, SolverPolicy::iterative()) - b).norm(), 1e-15 * b.norm());
}

TEST(SolveSpd, PoissonMatchesParabola) {
  double prev = 0.0;
  for (int cells : {50, 100, 200}) {
    const auto op = assemble_1d(uniform_nodes(cells));
    const Vector b = op->mass() * Vector::Ones(op->dofs());
    const Vector u = solve_spd(op->stiffness(), b);
    // K alone has condition ~ 1/h^2, so the relative residual sits at eps cond; check backward error.
    const double backward = (op->stiffness() * u - b).norm() /
                            (Eigen::MatrixXd(op->stiffness()).operatorNorm() * u.norm() + b.norm());
    EXPECT_LE(backward, 1e-15);
    double err = 0.0;
    for (int d = 0; d < op->dofs(); ++d) {
      const double x = op->dof_coord(d)[0];
      err = std::max(err, std::abs(u[d] - x * (1 - x) / 2));
    }
    const double h = 1.0 / cells;
    EXPECT_LE(err, h * h);
    if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.2);
    prev = err;
  }
}

TEST(SolveSpd, RandomDenseSpd) {
  const SparseMatrix A = random_spd(50, 11);
  const Vector b = random_vector(50, 12);
  EXPECT_LE(rel_residual(A, solve_spd(A, b), b), 1e-12);
  EXPECT_LE(rel_residual(A, solve_spd(A, b, SolverPolicy::iterative(1e-13)), b), 1e-12);
}

TEST(SolveSpd, RandomTridiagonal) {
  const int n = 200;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.5 + u(rng));
    if (i + 1 < n) {
      const double o = u(rng);
      t.emplace_back(i, i + 1, o);
      t.emplace_back(i + 1, i, o);
    }
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  ASSERT_TRUE(is_tridiagonal(A));
  const Vector b = random_vector(n, 6);
  EXPECT_LE(rel_residual(A, solve_spd(A, b), b), 1e-13);
}

TEST(SolveSpd, IndefiniteTridiagonalThrows) {
  SparseMatrix A(3, 3);
  A.insert(0, 0) = 1.0;
  A.insert(1, 1) = -1.0;
  A.insert(2, 2) = 1.0;
  EXPECT_THROW(solve_spd(A, Vector::Ones(3)), SolverError);
}

TEST(SolveSpd, PcgIterationCapThrowsWithResidual) {
  const auto op = assemble_2d_tensor(20);
  const Vector b = random_vector(op->dofs(), 9);
  SolverPolicy p = SolverPolicy::iterative();
  p.max_iter = 1;
  try {
    solve_spd(op->stiffness(), b, p);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_GT(e.residual(), 1e-12);
  }
}

TEST(SolveSpd, DimensionMismatch) {
  SparseMatrix I(4, 4);
  I.setIdentity();
  EXPECT_THROW(solve_spd(I, Vector::Ones(3)), std::invalid_argument);
}

TEST(Pcg, ZeroRhsAndWarmStart) {
  const SparseMatrix A = random_spd(30, 2);
  Vector x = Vector::Ones(30);
  const auto rep = pcg(A, Vector::Zero(30), x, 1e-12, 100);
  EXPECT_EQ(x, Vector::Zero(30));
  EXPECT_EQ(rep.iterations, 0);
  const Vector b = random_vector(30, 3);
  Vector exact = solve_spd(A, b);
  Vector warm = exact;
  EXPECT_EQ(pcg(A, b, warm, 1e-10, 100).iterations, 0);
}

TEST(TridiagonalBands, RejectsWideMatrices) {
  const auto op = assemble_2d_tensor(4);
  EXPECT_FALSE(is_tridiagonal(op->stiffness()));
  EXPECT_THROW(tridiagonal_bands(op->stiffness()), std::invalid_argument);
}

TEST(PencilSolver, AllPathsAgree) {
  for (const OperatorPtr& op : {assemble_1d(uniform_nodes(64)), assemble_2d_tensor(12)}) {
    PencilSolver direct(op, SolverPolicy::direct());
    PencilSolver iterative(op, SolverPolicy::iterative(1e-13));
    const Vector rhs = random_vector(op->dofs(), 4);
    for (auto [a, b] : {std::pair{1.0, 0.5}, {0.01, 3.0}, {2.5, 1e-3}}) {
      const SparseMatrix G = a * op->stiffness() + b * op->mass();
      Vector xd, xi = Vector::Zero(op->dofs());
      direct.solve(a, b, rhs, xd);
      iterative.solve(a, b, rhs, xi);
      EXPECT_LE(rel_residual(G, xd, rhs), 1e-13);
      EXPECT_LE(rel_residual(G, xi, rhs), 1e-12);
      EXPECT_LE((xd - xi).norm(), 1e-9 * xd.norm());
    }
    EXPECT_EQ(direct.stats().solves, 3);
    EXPECT_EQ(iterative.stats().solves, 3);
    EXPECT_GT(iterative.stats().iterations, 0);
    EXPECT_LE(iterative.stats().max_relative_residual, 1e-13);
  }
}

TEST(PencilSolver, MassSolve) {
  const auto op = assemble_1d(uniform_nodes(30));
  const Vector c = random_vector(op->dofs(), 8);
  EXPECT_LE((mass_solve(*op, op->mass() * c) - c).norm(), 1e-13 * c.norm());
}

TEST(SolverPolicy, Describe) {
  EXPECT_EQ(describe(SolverPolicy::direct()), "direct");
  EXPECT_EQ(describe(SolverPolicy::iterative(1e-10)), "pcg(tol=1e-10)");
}
