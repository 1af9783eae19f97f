#pragma once

#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "fracpade/fem.hpp"
#include "fracpade/spd_solver.hpp"

namespace fracpade {

/// L2 projection of f onto the FEM space: M c = b, b_i = int f phi_i.
/// `breaks` lists kinks or jumps of f per axis; elements are split there so that
/// the 5-point Gauss rule sees a smooth integrand.
inline GridFunction l2_project(const OperatorPtr& op, const std::function<double(std::span<const double>)>& f,
                               std::span<const double> breaks = {}) {
  const Vector b = load_vector(*op, f, breaks);
  Vector c = mass_solve(*op, b);
  const double bnorm = b.norm();
  const double res = (op->mass() * c - b).norm();
  if (bnorm > 0.0 && res > 1e-12 * bnorm) {
    std::ostringstream os;
    os << "l2_project: mass solve residual " << res / bnorm << " above 1e-12";
    throw SolverError(os.str(), res / bnorm);
  }
  return {op, std::move(c)};
}

inline GridFunction l2_project(const OperatorPtr& op, DataCase c) {
  if (data_case_dim(c) != op->dim())
    throw std::invalid_argument(std::string("l2_project: data case ") + to_char(c) + " does not match operator dimension");
  const auto breaks = data_case_breakpoints(c);
  return l2_project(op, [c](std::span<const double> p) { return data_case(c, p); }, breaks);
}

}  // namespace fracpade
