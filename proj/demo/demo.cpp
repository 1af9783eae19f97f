// Approximates A_h^-alpha pi_h f for f(x) = min(x, 1 - x) on a uniform mesh and
// compares GRM and UM against the spectral reference at equal solve counts.

#include <cstdio>

#include "fracpade/fracpade.hpp"

using namespace fracpade;

int main() {
  const double alpha = 0.5;
  const int m = 2;
  const OperatorPtr op = assemble_1d(uniform_nodes(200));
  const GridFunction f = l2_project(op, DataCase::C);

  const SpectralBounds bounds = estimate_spectral_bounds(op);
  const double delta = 0.5 * bounds.lambda_min_est;
  const int L = experiment_levels(op->min_cell_width());
  std::printf("lambda in [%.4g, %.4g], delta = %.4g, L = %d\n", bounds.lambda_min_est, bounds.lambda_max_est, delta, L);

  const GridFunction ref = reference_power(eig_1d(op), f, alpha);
  const double ref_norm = m_norm(ref);
  std::printf("%6s %12s %12s\n", "steps", "GRM", "UM");
  for (int N = 1; N <= 16; N *= 2) {
    const GridFunction g = run_grm(f, op, {alpha, m, delta, build_geometric_mesh(2.0, N, L)});
    const GridFunction u = run_um(f, op, {alpha, m, delta, build_uniform_mesh((L + 1) * N)});
    std::printf("%6d %12.3e %12.3e\n", (L + 1) * N, m_norm(*op, g.coeffs - ref.coeffs) / ref_norm,
                m_norm(*op, u.coeffs - ref.coeffs) / ref_norm);
  }
}
