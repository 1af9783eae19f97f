#pragma once

// Convergence studies: time-stepping error tables in 1D and 2D, the
// spatial-refinement study on boundary-graded meshes, and scalar sweeps.
// Every row carries delta and the solver policy so a CSV is self-describing.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracpade/fem.hpp"
#include "fracpade/operator_stepper.hpp"
#include "fracpade/projection.hpp"
#include "fracpade/scalar_stepper.hpp"
#include "fracpade/spectral.hpp"
#include "fracpade/time_mesh.hpp"

namespace fracpade {

/// log2(E_n / E_2n).
inline double convergence_order(double e_n, double e_2n) {
  if (!(e_n > 0.0) || !(e_2n > 0.0)) throw std::invalid_argument("convergence_order: errors must be positive");
  return std::log2(e_n / e_2n);
}

enum class SchemeSelection { GRM, UM, Both };

inline SchemeSelection parse_scheme_selection(const std::string& s) {
  if (s == "grm" || s == "GRM") return SchemeSelection::GRM;
  if (s == "um" || s == "UM") return SchemeSelection::UM;
  if (s == "both") return SchemeSelection::Both;
  throw std::invalid_argument("unknown scheme '" + s + "' (expected grm, um or both)");
}

inline bool includes(SchemeSelection sel, Scheme s) {
  return sel == SchemeSelection::Both || (sel == SchemeSelection::GRM) == (s == Scheme::GRM);
}

struct LevelPolicy {
  enum class Kind { Theorem, Experiment, Fixed };
  Kind kind = Kind::Experiment;
  int fixed = 0;

  static LevelPolicy theorem() { return {Kind::Theorem, 0}; }
  static LevelPolicy experiment() { return {Kind::Experiment, 0}; }
  static LevelPolicy fixed_levels(int L) {
    if (L < 1) throw std::invalid_argument("LevelPolicy: fixed L must be >= 1");
    return {Kind::Fixed, L};
  }

  /// L for an operator with smallest cell `h` and largest eigenvalue estimate `lambda_max`.
  int levels(double h, double lambda_max) const {
    switch (kind) {
      case Kind::Theorem: return static_cast<int>(std::ceil(std::log2(lambda_max)));
      case Kind::Experiment: return experiment_levels(h);
      case Kind::Fixed: return fixed;
    }
    return fixed;
  }
};

/// "theorem", "experiment" or an integer L.
inline LevelPolicy parse_level_policy(const std::string& s) {
  if (s == "theorem") return LevelPolicy::theorem();
  if (s == "experiment") return LevelPolicy::experiment();
  std::size_t pos = 0;
  int L = 0;
  try {
    L = std::stoi(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw std::invalid_argument("L policy must be theorem, experiment or an integer");
  return LevelPolicy::fixed_levels(L);
}

inline std::string describe(const LevelPolicy& p) {
  switch (p.kind) {
    case LevelPolicy::Kind::Theorem: return "theorem";
    case LevelPolicy::Kind::Experiment: return "experiment";
    case LevelPolicy::Kind::Fixed: return std::to_string(p.fixed);
  }
  return "";
}

struct ExperimentSpec {
  int dimension = 1;
  std::vector<DataCase> cases;
  std::vector<double> alphas;
  std::vector<int> ms;
  SchemeSelection scheme = SchemeSelection::Both;
  std::vector<int> N_list;  // GRM steps per level; UM uses um_factor * N steps
  double h = 1e-3;          // 1D mesh size
  int n_per_side = 100;     // 2D cells per side
  LevelPolicy levels = LevelPolicy::experiment();
  /// UM step count per N; 0 selects L + 1 so both schemes spend the same number of solves.
  int um_factor = 0;
  double delta_factor = 0.5;  // delta = delta_factor * lambda_min_est
  SolverPolicy solver = SolverPolicy::direct();
  unsigned seed = 12345;

  void validate() const {
    if (dimension != 1 && dimension != 2) throw std::invalid_argument("ExperimentSpec: dimension must be 1 or 2");
    if (cases.empty() || alphas.empty() || ms.empty() || N_list.empty())
      throw std::invalid_argument("ExperimentSpec: cases, alphas, ms and N_list must be non-empty");
    for (DataCase c : cases)
      if (data_case_dim(c) != dimension)
        throw std::invalid_argument(std::string("ExperimentSpec: case ") + to_char(c) + " does not match the dimension");
    for (double a : alphas)
      if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("ExperimentSpec: alpha values must lie in (0, 1)");
    for (int m : ms)
      if (m < 1 || m > kMaxPadeOrder) throw std::invalid_argument("ExperimentSpec: m out of range");
    for (std::size_t i = 0; i < N_list.size(); ++i) {
      if (N_list[i] < 1) throw std::invalid_argument("ExperimentSpec: N values must be positive");
      if (i > 0 && N_list[i] <= N_list[i - 1]) throw std::invalid_argument("ExperimentSpec: N_list must be strictly increasing");
    }
    if (dimension == 1 && !(h > 0.0 && h < 0.5)) throw std::invalid_argument("ExperimentSpec: h must lie in (0, 1/2)");
    if (dimension == 2 && n_per_side < 3) throw std::invalid_argument("ExperimentSpec: n_per_side must be >= 3");
    if (!(delta_factor > 0.0 && delta_factor < 1.0)) throw std::invalid_argument("ExperimentSpec: delta factor must lie in (0, 1)");
    if (um_factor < 0) throw std::invalid_argument("ExperimentSpec: um_factor must be >= 0");
  }
};

struct ConvergenceRow {
  Scheme scheme;
  int m;
  double alpha;
  DataCase data;
  int N;
  int steps;
  long solves;
  double error;                 // relative M-norm error against the spectral reference
  std::optional<double> order;  // against the previous N when it is N/2
  double max_norm_growth;
  double delta;
  int levels;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::string solver;

  const ConvergenceRow* find(Scheme s, int m, double alpha, DataCase c, int N) const {
    for (const auto& r : rows)
      if (r.scheme == s && r.m == m && r.alpha == alpha && r.data == c && r.N == N) return &r;
    return nullptr;
  }

  /// Order between N = n and N = 2n.
  double order_at(Scheme s, int m, double alpha, DataCase c, int n) const {
    const auto* a = find(s, m, alpha, c, n);
    const auto* b = find(s, m, alpha, c, 2 * n);
    if (!a || !b) throw std::out_of_range("order_at: missing rows for the requested pair");
    return convergence_order(a->error, b->error);
  }

  double max_norm_growth() const {
    double g = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) g = std::max(g, r.max_norm_growth);
    return g;
  }
};

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << std::scientific << v;
  return os.str();
}

inline void write_csv(std::ostream& os, const ConvergenceTable& t) {
  os << "scheme,m,alpha,case,N,steps,solves,error,order,max_norm_growth,delta,L,solver\n";
  for (const auto& r : t.rows) {
    os << to_string(r.scheme) << ',' << r.m << ',' << r.alpha << ',' << to_char(r.data) << ',' << r.N << ',' << r.steps
       << ',' << r.solves << ',' << format_double(r.error) << ',';
    if (r.order) os << std::fixed << std::setprecision(4) << *r.order << std::defaultfloat;
    os << ',' << format_double(r.max_norm_growth) << ',' << format_double(r.delta) << ',' << r.levels << ',' << t.solver
       << '\n';
  }
}

/// Progress callback: receives one finished row.
using RowSink = std::function<void(const ConvergenceRow&)>;

namespace detail {

inline ConvergenceTable run_table(const OperatorPtr& op, const ExperimentSpec& spec, const RowSink& sink) {
  const SpectralBounds bounds = estimate_spectral_bounds(op, spec.seed);
  const SpectralDecomposition dec = decompose(op);
  const double delta = spec.delta_factor * bounds.lambda_min_est;
  const int L = spec.levels.levels(op->min_cell_width(), bounds.lambda_max_est);
  const int um_factor = spec.um_factor > 0 ? spec.um_factor : L + 1;

  ConvergenceTable table;
  table.solver = describe(spec.solver);
  for (int m : spec.ms)
    for (DataCase c : spec.cases) {
      const GridFunction f = l2_project(op, c);
      for (double alpha : spec.alphas) {
        const GridFunction ref = reference_power(dec, f, alpha);
        const double ref_norm = m_norm(ref);
        if (!(ref_norm > 0.0)) throw std::runtime_error("run_table: reference solution vanishes");
        for (Scheme s : {Scheme::GRM, Scheme::UM}) {
          if (!includes(spec.scheme, s)) continue;
          std::optional<double> prev_error;
          int prev_N = 0;
          for (int N : spec.N_list) {
            TimeMesh mesh = s == Scheme::GRM ? build_geometric_mesh(2.0, N, L) : build_uniform_mesh(um_factor * N);
            StepperConfig cfg{alpha, m, delta, mesh, spec.solver};
            StepperStats stats;
            const GridFunction u = s == Scheme::GRM ? run_grm(f, op, cfg, &stats) : run_um(f, op, cfg, &stats);
            ConvergenceRow row{s, m, alpha, c, N, mesh.step_count(), static_cast<long>(mesh.step_count()) * m,
                               m_norm(*op, u.coeffs - ref.coeffs) / ref_norm, std::nullopt, stats.max_norm_growth,
                               delta, L};
            if (prev_error && prev_N * 2 == N && *prev_error > 0.0 && row.error > 0.0)
              row.order = convergence_order(*prev_error, row.error);
            prev_error = row.error;
            prev_N = N;
            table.rows.push_back(row);
            if (sink) sink(row);
          }
        }
      }
    }
  return table;
}

}  // namespace detail

/// 1D uniform mesh of size h; errors against the dense spectral reference.
inline ConvergenceTable run_table_1d(const ExperimentSpec& spec, const RowSink& sink = {}) {
  spec.validate();
  if (spec.dimension != 1) throw std::invalid_argument("run_table_1d: spec is not one-dimensional");
  const int cells = static_cast<int>(std::lround(1.0 / spec.h));
  if (cells - 1 > kMaxDenseEigenDofs) throw std::invalid_argument("run_table_1d: h too small for the dense reference");
  return detail::run_table(assemble_1d(uniform_nodes(cells)), spec, sink);
}

/// Tensor 2D mesh with n_per_side cells per axis.
inline ConvergenceTable run_table_2d(const ExperimentSpec& spec, const RowSink& sink = {}) {
  spec.validate();
  if (spec.dimension != 2) throw std::invalid_argument("run_table_2d: spec is not two-dimensional");
  return detail::run_table(assemble_2d_tensor(spec.n_per_side), spec, sink);
}

// ---------------------------------------------------------------------------
// Spatial refinement with f = 1

/// Continuum solution of (-d^2/dx^2)^alpha u = 1 on (0, 1) with zero boundary values:
/// u(x) = sum over odd k of 4 / (k pi)^(1 + 2 alpha) sin(k pi x), truncated after `terms` terms.
inline std::vector<double> continuum_power_of_one(std::span<const double> x, double alpha, long terms) {
  if (terms < 1) throw std::invalid_argument("continuum_power_of_one: need at least one term");
  std::vector<double> coef(terms);
  for (long i = 0; i < terms; ++i) coef[i] = 4.0 * std::pow((2 * i + 1) * M_PI, -1.0 - 2.0 * alpha);
  std::vector<double> out(x.size());
  for (std::size_t p = 0; p < x.size(); ++p) {
    // sin((2i+1) pi x) via a rotation, re-anchored every 4096 terms to bound drift.
    const std::complex<double> rot = std::polar(1.0, 2.0 * M_PI * x[p]);
    std::complex<double> z;
    double acc = 0.0;
    for (long i = 0; i < terms; ++i) {
      if (i % 4096 == 0) z = std::polar(1.0, (2 * i + 1) * M_PI * x[p]);
      acc += coef[i] * z.imag();
      z *= rot;
    }
    out[p] = acc;
  }
  return out;
}

struct SpatialSpec {
  std::vector<int> N_list{4, 8, 16};
  std::vector<int> ms{1, 2};
  double alpha = 0.5;
  int um_steps = 100000;
  long series_terms = 800000;
  int max_time_N = 4096;  // the GRM search doubles N up to this value
  double delta_factor = 0.5;
  SolverPolicy solver = SolverPolicy::direct();
  unsigned seed = 12345;

  void validate() const {
    if (N_list.empty() || ms.empty()) throw std::invalid_argument("SpatialSpec: N_list and ms must be non-empty");
    for (int N : N_list)
      if (N < 2) throw std::invalid_argument("SpatialSpec: N values must be >= 2");
    for (int m : ms)
      if (m < 1 || m > kMaxPadeOrder) throw std::invalid_argument("SpatialSpec: m out of range");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("SpatialSpec: alpha must lie in (0, 1)");
    if (um_steps < 1 || series_terms < 1 || max_time_N < 1) throw std::invalid_argument("SpatialSpec: counts must be positive");
  }
};

struct SpatialSchemeResult {
  int m;
  double e_grm;  // first GRM error below e_semi, or the last one tried
  int ns;        // GRM step count reaching it, 0 if never reached
  double e_um;
  double max_norm_growth;
};

struct SpatialRow {
  int N;
  int nx;
  int time_levels;
  double e_semi;
  double delta;
  std::vector<SpatialSchemeResult> schemes;
};

/// Errors are relative to ||u_h||_M, u_h = A_h^-alpha pi_h 1. e_semi compares the
/// nodal interpolant of the continuum solution with u_h.
inline std::vector<SpatialRow> run_spatial_refinement(const SpatialSpec& spec,
                                                      const std::function<void(const SpatialRow&)>& sink = {}) {
  spec.validate();
  std::vector<SpatialRow> rows;
  for (int N : spec.N_list) {
    const std::vector<double> nodes = build_graded_spatial_mesh(N);
    const OperatorPtr op = assemble_1d(nodes);
    if (op->dofs() > kMaxDenseEigenDofs) throw std::invalid_argument("run_spatial_refinement: mesh too fine for the dense reference");
    const SpectralDecomposition dec = eig_1d(op);
    const SpectralBounds bounds = estimate_spectral_bounds(op, spec.seed);
    const double delta = spec.delta_factor * bounds.lambda_min_est;
    const int L = experiment_levels(op->min_cell_width());

    const GridFunction f = l2_project(op, DataCase::D);
    const GridFunction ref = reference_power(dec, f, spec.alpha);
    const double ref_norm = m_norm(ref);
    const std::vector<double> interior(nodes.begin() + 1, nodes.end() - 1);
    const std::vector<double> u = continuum_power_of_one(interior, spec.alpha, spec.series_terms);
    const Vector u_vec = Eigen::Map<const Vector>(u.data(), static_cast<Eigen::Index>(u.size()));

    SpatialRow row{N, static_cast<int>(nodes.size()) - 1, L, m_norm(*op, u_vec - ref.coeffs) / ref_norm, delta, {}};
    for (int m : spec.ms) {
      SpatialSchemeResult res{m, 0.0, 0, 0.0, -1.0};
      for (int Nt = 1; Nt <= spec.max_time_N; Nt *= 2) {
        StepperConfig cfg{spec.alpha, m, delta, build_geometric_mesh(2.0, Nt, L), spec.solver};
        StepperStats stats;
        const GridFunction U = run_grm(f, op, cfg, &stats);
        res.max_norm_growth = std::max(res.max_norm_growth, stats.max_norm_growth);
        res.e_grm = m_norm(*op, U.coeffs - ref.coeffs) / ref_norm;
        if (res.e_grm < row.e_semi) {
          res.ns = cfg.mesh.step_count();
          break;
        }
      }
      StepperConfig cfg{spec.alpha, m, delta, build_uniform_mesh(spec.um_steps), spec.solver};
      StepperStats stats;
      const GridFunction U = run_um(f, op, cfg, &stats);
      res.max_norm_growth = std::max(res.max_norm_growth, stats.max_norm_growth);
      res.e_um = m_norm(*op, U.coeffs - ref.coeffs) / ref_norm;
      row.schemes.push_back(res);
    }
    rows.push_back(row);
    if (sink) sink(row);
  }
  return rows;
}

inline void write_csv(std::ostream& os, const std::vector<SpatialRow>& rows, const SpatialSpec& spec) {
  os << "N,nx,L,e_semi,m,E_GRM,NS,E_UM,um_steps,max_norm_growth,alpha,delta,solver\n";
  for (const auto& r : rows)
    for (const auto& s : r.schemes)
      os << r.N << ',' << r.nx << ',' << r.time_levels << ',' << format_double(r.e_semi) << ',' << s.m << ','
         << format_double(s.e_grm) << ',' << s.ns << ',' << format_double(s.e_um) << ',' << spec.um_steps << ','
         << format_double(s.max_norm_growth) << ',' << spec.alpha << ',' << format_double(r.delta) << ','
         << describe(spec.solver) << '\n';
}

// ---------------------------------------------------------------------------
// Scalar diagnostics

struct ScalarSpec {
  std::vector<double> alphas{0.1, 0.5, 0.9};
  std::vector<int> ms{1, 2};
  std::vector<int> N_list{8, 16, 32, 64};
  SchemeSelection scheme = SchemeSelection::GRM;
  double lambda_lo = 1.0;
  double lambda_hi = 1e6;
  int count = 1000;
  double delta = 0.5;
  /// GRM levels; 0 selects ceil(log2(lambda_hi)).
  int levels = 0;

  void validate() const {
    if (alphas.empty() || ms.empty() || N_list.size() < 2)
      throw std::invalid_argument("ScalarSpec: need alphas, ms and at least two N values");
    for (double a : alphas)
      if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("ScalarSpec: alpha values must lie in (0, 1)");
    for (std::size_t i = 1; i < N_list.size(); ++i)
      if (N_list[i] <= N_list[i - 1]) throw std::invalid_argument("ScalarSpec: N_list must be strictly increasing");
    if (!(delta > 0.0 && delta <= lambda_lo)) throw std::invalid_argument("ScalarSpec: need 0 < delta <= lambda_lo");
  }
};

struct ScalarRow {
  Scheme scheme;
  int m;
  double alpha;
  int N;
  double sup_error;
  double slope;  // fitted over all N for this (scheme, m, alpha); repeated on each row
};

inline std::vector<ScalarRow> run_scalar_diagnostics(const ScalarSpec& spec) {
  spec.validate();
  const std::vector<double> grid = log_spaced(spec.lambda_lo, spec.lambda_hi, spec.count);
  std::vector<ScalarRow> rows;
  for (Scheme s : {Scheme::GRM, Scheme::UM}) {
    if (!includes(spec.scheme, s)) continue;
    for (int m : spec.ms)
      for (double alpha : spec.alphas) {
        std::vector<double> ns, sups;
        const auto first = rows.size();
        for (int N : spec.N_list) {
          TimeMesh mesh = s == Scheme::GRM ? (spec.levels > 0 ? build_geometric_mesh(2.0, N, spec.levels)
                                                              : build_geometric_mesh(spec.lambda_hi, N))
                                           : build_uniform_mesh(N);
          const ScalarRunConfig cfg(alpha, spec.delta, m, std::move(mesh));
          const auto errs = scalar_error_sweep(grid, cfg);
          const double sup = *std::max_element(errs.begin(), errs.end());
          ns.push_back(N);
          sups.push_back(sup);
          rows.push_back({s, m, alpha, N, sup, 0.0});
        }
        const bool all_positive = std::all_of(sups.begin(), sups.end(), [](double e) { return e > 0.0; });
        const double slope = all_positive ? fit_convergence_rate(ns, sups) : std::numeric_limits<double>::quiet_NaN();
        for (auto i = first; i < rows.size(); ++i) rows[i].slope = slope;
      }
  }
  return rows;
}

inline void write_csv(std::ostream& os, const std::vector<ScalarRow>& rows, const ScalarSpec& spec) {
  os << "scheme,m,alpha,N,sup_error,slope,lambda_lo,lambda_hi,count,delta\n";
  for (const auto& r : rows)
    os << to_string(r.scheme) << ',' << r.m << ',' << r.alpha << ',' << r.N << ',' << format_double(r.sup_error) << ','
       << std::fixed << std::setprecision(4) << r.slope << std::defaultfloat << ',' << spec.lambda_lo << ','
       << spec.lambda_hi << ',' << spec.count << ',' << spec.delta << '\n';
}

}  // namespace fracpade
