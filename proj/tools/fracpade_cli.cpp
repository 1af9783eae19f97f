// fracpade: command-line driver for the convergence studies.
//
//   fracpade pade-info      --m 2 --alpha 0.5
//   fracpade scalar-sweep   --scheme grm --N 8,16,32,64
//   fracpade table-1d       --case a,b,c,d --mesh-size 0.001 --N 8,16
//   fracpade table-2d       --case e,f --n-per-side 100 --L 14 --N 1,2,4
//   fracpade spatial-refine --N 4,8,16
//
// Each subcommand accepts --config FILE with flat "key = value" lines named after
// the long flags; flags given on the command line take precedence.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracpade/fracpade.hpp"

using namespace fracpade;

namespace {

struct Output {
  std::string path;

  std::ostream& stream() {
    if (path.empty() || path == "-") return std::cout;
    if (!file) {
      file = std::make_unique<std::ofstream>(path);
      if (!*file) throw std::runtime_error("cannot open output file " + path);
    }
    return *file;
  }

  std::unique_ptr<std::ofstream> file;
};

struct SolverFlags {
  std::string kind = "direct";
  double tol = 1e-12;
  int max_iter = 50000;

  SolverPolicy policy() const {
    if (kind == "direct") return SolverPolicy::direct();
    if (kind == "pcg") {
      SolverPolicy p = SolverPolicy::iterative(tol);
      p.max_iter = max_iter;
      return p;
    }
    throw std::invalid_argument("solver must be direct or pcg");
  }
};

void add_solver_flags(CLI::App* app, SolverFlags& s) {
  app->add_option("--solver", s.kind, "Linear solver: direct or pcg")->capture_default_str();
  app->add_option("--tol", s.tol, "Relative residual tolerance for pcg")->capture_default_str();
  app->add_option("--max-iter", s.max_iter, "Iteration cap for pcg")->capture_default_str();
}

// Options left unset on the command line take their value from the config file.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "config" || item.name == "++" || item.name == "--") continue;
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + item.name);
    } catch (const CLI::OptionNotFound&) {
      throw std::invalid_argument("config file " + path + ": unknown key '" + item.name + "'");
    }
    if (opt->count() > 0) continue;
    for (const auto& v : item.inputs) opt->add_result(v);
    opt->run_callback();
  }
}

std::vector<DataCase> parse_cases(const std::vector<std::string>& tags) {
  std::vector<DataCase> out;
  for (const auto& t : tags) out.push_back(parse_data_case(t));
  return out;
}

void print_pade_info(std::ostream& os, int m, double alpha) {
  const auto r = pade_coefficients(m, alpha);
  os << std::setprecision(17);
  os << "quantity,index,value\n";
  for (int j = 0; j <= m; ++j) os << "p," << j << ',' << r.p_coeffs()[j] << '\n';
  for (int j = 0; j <= m; ++j) os << "q," << j << ',' << r.q_coeffs()[j] << '\n';
  for (int i = 0; i < m; ++i) os << "pole," << i << ',' << r.poles()[i] << '\n';
  for (int i = 0; i < m; ++i) os << "residue," << i << ',' << r.residues()[i] << '\n';
  os << "limit_at_infinity,," << r.limit_at_infinity() << '\n';
  os << "rho,," << r.rho() << '\n';
  for (int s = 0; s <= 2 * m + 1; ++s) os << "error_constant," << s << ',' << pade_error_constant(r, double(s)) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Padé time stepping for fractional powers of elliptic operators"};
  app.require_subcommand(1);
  bool verbose = false;
  std::string config_path;
  app.add_flag("-v,--verbose", verbose, "Report progress on stderr");

  // pade-info
  int info_m = 2;
  double info_alpha = 0.5;
  Output info_out;
  auto* info = app.add_subcommand("pade-info", "Coefficients, poles and residues of r_m");
  info->add_option("--config", config_path, "Flat key = value file");
  info->add_option("--m", info_m, "Padé order (1..8)")->capture_default_str();
  info->add_option("--alpha", info_alpha, "Exponent in (0, 1)")->capture_default_str();
  info->add_option("-o,--output", info_out.path, "CSV output file (default stdout)");

  // scalar-sweep
  ScalarSpec sspec;
  std::string sscheme = "both";
  Output sweep_out;
  auto* sweep = app.add_subcommand("scalar-sweep", "Sup errors of the scalar recurrences over a lambda grid");
  sweep->add_option("--config", config_path, "Flat key = value file");
  sweep->add_option("--alpha", sspec.alphas, "Exponents")->delimiter(',')->capture_default_str();
  sweep->add_option("--m", sspec.ms, "Padé orders")->delimiter(',')->capture_default_str();
  sweep->add_option("--N", sspec.N_list, "Steps per level (GRM) or total steps (UM)")->delimiter(',')->capture_default_str();
  sweep->add_option("--scheme", sscheme, "grm, um or both")->capture_default_str();
  sweep->add_option("--lambda-min", sspec.lambda_lo, "Smallest lambda")->capture_default_str();
  sweep->add_option("--lambda-max", sspec.lambda_hi, "Largest lambda")->capture_default_str();
  sweep->add_option("--count", sspec.count, "Number of log-spaced lambda values")->capture_default_str();
  sweep->add_option("--delta", sspec.delta, "Shift delta (<= lambda-min)")->capture_default_str();
  sweep->add_option("--L", sspec.levels, "GRM levels; 0 uses ceil(log2(lambda-max))")->capture_default_str();
  sweep->add_option("-o,--output", sweep_out.path, "CSV output file (default stdout)");

  // table-1d / table-2d share most flags.
  struct TableFlags {
    ExperimentSpec spec;
    std::vector<std::string> cases;
    std::string scheme = "both";
    std::string levels;
    SolverFlags solver;
    Output out;
  };
  TableFlags t1, t2;
  t1.spec.dimension = 1;
  t1.cases = {"a", "b", "c", "d"};
  t1.spec.alphas = {0.1, 0.5, 0.9};
  t1.spec.ms = {1, 2};
  t1.spec.N_list = {8, 16};
  t1.levels = "experiment";
  t2.spec.dimension = 2;
  t2.cases = {"e", "f"};
  t2.spec.alphas = {0.1, 0.3, 0.5, 0.7, 0.9};
  t2.spec.ms = {2};
  t2.spec.N_list = {1, 2, 4};
  t2.levels = "14";

  auto add_table_flags = [&config_path](CLI::App* sub, TableFlags& t) {
    sub->add_option("--config", config_path, "Flat key = value file");
    sub->add_option("--case", t.cases, "Data cases")->delimiter(',')->capture_default_str();
    sub->add_option("--alpha", t.spec.alphas, "Exponents")->delimiter(',')->capture_default_str();
    sub->add_option("--m", t.spec.ms, "Padé orders")->delimiter(',')->capture_default_str();
    sub->add_option("--N", t.spec.N_list, "GRM steps per level, strictly increasing")->delimiter(',')->capture_default_str();
    sub->add_option("--scheme", t.scheme, "grm, um or both")->capture_default_str();
    sub->add_option("--L", t.levels, "Level policy: theorem, experiment or an integer")->capture_default_str();
    sub->add_option("--um-factor", t.spec.um_factor, "UM steps per N; 0 matches GRM solve counts (L+1)")->capture_default_str();
    sub->add_option("--delta-factor", t.spec.delta_factor, "delta as a fraction of the lambda_min estimate")->capture_default_str();
    sub->add_option("--seed", t.spec.seed, "Seed of the Lanczos start vector")->capture_default_str();
    sub->add_option("-o,--output", t.out.path, "CSV output file (default stdout)");
    add_solver_flags(sub, t.solver);
  };
  auto* table1 = app.add_subcommand("table-1d", "Time-stepping errors and orders on a uniform 1D mesh");
  add_table_flags(table1, t1);
  table1->add_option("--mesh-size", t1.spec.h, "Mesh size h")->capture_default_str();
  auto* table2 = app.add_subcommand("table-2d", "Time-stepping errors and orders on a uniform square mesh");
  add_table_flags(table2, t2);
  table2->add_option("--n-per-side", t2.spec.n_per_side, "Cells per side")->capture_default_str();

  // spatial-refine
  SpatialSpec pspec;
  SolverFlags psolver;
  Output spatial_out;
  auto* spatial = app.add_subcommand("spatial-refine", "GRM and UM on boundary-graded 1D meshes with f = 1");
  spatial->add_option("--config", config_path, "Flat key = value file");
  spatial->add_option("--N", pspec.N_list, "Points per level of the spatial mesh")->delimiter(',')->capture_default_str();
  spatial->add_option("--m", pspec.ms, "Padé orders")->delimiter(',')->capture_default_str();
  spatial->add_option("--alpha", pspec.alpha, "Exponent")->capture_default_str();
  spatial->add_option("--um-steps", pspec.um_steps, "UM step count")->capture_default_str();
  spatial->add_option("--series-terms", pspec.series_terms, "Terms of the continuum series")->capture_default_str();
  spatial->add_option("--max-time-N", pspec.max_time_N, "Largest GRM steps per level tried")->capture_default_str();
  spatial->add_option("--delta-factor", pspec.delta_factor, "delta as a fraction of the lambda_min estimate")->capture_default_str();
  spatial->add_option("--seed", pspec.seed, "Seed of the Lanczos start vector")->capture_default_str();
  spatial->add_option("-o,--output", spatial_out.path, "CSV output file (default stdout)");
  add_solver_flags(spatial, psolver);

  CLI11_PARSE(app, argc, argv);

  try {
    for (CLI::App* sub : app.get_subcommands()) apply_config(sub, config_path);
    if (*info) {
      print_pade_info(info_out.stream(), info_m, info_alpha);
    } else if (*sweep) {
      sspec.scheme = parse_scheme_selection(sscheme);
      write_csv(sweep_out.stream(), run_scalar_diagnostics(sspec), sspec);
    } else if (*table1 || *table2) {
      TableFlags& t = *table1 ? t1 : t2;
      t.spec.cases = parse_cases(t.cases);
      t.spec.scheme = parse_scheme_selection(t.scheme);
      t.spec.levels = parse_level_policy(t.levels);
      t.spec.solver = t.solver.policy();
      RowSink sink;
      if (verbose)
        sink = [](const ConvergenceRow& r) {
          std::cerr << to_string(r.scheme) << " m=" << r.m << " alpha=" << r.alpha << " case " << to_char(r.data)
                    << " N=" << r.N << " error=" << r.error << '\n';
        };
      const ConvergenceTable table = *table1 ? run_table_1d(t.spec, sink) : run_table_2d(t.spec, sink);
      write_csv(t.out.stream(), table);
    } else if (*spatial) {
      pspec.solver = psolver.policy();
      std::function<void(const SpatialRow&)> sink;
      if (verbose) sink = [](const SpatialRow& r) { std::cerr << "N=" << r.N << " nx=" << r.nx << " done\n"; };
      write_csv(spatial_out.stream(), run_spatial_refinement(pspec, sink), pspec);
    }
  } catch (const SolverError& e) {
    std::cerr << "fracpade: solver failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "fracpade: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fracpade: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
