// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   acceptance            all criteria
//   acceptance 2 4        only the listed ones

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fracpade/fracpade.hpp"

using namespace fracpade;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes << " [fail] " << what << ';';
    }
  }
};

// Largest per-step M-norm growth seen by any run in this process.
double g_max_growth = -1.0;
long g_runs = 0;

void record_growth(double g) {
  g_max_growth = std::max(g_max_growth, g);
  ++g_runs;
}

void record_table(const ConvergenceTable& t) {
  for (const auto& r : t.rows) record_growth(r.max_norm_growth);
}

std::string fmt(double v, int prec = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Scalar GRM rate.
Verdict scalar_rate() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  ScalarSpec spec;
  spec.alphas = {0.1, 0.5, 0.9};
  spec.ms = {1, 2};
  spec.N_list = {8, 16, 32, 64};
  spec.lambda_lo = 1.0;
  spec.lambda_hi = 1e6;
  spec.count = 1000;
  spec.scheme = SchemeSelection::GRM;
  const auto rows = run_scalar_diagnostics(spec);
  double worst = 0.0;
  for (const auto& r : rows) {
    if (r.N != 8) continue;
    const double dev = std::abs(r.slope - 2.0 * r.m);
    worst = std::max(worst, dev);
    v.check(dev <= 0.15, "m=" + std::to_string(r.m) + " alpha=" + fmt(r.alpha, 1) + " slope " + fmt(r.slope));
  }
  const double secs = seconds_since(t0);
  v.check(secs < 10.0, "runtime " + fmt(secs, 1) + " s");
  v.notes << " max |slope - 2m| = " << fmt(worst, 3) << ", " << fmt(secs, 1) << " s";
  return v;
}

ConvergenceTable& table_1d() {
  static ConvergenceTable t = [] {
    ExperimentSpec spec;
    spec.dimension = 1;
    spec.cases = {DataCase::A, DataCase::B, DataCase::C, DataCase::D};
    spec.alphas = {0.1, 0.5, 0.9};
    spec.ms = {1, 2};
    spec.N_list = {8, 16};
    spec.h = 1e-3;
    spec.levels = LevelPolicy::experiment();
    ConvergenceTable table = run_table_1d(spec);
    record_table(table);
    return table;
  }();
  return t;
}

// 2. 1D GRM orders.
Verdict grm_1d() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const ConvergenceTable& t = table_1d();
  double lo1 = 1e9, hi1 = -1e9, lo2 = 1e9, hi2 = -1e9;
  for (DataCase c : {DataCase::A, DataCase::B, DataCase::C, DataCase::D})
    for (double a : {0.1, 0.5, 0.9}) {
      const double o1 = t.order_at(Scheme::GRM, 1, a, c, 8);
      const double o2 = t.order_at(Scheme::GRM, 2, a, c, 8);
      lo1 = std::min(lo1, o1), hi1 = std::max(hi1, o1);
      lo2 = std::min(lo2, o2), hi2 = std::max(hi2, o2);
      const std::string cell = std::string("case ") + to_char(c) + " alpha=" + fmt(a, 1);
      v.check(std::abs(o1 - 2.0) <= 0.15, "m=1 " + cell + " order " + fmt(o1));
      v.check(o2 >= 3.5, "m=2 " + cell + " order " + fmt(o2));
    }
  v.notes << " m=1 orders " << fmt(lo1) << ".." << fmt(hi1) << ", m=2 orders " << fmt(lo2) << ".." << fmt(hi2) << ", "
          << fmt(seconds_since(t0), 1) << " s";
  return v;
}

// 3. 1D UM orders.
Verdict um_1d() {
  Verdict v;
  const ConvergenceTable& t = table_1d();
  struct Cell {
    int m;
    DataCase c;
    double alpha, expected;
  };
  for (const Cell& cell : {Cell{1, DataCase::C, 0.1, 0.85}, Cell{1, DataCase::D, 0.5, 0.77}, Cell{1, DataCase::B, 0.5, 1.71},
                           Cell{2, DataCase::C, 0.5, 1.25}}) {
    const double o = t.order_at(Scheme::UM, cell.m, cell.alpha, cell.c, 8);
    v.check(std::abs(o - cell.expected) <= 0.15, "cell off");
    v.notes << " m=" << cell.m << " " << to_char(cell.c) << " a=" << fmt(cell.alpha, 1) << ": " << fmt(o) << " (ref "
            << fmt(cell.expected) << ");";
  }
  const double sat = t.order_at(Scheme::UM, 2, 0.1, DataCase::A, 8);
  v.check(sat > 2.0 && sat < 3.5, "m=2 case a saturation");
  v.notes << " m=2 a a=0.1: " << fmt(sat) << " (in (2, 3.5))";
  return v;
}

struct TwoDResult {
  Verdict v;
  double secs = 0.0;
};

TwoDResult orders_2d(int n_per_side, bool absolute_check) {
  TwoDResult res;
  Verdict& v = res.v;
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentSpec grm;
  grm.dimension = 2;
  grm.cases = {DataCase::E, DataCase::F};
  grm.alphas = {0.1, 0.3, 0.5, 0.7, 0.9};
  grm.ms = {2};
  grm.scheme = SchemeSelection::GRM;
  grm.N_list = {1, 2, 4};
  grm.n_per_side = n_per_side;
  grm.levels = LevelPolicy::fixed_levels(14);
  const ConvergenceTable tg = run_table_2d(grm);
  record_table(tg);

  ExperimentSpec um = grm;
  um.alphas = {0.5};
  um.scheme = SchemeSelection::UM;
  um.N_list = {2, 4};
  const ConvergenceTable tu = run_table_2d(um);
  record_table(tu);

  double lo = 1e9, hi = -1e9;
  for (DataCase c : {DataCase::E, DataCase::F})
    for (double a : grm.alphas) {
      const double o = tg.order_at(Scheme::GRM, 2, a, c, 2);
      lo = std::min(lo, o), hi = std::max(hi, o);
      v.check(std::abs(o - 3.87) <= 0.2, std::string("GRM case ") + to_char(c) + " alpha=" + fmt(a, 1) + " order " + fmt(o));
    }
  const double ue = tu.order_at(Scheme::UM, 2, 0.5, DataCase::E, 2);
  const double uf = tu.order_at(Scheme::UM, 2, 0.5, DataCase::F, 2);
  v.check(std::abs(ue - 1.72) <= 0.15, "UM case e order " + fmt(ue));
  v.check(std::abs(uf - 0.97) <= 0.15, "UM case f order " + fmt(uf));
  v.notes << " h=1/" << n_per_side << ": GRM orders " << fmt(lo) << ".." << fmt(hi) << ", UM e " << fmt(ue) << ", UM f "
          << fmt(uf);
  if (absolute_check) {
    const double e15 = tg.find(Scheme::GRM, 2, 0.5, DataCase::E, 1)->error;
    const double ratio = e15 / 7.29e-6;
    v.check(ratio <= 3.0 && ratio >= 1.0 / 3.0, "GRM case e alpha=0.5 NS=15 error " + sci(e15));
    v.notes << ", GRM e a=0.5 NS=15 error " << sci(e15) << " (ref 7.29e-06)";
  }
  res.secs = seconds_since(t0);
  v.notes << ", " << fmt(res.secs, 1) << " s;";
  return res;
}

// 4. 2D orders, reduced gate first.
Verdict orders_2d_all() {
  Verdict v;
  TwoDResult gate = orders_2d(50, false);
  v.check(gate.v.pass, "reduced gate");
  v.check(gate.secs < 300.0, "reduced gate runtime");
  v.notes << gate.v.notes.str();
  TwoDResult full = orders_2d(100, true);
  v.check(full.v.pass, "full run");
  v.notes << full.v.notes.str();
  return v;
}

// 5. Padé properties.
Verdict pade_properties() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> grid{0.0};
  for (int i = 0; i <= 2000; ++i) grid.push_back(std::pow(10.0, -6.0 + 18.0 * i / 2000));
  double worst_pf = 0.0, worst_pole = -1e300;
  long cases = 0;
  for (int m = 1; m <= kMaxPadeOrder; ++m)
    for (int ia = 1; ia <= 19; ++ia) {
      const double alpha = 0.05 * ia;
      const auto r = pade_coefficients(m, alpha);
      ++cases;
      for (double p : r.poles()) worst_pole = std::max(worst_pole, p);
      bool range_ok = r.rho() > 0.0;
      for (double x : grid) {
        const double val = r(x);
        range_ok = range_ok && val >= r.rho() && val <= 1.0;
        worst_pf = std::max(worst_pf, std::abs(r.eval_partial_fractions(x) - val) / std::abs(val));
      }
      v.check(range_ok, "range m=" + std::to_string(m) + " alpha=" + fmt(alpha));
      for (int k = 0; k <= 4 * (2 * m + 1); ++k) {
        const double s = 0.25 * k;
        v.check(pade_error_bound_check(r, s, std::span<const double>(grid)),
                "error bound m=" + std::to_string(m) + " alpha=" + fmt(alpha) + " s=" + fmt(s));
      }
    }
  v.check(worst_pole < -1.0, "pole at " + fmt(worst_pole, 6));
  v.check(worst_pf <= 1e-12, "partial fractions " + sci(worst_pf));
  const double secs = seconds_since(t0);
  v.check(secs < 5.0, "runtime " + fmt(secs, 1) + " s");
  v.notes << " " << cases << " (m, alpha) pairs; largest pole " << fmt(worst_pole, 4) << ", partial-fraction error "
          << sci(worst_pf) << ", " << fmt(secs, 1) << " s";
  return v;
}

// 6. Diagonal-oracle equivalence.
Verdict diagonal_oracle() {
  Verdict v;
  const auto op = assemble_1d(uniform_nodes(180));  // 179 dofs
  const auto dec = eig_1d(op);
  const SpectralBounds b = estimate_spectral_bounds(op);
  const double delta = 0.5 * b.lambda_min_est, alpha = 0.6;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick(0, op->dofs() - 1);
  std::normal_distribution<double> gauss;
  double worst_mode = 0.0, worst_dense = 0.0;
  for (int m : {1, 2}) {
    const TimeMesh geo = build_geometric_mesh(b.lambda_max_est, 4);
    const TimeMesh uni = build_uniform_mesh(40);
    for (Scheme s : {Scheme::GRM, Scheme::UM}) {
      const TimeMesh& mesh = s == Scheme::GRM ? geo : uni;
      const ScalarRunConfig scalar(alpha, delta, m, mesh);
      const StepperConfig cfg{alpha, m, delta, mesh};
      auto run = [&](const GridFunction& f) {
        StepperStats st;
        GridFunction u = s == Scheme::GRM ? run_grm(f, op, cfg, &st) : run_um(f, op, cfg, &st);
        record_growth(st.max_norm_growth);
        return u;
      };
      auto mu = [&](double lambda) { return s == Scheme::GRM ? scalar_grm(lambda, scalar) : scalar_um(lambda, scalar); };
      for (int trial = 0; trial < 10; ++trial) {
        const int j = pick(rng);
        const GridFunction psi{op, dec.mode(j)};
        const Vector expected = mu(dec.lambdas()[j]) * psi.coeffs;
        worst_mode = std::max(worst_mode, m_norm(*op, run(psi).coeffs - expected) / m_norm(*op, expected));
      }
      for (int trial = 0; trial < 3; ++trial) {
        Vector x(op->dofs());
        for (auto& e : x) e = gauss(rng);
        Vector c = dec.coefficients(x);
        for (int j = 0; j < c.size(); ++j) c[j] *= mu(dec.lambdas()[j]);
        const Vector expected = dec.synthesize(c);
        worst_dense = std::max(worst_dense, m_norm(*op, run(GridFunction(op, x)).coeffs - expected) / m_norm(*op, expected));
      }
    }
  }
  v.check(worst_mode <= 1e-10, "eigenvector runs");
  v.check(worst_dense <= 1e-9, "random vector runs");
  v.notes << " eigenvector max rel. error " << sci(worst_mode) << ", random-vector max rel. error " << sci(worst_dense);
  return v;
}

// 7. Spatial refinement.
Verdict spatial() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  SpatialSpec spec;
  spec.N_list = {4, 8, 16};
  spec.ms = {1, 2};
  spec.alpha = 0.5;
  spec.um_steps = 100000;
  const auto rows = run_spatial_refinement(spec);
  const int ref_nx[] = {72, 176, 416};
  const int ref_ns[2][3] = {{92, 232, 560}, {23, 29, 70}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SpatialRow& r = rows[i];
    v.check(std::abs(r.nx - ref_nx[i]) <= 2, "nx at N=" + std::to_string(r.N));
    v.notes << " N=" << r.N << ": nx " << r.nx << ", threshold " << sci(r.e_semi);
    for (std::size_t k = 0; k < r.schemes.size(); ++k) {
      const auto& s = r.schemes[k];
      record_growth(s.max_norm_growth);
      v.check(s.ns > 0 && s.ns <= 2 * ref_ns[k][i],
              "NS m=" + std::to_string(s.m) + " N=" + std::to_string(r.N) + " is " + std::to_string(s.ns));
      v.notes << ", m=" << s.m << " NS " << s.ns << " (ref " << ref_ns[k][i] << ")";
    }
    v.notes << ';';
  }
  const double threshold16 = rows[2].e_semi;
  const double um16 = rows[2].schemes[0].e_um;
  v.check(um16 > threshold16, "UM m=1 error at 1e5 steps " + sci(um16) + " is below the N=16 threshold " + sci(threshold16) +
                                  " (reference table: 2.77e-05 vs 4.29e-05)");
  v.notes << " UM m=1 errors at 1e5 steps " << sci(rows[0].schemes[0].e_um) << ", " << sci(rows[1].schemes[0].e_um) << ", "
          << sci(um16) << "; " << fmt(seconds_since(t0), 1) << " s";
  return v;
}

// 8. Stability over every run above.
Verdict stability() {
  Verdict v;
  v.check(g_runs > 0, "no runs recorded");
  v.check(g_max_growth <= 1e-9, "growth " + sci(g_max_growth));
  v.notes << " " << g_runs << " runs, max per-step relative M-norm growth " << sci(g_max_growth);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  auto on = [&](int k) { return wanted.empty() || wanted.count(k) > 0; };

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"scalar GRM rate", scalar_rate},
      {"1D GRM orders", grm_1d},
      {"1D UM orders", um_1d},
      {"2D orders", orders_2d_all},
      {"Pade properties", pade_properties},
      {"diagonal oracle", diagonal_oracle},
      {"spatial refinement", spatial},
      {"stability", stability},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!on(static_cast<int>(k) + 1)) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.notes << " exception: " << e.what();
    }
    if (!v.pass) ++failed;
    std::cout << "criterion " << k + 1 << " (" << criteria[k].first << "): " << (v.pass ? "PASS" : "FAIL") << " -"
              << v.notes.str() << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
