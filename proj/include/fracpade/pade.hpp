#pragma once

// Diagonal Padé approximants r_m = P_m / Q_m to (1 + x)^(-alpha), 0 < alpha < 1.
//
//   Q_m(x) = 1 + sum_j a_j b_j(+alpha) x^j
//   P_m(x) = 1 + sum_j a_j b_j(-alpha) x^j
//
//   a_j       = m (m-1) ... (m+1-j) / ( j! 2m (2m-1) ... (2m+1-j) )
//   b_j(beta) = (m+beta) (m-1+beta) ... (m+1-j+beta)
//
// All roots of Q_m are real, simple and lie in (-inf, -1), so r_m has the
// partial-fraction form  r_m(x) = r_inf + sum_i res_i / (x - pole_i).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace fracpade {

inline constexpr int kMaxPadeOrder = 8;

namespace detail {

// Wider accumulator for the coefficient products when Real is a builtin type.
template <class Real>
using PadeAccum = std::conditional_t<std::is_floating_point_v<Real>, long double, Real>;

template <class Real>
Real horner(std::span<const Real> coeffs, const Real& x) {
  Real acc = coeffs.back();
  for (auto i = coeffs.size() - 1; i-- > 0;) acc = acc * x + coeffs[i];
  return acc;
}

template <class Real>
Real horner_derivative(std::span<const Real> coeffs, const Real& x) {
  Real acc = Real(coeffs.size() - 1) * coeffs.back();
  for (auto i = coeffs.size() - 1; i-- > 1;) acc = acc * x + Real(i) * coeffs[i];
  return acc;
}

template <class Real>
std::vector<Real> series_coefficients(int m, const Real& beta) {
  using Acc = PadeAccum<Real>;
  std::vector<Real> c(m + 1);
  c[0] = Real(1);
  Acc a = 1, b = 1;
  for (int j = 1; j <= m; ++j) {
    a = a * Acc(m + 1 - j) / (Acc(j) * Acc(2 * m + 1 - j));
    b = b * (Acc(m + 1 - j) + Acc(beta));
    c[j] = Real(a * b);
  }
  return c;
}

}  // namespace detail

/// Diagonal Padé approximant of (1+x)^(-alpha). Immutable once built.
template <class Real = double>
class PadeRational {
 public:
  static PadeRational build(int m, Real alpha);

  int order() const { return m_; }
  const Real& alpha() const { return alpha_; }
  const std::vector<Real>& p_coeffs() const { return p_; }
  const std::vector<Real>& q_coeffs() const { return q_; }
  const std::vector<Real>& poles() const { return poles_; }
  const std::vector<Real>& residues() const { return residues_; }
  const Real& limit_at_infinity() const { return limit_; }
  const Real& rho() const { return rho_; }

  Real numerator(const Real& x) const { return detail::horner<Real>(p_, x); }
  Real denominator(const Real& x) const { return detail::horner<Real>(q_, x); }

  /// P_m(x) / Q_m(x) for x >= -1.
  Real operator()(const Real& x) const;

  /// r_inf + sum_i res_i / (x - pole_i).
  Real eval_partial_fractions(const Real& x) const {
    Real acc = limit_;
    for (int i = 0; i < m_; ++i) acc += residues_[i] / (x - poles_[i]);
    return acc;
  }

 private:
  PadeRational() = default;

  int m_ = 0;
  Real alpha_{};
  std::vector<Real> p_, q_, poles_, residues_;
  Real limit_{}, rho_{};
};

template <class Real>
Real PadeRational<Real>::operator()(const Real& x) const {
  using std::isinf;
  if (x < Real(-1)) throw std::domain_error("eval_rational: argument below -1");
  if constexpr (std::numeric_limits<Real>::has_infinity) {
    if (isinf(x)) return limit_;
  }
  if (x <= Real(1)) return detail::horner<Real>(p_, x) / detail::horner<Real>(q_, x);
  // x^-m P_m(x) / x^-m Q_m(x), evaluated in y = 1/x to keep large arguments finite.
  const Real y = Real(1) / x;
  Real pn = p_[0], qn = q_[0];
  for (int j = 1; j <= m_; ++j) {
    pn = pn * y + p_[j];
    qn = qn * y + q_[j];
  }
  return pn / qn;
}

template <class Real>
PadeRational<Real> PadeRational<Real>::build(int m, Real alpha) {
  using std::abs;
  using std::pow;
  if (m < 1 || m > kMaxPadeOrder)
    throw std::invalid_argument("pade_coefficients: order m=" + std::to_string(m) +
                                " outside supported range [1, " + std::to_string(kMaxPadeOrder) + "]");
  if (!(alpha > Real(0) && alpha < Real(1)))
    throw std::invalid_argument("pade_coefficients: alpha must lie in (0, 1)");

  if constexpr (std::is_floating_point_v<Real> && !std::is_same_v<Real, long double>) {
    // Build in extended precision and round once.
    const auto wide = PadeRational<long double>::build(m, static_cast<long double>(alpha));
    const auto narrow = [](const std::vector<long double>& v) { return std::vector<Real>(v.begin(), v.end()); };
    PadeRational r;
    r.m_ = m;
    r.alpha_ = alpha;
    r.p_ = narrow(wide.p_coeffs());
    r.q_ = narrow(wide.q_coeffs());
    r.poles_ = narrow(wide.poles());
    r.residues_ = narrow(wide.residues());
    r.limit_ = static_cast<Real>(wide.limit_at_infinity());
    r.rho_ = static_cast<Real>(wide.rho());
    return r;
  }

  PadeRational r;
  r.m_ = m;
  r.alpha_ = alpha;
  r.q_ = detail::series_coefficients<Real>(m, alpha);
  r.p_ = detail::series_coefficients<Real>(m, -alpha);
  r.limit_ = r.p_.back() / r.q_.back();

  // Companion matrix of the monic Q_m, solved in double, then Newton-polished in Real.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
  const double lead = static_cast<double>(r.q_.back());
  for (int i = 0; i < m; ++i) companion(0, i) = -static_cast<double>(r.q_[m - 1 - i]) / lead;
  for (int i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("pade_coefficients: companion eigensolve failed");

  const std::span<const Real> q(r.q_);
  for (int i = 0; i < m; ++i) {
    const std::complex<double> z = es.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-6 * std::max(1.0, std::abs(z.real())))
      throw std::runtime_error("pade_coefficients: denominator has a complex root");
    Real x = Real(z.real());
    Real last_step = std::numeric_limits<Real>::max();
    for (int it = 0; it < 64; ++it) {
      const Real step = detail::horner<Real>(q, x) / detail::horner_derivative<Real>(q, x);
      if (!(abs(step) < abs(last_step))) break;
      x -= step;
      last_step = step;
      if (abs(step) <= std::numeric_limits<Real>::epsilon() * abs(x)) break;
    }
    r.poles_.push_back(x);
  }
  std::sort(r.poles_.begin(), r.poles_.end(), [](const Real& a, const Real& b) { return a > b; });
  for (int i = 1; i < m; ++i) {
    if (abs(r.poles_[i] - r.poles_[i - 1]) < Real(1e-8) * abs(r.poles_[i]))
      throw std::runtime_error("partial_fractions: clustered poles, decomposition ill-conditioned");
  }

  r.residues_.reserve(m);
  for (const Real& x : r.poles_)
    r.residues_.push_back(detail::horner<Real>(std::span<const Real>(r.p_), x) /
                          detail::horner_derivative<Real>(q, x));

  // rho_m: numerical minimum of r_m over [0, inf).
  r.rho_ = r.limit_;
  constexpr int kGrid = 2001;
  const Real ratio = pow(Real(10), Real(16) / Real(kGrid - 1));
  Real x = Real(1e-4);
  for (int i = 0; i < kGrid; ++i, x *= ratio) r.rho_ = std::min<Real>(r.rho_, r(x));
  return r;
}

template <class Real>
PadeRational<Real> pade_coefficients(int m, Real alpha) {
  return PadeRational<Real>::build(m, alpha);
}

template <class Real>
Real eval_rational(const PadeRational<Real>& r, const Real& x) {
  return r(x);
}

template <class Real>
struct PartialFractions {
  Real limit_at_infinity;
  std::vector<Real> poles;
  std::vector<Real> residues;
};

template <class Real>
PartialFractions<Real> partial_fractions(const PadeRational<Real>& r) {
  return {r.limit_at_infinity(), r.poles(), r.residues()};
}

/// c_{m,s} = max{ Q_m(-1) 2^(s-2m), 2^(1+s) }.
template <class Real>
Real pade_error_constant(const PadeRational<Real>& r, const Real& s) {
  using std::pow;
  const Real two(2);
  return std::max<Real>(r.denominator(Real(-1)) * pow(two, s - Real(2 * r.order())), pow(two, Real(1) + s));
}

/// True iff |(1+x)^(-alpha) - r_m(x)| <= c_{m,s} x^s + slack at every grid point.
/// `slack` absorbs the rounding error of evaluating the left side in Real.
template <class Real>
bool pade_error_bound_check(const PadeRational<Real>& r, const Real& s, std::span<const Real> x_grid,
                            Real slack = Real(64) * std::numeric_limits<Real>::epsilon()) {
  using std::abs;
  using std::pow;
  if (s < Real(0) || s > Real(2 * r.order() + 1))
    throw std::invalid_argument("pade_error_bound_check: s outside [0, 2m+1]");
  const Real c = pade_error_constant(r, s);
  for (const Real& x : x_grid) {
    if (x < Real(0)) throw std::invalid_argument("pade_error_bound_check: negative grid point");
    const Real err = abs(pow(Real(1) + x, -r.alpha()) - r(x));
    const Real bound = (x == Real(0) ? (s == Real(0) ? c : Real(0)) : c * pow(x, s));
    if (!(err <= bound + slack)) return false;
  }
  return true;
}

}  // namespace fracpade
