#pragma once

#include <cmath>
#include <sstream>
#include <utility>

#include "abswit/linalg.hpp"

// Detector-inefficiency analysis for witness measurements with lost events:
// identity coefficients of the local-basis decomposition, measured-value
// thresholds for linear and nonlinear witnesses, and critical lost-event
// efficiencies below which a negative measured value can be a false positive.
//
// Conventions: eta is the lost-event efficiency in (0,1]; the additional-event
// efficiency is taken to vanish. x_nl denotes the already-squared nonlinearity
// magnitude <H>_m^2 + <A>_m^2. s_eff is an explicit effective Schmidt weight:
// the Schmidt-based S(psi) of the witness layer is the natural default, while
// 1/2 reproduces the published 2x4 critical efficiencies.

namespace abswit {

struct LoopholeParams {
  double eta_minus = 1.0;  // lost-event efficiency, in (0,1]
  double c0 = 0.0;         // identity coefficient Tr(W)/d of the witness in use
  double c0h = 0.0;        // identity coefficient of the Hermitian part of X^{T_B}
  double c0a = 0.0;        // identity coefficient of the anti-Hermitian part
  double s_eff = 1.0;      // effective Schmidt weight, > 0
  double x_nl = 0.0;       // <H>_m^2 + <A>_m^2, >= 0
};

// M = H + iA with H = (M + M^dagger)/2 and A = (M - M^dagger)/(2i), both Hermitian.
struct HermAntihermSplit {
  ComplexMatrix h;
  ComplexMatrix a;
};

inline HermAntihermSplit herm_antiherm(const ComplexMatrix& m) {
  HermAntihermSplit split;
  split.h = 0.5 * (m + m.adjoint());
  split.a = (m - m.adjoint()) / Complex(0.0, 2.0);
  return split;
}

// Coefficient of the identity in the local-operator-basis decomposition: the
// non-identity basis terms are traceless, so C_0 = Tr(W)/d.
inline double identity_coeff(const ComplexMatrix& w) {
  if (w.rows() != w.cols()) {
    throw std::invalid_argument("identity_coeff: matrix not square");
  }
  return w.trace().real() / static_cast<double>(w.rows());
}

namespace detail {

inline void require_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    std::ostringstream os;
    os << "eta = " << eta << " outside (0, 1]";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace detail

// K_H = C_0H (1 - 1/eta) and K_A = C_0A (1 - 1/eta); both vanish for a perfect
// detector.
inline std::pair<double, double> kh_ka(const HermAntihermSplit& split, int d, double eta) {
  detail::require_eta(eta);
  if (split.h.rows() != d || split.a.rows() != d) {
    throw std::invalid_argument("kh_ka: split dimension does not match d = " + std::to_string(d));
  }
  const double factor = 1.0 - 1.0 / eta;
  const double c0h = split.h.trace().real() / d;
  const double c0a = split.a.trace().real() / d;
  return {c0h * factor, c0a * factor};
}

// Measured values below C_0 (1 - 1/eta) certify detection despite lost events.
inline double linear_threshold(double c0, double eta) {
  detail::require_eta(eta);
  return c0 * (1.0 - 1.0 / eta);
}

// The measured-value threshold for the F1 nonlinear witness, assembled exactly as
// the printed quadratic expansion.
inline double nonlinear_threshold(const LoopholeParams& params, double h_m, double a_m,
                                  double kh, double ka) {
  detail::require_eta(params.eta_minus);
  if (!(params.s_eff > 0.0)) {
    throw std::invalid_argument("nonlinear_threshold: s_eff must be positive");
  }
  const double eta = params.eta_minus;
  return params.c0 * (1.0 - 1.0 / eta) +
         (eta / params.s_eff) * (h_m * h_m + kh * kh - 2.0 * h_m * kh) +
         (eta / params.s_eff) * (a_m * a_m + ka * ka - 2.0 * a_m * ka);
}

// Upper bound for the measured witness value in the orthogonal-psi regime
// (K_H = K_A = 0): C_0 (1 - 1/eta) + (eta / s_eff) x_nl. Strictly increasing
// in x_nl.
inline double wup(double c0, double eta, double s_eff, double x_nl) {
  detail::require_eta(eta);
  if (!(s_eff > 0.0)) {
    throw std::invalid_argument("wup: s_eff must be positive");
  }
  return c0 * (1.0 - 1.0 / eta) + (eta / s_eff) * x_nl;
}

// Efficiency at which the most negative achievable expectation value exactly
// meets the linear threshold: C_0 / (C_0 - lambda_min(W)).
inline double critical_eta_linear(const ComplexMatrix& w) {
  const double lambda_min = min_eigpair(w).value;
  if (lambda_min >= -tol::psd_slack) {
    std::ostringstream os;
    os << "critical_eta_linear: witness is positive semidefinite (min eigenvalue = "
       << lambda_min << "), nothing to detect";
    throw NoNegativeEigenvalue(os.str());
  }
  const double c0 = identity_coeff(w);
  return c0 / (c0 - lambda_min);
}

// Smallest eta in (0, 1] with wup(c0, eta, s_eff, x_nl) = assumed_measured, by
// bisection to 1e-9. wup is strictly increasing in eta here (c0 > 0), so the
// root is unique when it exists.
inline double critical_eta_nonlinear(double c0, double s_eff, double x_nl,
                                     double assumed_measured) {
  if (!(c0 > 0.0)) {
    throw std::invalid_argument("critical_eta_nonlinear: c0 must be positive");
  }
  double lo = 1e-6;
  double hi = 1.0;
  double f_lo = wup(c0, lo, s_eff, x_nl) - assumed_measured;
  double f_hi = wup(c0, hi, s_eff, x_nl) - assumed_measured;
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    std::ostringstream os;
    os << "critical_eta_nonlinear: no root of wup = " << assumed_measured
       << " in (0, 1] (bracket values " << f_lo << ", " << f_hi << ")";
    throw NoRoot(os.str());
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = wup(c0, mid, s_eff, x_nl) - assumed_measured;
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace abswit
