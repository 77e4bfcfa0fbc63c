#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "abswit/linalg.hpp"
#include "abswit/states.hpp"

// Spectral criteria: the 2xn absolute-separability margin, the two 3xn
// absolute-PPT determinants, the PPT test, and the classification of a state
// as NPPT / PPT-but-not-absolutely-PPT / absolutely PPT.
//
// For dA = 2 the absolutely PPT set coincides with the absolutely separable set,
// so ABS_PPT also certifies absolute separability there. For dA = 3 only the
// absolute-PPT language applies. The 3xn test evaluates exactly the two printed
// determinants; no further permutation conditions are applied.

namespace abswit {

enum class StateClass { NPPT, PPT_NOT_ABS, ABS_PPT };

inline const char* to_string(StateClass c) {
  switch (c) {
    case StateClass::NPPT: return "NPPT";
    case StateClass::PPT_NOT_ABS: return "PPT_NOT_ABS";
    case StateClass::ABS_PPT: return "ABS_PPT";
  }
  return "?";
}

// Left-hand sides of the criteria actually evaluated for the state's dims.
struct CriterionReport {
  std::optional<double> margin_2xn;
  std::optional<double> det1_3xn;
  std::optional<double> det2_3xn;
  double min_pt_eig = 0.0;
};

// True iff the minimal eigenvalue of rho^{T_B} is >= -tol::psd_slack; also
// returns that eigenvalue.
inline std::pair<bool, double> is_ppt(const DensityOperator& rho) {
  const double min_eig = min_eigpair(partial_transpose(rho.matrix, rho.dims)).value;
  return {min_eig >= -tol::psd_slack, min_eig};
}

// lambda_1 - lambda_{2n-1} - 2 sqrt(lambda_{2n-2} lambda_{2n}) over the descending
// spectrum; the state is absolutely separable iff the margin is <= 0.
inline double as_margin_2xn(const DensityOperator& rho) {
  if (rho.dims.a != 2) {
    throw std::invalid_argument("as_margin_2xn: requires dA = 2, got dA = " +
                                std::to_string(rho.dims.a));
  }
  const RealVector v = eigh_descending(rho.matrix).values;
  const int n = static_cast<int>(v.size());  // 2n in the printed indexing
  // lambda_{2n-2} and lambda_{2n} are eigenvalues of a density operator; clip the
  // tiny negative tails before the square root
  const double sub2 = std::max(v(n - 3), 0.0);  // lambda_{2n-2}
  const double last = std::max(v(n - 1), 0.0);  // lambda_{2n}
  return v(0) - v(n - 2) - 2.0 * std::sqrt(sub2 * last);
}

namespace detail {

inline double det3(double a00, double a01, double a02, double a10, double a11, double a12,
                   double a20, double a21, double a22) {
  return a00 * (a11 * a22 - a12 * a21) - a01 * (a10 * a22 - a12 * a20) +
         a02 * (a10 * a21 - a11 * a20);
}

}  // namespace detail

// The two 3x3 determinants of the 3xn absolute-PPT test, built from the descending
// spectrum with entries exactly as printed. The state is absolutely PPT iff both
// are >= 0.
inline std::pair<double, double> absppt_margins_3xn(const DensityOperator& rho) {
  if (rho.dims.a != 3) {
    throw std::invalid_argument("absppt_margins_3xn: requires dA = 3, got dA = " +
                                std::to_string(rho.dims.a));
  }
  const RealVector v = eigh_descending(rho.matrix).values;
  const int n = static_cast<int>(v.size());  // 3n in the printed indexing
  const double l1 = v(0), l2 = v(1), l3 = v(2);
  const double m0 = v(n - 1);  // lambda_{3n}
  const double m1 = v(n - 2);  // lambda_{3n-1}
  const double m2 = v(n - 3);  // lambda_{3n-2}
  const double m3 = v(n - 4);  // lambda_{3n-3}
  const double m4 = v(n - 5);  // lambda_{3n-4}
  const double m5 = v(n - 6);  // lambda_{3n-5}
  const double det1 = detail::det3(2.0 * m0, m1 - l1, m3 - l2,   //
                                   m1 - l1, 2.0 * m2, m4 - l3,   //
                                   m3 - l2, m4 - l3, 2.0 * m5);
  const double det2 = detail::det3(2.0 * m0, m1 - l1, m2 - l2,   //
                                   m1 - l1, 2.0 * m3, m4 - l3,   //
                                   m2 - l2, m4 - l3, 2.0 * m5);
  return {det1, det2};
}

// NPPT if the PPT test fails; otherwise ABS_PPT if the dimension-appropriate
// spectral criterion holds; otherwise PPT but not absolutely PPT.
inline std::pair<StateClass, CriterionReport> classify(const DensityOperator& rho) {
  const BipartiteDims d = rho.dims;
  const bool supported =
      (d == BipartiteDims(2, 2)) || (d == BipartiteDims(2, 4)) || (d == BipartiteDims(3, 3));
  if (!supported) {
    throw std::invalid_argument("classify: unsupported dims " + std::to_string(d.a) + "x" +
                                std::to_string(d.b));
  }
  CriterionReport report;
  const auto [ppt, min_pt_eig] = is_ppt(rho);
  report.min_pt_eig = min_pt_eig;

  bool absolutely_ppt = false;
  if (d.a == 2) {
    const double margin = as_margin_2xn(rho);
    report.margin_2xn = margin;
    absolutely_ppt = margin <= tol::psd_slack;
  } else {
    const auto [det1, det2] = absppt_margins_3xn(rho);
    report.det1_3xn = det1;
    report.det2_3xn = det2;
    absolutely_ppt = det1 >= -tol::psd_slack && det2 >= -tol::psd_slack;
  }

  if (!ppt) {
    return {StateClass::NPPT, report};
  }
  return {absolutely_ppt ? StateClass::ABS_PPT : StateClass::PPT_NOT_ABS, report};
}

}  // namespace abswit
