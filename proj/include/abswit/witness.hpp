#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <utility>
#include <variant>
#include <vector>

#include "abswit/linalg.hpp"
#include "abswit/states.hpp"

// Witness construction W = U^dagger (|phi><phi|)^{T_B} U for non-absolutely-PPT
// states, the nonlinear functionals F1 and F2 obtained by subtracting quadratic
// correction terms, and bisection for detection thresholds along one-parameter
// state families.

namespace abswit {

struct WitnessSpec {
  UnitaryOperator unitary;
  Ket phi;

  WitnessSpec(UnitaryOperator u, Ket p) : unitary(std::move(u)), phi(std::move(p)) {
    if (unitary.matrix.rows() != phi.dims.total()) {
      throw std::invalid_argument("WitnessSpec: unitary dimension " +
                                  std::to_string(unitary.matrix.rows()) +
                                  " does not match phi dims " +
                                  std::to_string(phi.dims.total()));
    }
  }
};

// F1 subtracts a single term built from |phi><psi|; F2 subtracts the terms of a
// complete orthonormal basis {|psi_i>}.
struct F1Mode {
  Ket psi;
};
struct F2Mode {
  std::vector<Ket> basis;
};

struct NonlinearSpec {
  WitnessSpec base;
  std::variant<F1Mode, F2Mode> mode;
};

namespace detail {

// Rotate the global phase so the first nonzero amplitude is real positive.
inline ComplexVector phase_normalized(ComplexVector v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tol::norm) {
      v *= std::conj(v(i)) / std::abs(v(i));
      break;
    }
  }
  return v;
}

// (U rho U^dagger)^{T_B}
inline ComplexMatrix conjugated_pt(const UnitaryOperator& u, const DensityOperator& rho) {
  return partial_transpose(u.matrix * rho.matrix * u.matrix.adjoint(), rho.dims);
}

// <U^dagger M^{T_B} U> <(U^dagger M^{T_B} U)^dagger> with respect to rho, checked
// real nonnegative.
inline double quadratic_term(const ComplexMatrix& m, const UnitaryOperator& u,
                             const DensityOperator& rho) {
  const ComplexMatrix rotated = u.matrix.adjoint() * partial_transpose(m, rho.dims) * u.matrix;
  const Complex forward = expectation(rotated, rho.matrix);
  const Complex backward = expectation(rotated.adjoint(), rho.matrix);
  const Complex product = forward * backward;
  if (std::abs(product.imag()) > tol::norm || product.real() < -tol::norm) {
    std::ostringstream os;
    os << "quadratic witness term <M><M^dagger> = (" << product.real() << ", "
       << product.imag() << ") is not real nonnegative";
    throw NumericError(os.str());
  }
  return product.real();
}

}  // namespace detail

// Eigenvector of the most negative eigenvalue of (U rho U^dagger)^{T_B}, phase
// normalized. Throws NoNegativeEigenvalue when the unitary fails to entangle rho.
inline Ket optimal_phi(const DensityOperator& rho, const UnitaryOperator& u) {
  const EigPair bottom = min_eigpair(detail::conjugated_pt(u, rho));
  if (bottom.value >= -tol::psd_slack) {
    std::ostringstream os;
    os << "optimal_phi: conjugated partial transpose has no negative eigenvalue "
          "(min = "
       << bottom.value << ")";
    throw NoNegativeEigenvalue(os.str());
  }
  return Ket(rho.dims, detail::phase_normalized(bottom.vector));
}

// U^dagger (|phi><phi|)^{T_B} U; Hermitian with trace 1.
inline ComplexMatrix linear_witness(const WitnessSpec& spec) {
  const ComplexMatrix pt = partial_transpose(spec.phi.projector(), spec.phi.dims);
  return spec.unitary.matrix.adjoint() * pt * spec.unitary.matrix;
}

// Negative value certifies rho as non-absolutely-PPT.
inline double eval_linear(const WitnessSpec& spec, const DensityOperator& rho) {
  const Complex value = expectation(linear_witness(spec), rho.matrix);
  return value.real();
}

// Linear value minus |<U^dagger X^{T_B} U>|^2 / S(psi) with X = |phi><psi| and
// S(psi) the square of the largest Schmidt coefficient of psi.
inline double eval_F1(const NonlinearSpec& spec, const DensityOperator& rho) {
  const F1Mode* mode = std::get_if<F1Mode>(&spec.mode);
  if (mode == nullptr) {
    throw std::invalid_argument("eval_F1: spec does not carry an F1 mode");
  }
  const ComplexMatrix x = spec.base.phi.amps * mode->psi.amps.adjoint();
  const double s = largest_schmidt_square(mode->psi);
  return eval_linear(spec.base, rho) -
         detail::quadratic_term(x, spec.base.unitary, rho) / s;
}

// Linear value minus the full-basis sum of quadratic terms. The basis must be
// orthonormal and complete; equals <phi|tau|phi> - |tau|phi>|^2 for
// tau = (U rho U^dagger)^{T_B}, which is the identity the tests pin.
inline double eval_F2(const NonlinearSpec& spec, const DensityOperator& rho) {
  const F2Mode* mode = std::get_if<F2Mode>(&spec.mode);
  if (mode == nullptr) {
    throw std::invalid_argument("eval_F2: spec does not carry an F2 mode");
  }
  const int d = spec.base.phi.dims.total();
  if (static_cast<int>(mode->basis.size()) != d) {
    throw std::invalid_argument("eval_F2: basis has " + std::to_string(mode->basis.size()) +
                                " kets, need a complete set of " + std::to_string(d));
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const Complex overlap = mode->basis[i].amps.dot(mode->basis[j].amps);
      const double target = i == j ? 1.0 : 0.0;
      if (std::abs(overlap - target) > tol::herm) {
        std::ostringstream os;
        os << "eval_F2: basis not orthonormal, |<psi_" << i << "|psi_" << j
           << "> - " << target << "| = " << std::abs(overlap - target);
        throw std::invalid_argument(os.str());
      }
    }
  }
  double total = eval_linear(spec.base, rho);
  for (const Ket& psi_i : mode->basis) {
    const ComplexMatrix x = spec.base.phi.amps * psi_i.amps.adjoint();
    total -= detail::quadratic_term(x, spec.base.unitary, rho);
  }
  return total;
}

using StateFamily = std::function<DensityOperator(double)>;
using WitnessFunctional = std::function<double(const DensityOperator&)>;

// Bisection for the zero crossing of functional(family(p)) inside the bracket.
// The functional must have opposite signs at the bracket ends.
inline double detection_threshold(const StateFamily& family, const WitnessFunctional& functional,
                                  double p_lo, double p_hi) {
  double f_lo = functional(family(p_lo));
  double f_hi = functional(family(p_hi));
  if (f_lo == 0.0) return p_lo;
  if (f_hi == 0.0) return p_hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    std::ostringstream os;
    os << "detection_threshold: no sign change over [" << p_lo << ", " << p_hi << "] (f = "
       << f_lo << ", " << f_hi << ")";
    throw NoSignChange(os.str());
  }
  // 60 halvings shrink any unit bracket far below the 1e-9 residual target for
  // the O(1)-slope margins this is used on.
  for (int iter = 0; iter < 60 && p_hi - p_lo > 1e-15; ++iter) {
    const double mid = 0.5 * (p_lo + p_hi);
    const double f_mid = functional(family(mid));
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      p_lo = mid;
      f_lo = f_mid;
    } else {
      p_hi = mid;
      f_hi = f_mid;
    }
  }
  return 0.5 * (p_lo + p_hi);
}

}  // namespace abswit
