#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "abswit/linalg.hpp"

// Constructors for the state and unitary families studied by this artifact:
// generalized Werner states, the 2x4 and 3x3 Horodecki bound entangled states
// and their white-noise mixtures, and the global unitaries that map PPT members
// of those families to NPPT ones.

namespace abswit {

// Hermitian (tol::herm), positive semidefinite (min eigenvalue >= -tol::psd_slack),
// unit trace (tol::eig) matrix tagged with its bipartite split.
struct DensityOperator {
  BipartiteDims dims;
  ComplexMatrix matrix;

  DensityOperator(BipartiteDims d, ComplexMatrix m) : dims(d), matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != dims.total()) {
      throw std::invalid_argument("DensityOperator: matrix dimension " +
                                  std::to_string(matrix.rows()) +
                                  " does not match dims " + std::to_string(dims.total()));
    }
    const double herm_dev = hermiticity_deviation(matrix);
    if (herm_dev > tol::herm) {
      Eigen::Index r = 0, c = 0;
      (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(&r, &c);
      std::ostringstream os;
      os << "DensityOperator: not Hermitian, max |M - M^dagger| = " << herm_dev
         << " at entry (" << r << "," << c << ")";
      throw InvariantViolation(os.str());
    }
    const double tr_dev = std::abs(matrix.trace() - Complex(1.0, 0.0));
    if (tr_dev > tol::eig) {
      std::ostringstream os;
      os << "DensityOperator: trace deviates from 1 by " << tr_dev;
      throw InvariantViolation(os.str());
    }
    const double min_eig = min_eigpair(matrix).value;
    if (min_eig < -tol::psd_slack) {
      std::ostringstream os;
      os << "DensityOperator: not positive semidefinite, min eigenvalue = " << min_eig;
      throw InvariantViolation(os.str());
    }
  }
};

struct UnitaryOperator {
  ComplexMatrix matrix;

  explicit UnitaryOperator(ComplexMatrix m) : matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols()) {
      throw std::invalid_argument("UnitaryOperator: matrix not square");
    }
    const ComplexMatrix gram = matrix.adjoint() * matrix;
    const double dev =
        (gram - ComplexMatrix::Identity(matrix.rows(), matrix.cols())).cwiseAbs().maxCoeff();
    if (dev > tol::herm) {
      std::ostringstream os;
      os << "UnitaryOperator: max |U^dagger U - I| = " << dev;
      throw InvariantViolation(os.str());
    }
  }
};

inline DensityOperator conjugate(const UnitaryOperator& u, const DensityOperator& rho) {
  return DensityOperator(rho.dims, u.matrix * rho.matrix * u.matrix.adjoint());
}

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

namespace detail {

inline void require_range(double x, double lo, double hi, const char* name) {
  if (!(x >= lo && x <= hi)) {
    std::ostringstream os;
    os << name << " = " << x << " outside [" << lo << ", " << hi << "]";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace detail

// p |xi><xi| + (1-p)/4 I with |xi> = cos(alpha)|00> + e^{i phase} sin(alpha)|11>.
inline DensityOperator gen_werner(double p, double alpha, double phase) {
  detail::require_range(p, 0.0, 1.0, "gen_werner: p");
  const BipartiteDims dims(2, 2);
  ComplexVector xi = ComplexVector::Zero(4);
  xi(0) = std::cos(alpha);
  xi(3) = std::sin(alpha) * Complex(std::cos(phase), std::sin(phase));
  ComplexMatrix m = p * (xi * xi.adjoint());
  m += (1.0 - p) / 4.0 * ComplexMatrix::Identity(4, 4);
  return DensityOperator(dims, std::move(m));
}

// The 2x4 bound entangled state, normalization 1/(7b+1). PPT for all b in [0,1],
// entangled except at the endpoints.
inline DensityOperator horodecki_2x4(double b) {
  detail::require_range(b, 0.0, 1.0, "horodecki_2x4: b");
  ComplexMatrix m = ComplexMatrix::Zero(8, 8);
  for (int i : {0, 1, 2, 3, 5, 6}) m(i, i) = b;
  m(0, 5) = m(5, 0) = b;
  m(1, 6) = m(6, 1) = b;
  m(2, 7) = m(7, 2) = b;
  m(4, 4) = m(7, 7) = (1.0 + b) / 2.0;
  m(4, 7) = m(7, 4) = std::sqrt(1.0 - b * b) / 2.0;
  m /= 7.0 * b + 1.0;
  return DensityOperator(BipartiteDims(2, 4), std::move(m));
}

// p * horodecki_2x4(b) + (1-p)/8 I.
inline DensityOperator rho2(double b, double p) {
  detail::require_range(p, 0.0, 1.0, "rho2: p");
  ComplexMatrix m = p * horodecki_2x4(b).matrix;
  m += (1.0 - p) / 8.0 * ComplexMatrix::Identity(8, 8);
  return DensityOperator(BipartiteDims(2, 4), std::move(m));
}

// (2/7)|psi~><psi~| + (b/7) sigma_+ + ((5-b)/7) sigma_- with the standard qutrit
// components; PPT for b in [1,4].
inline DensityOperator horodecki_3x3(double b) {
  detail::require_range(b, 1.0, 4.0, "horodecki_3x3: b");
  const BipartiteDims dims(3, 3);
  ComplexVector psi = ComplexVector::Zero(9);
  psi(0) = psi(4) = psi(8) = 1.0 / std::sqrt(3.0);  // (|00> + |11> + |22>)/sqrt(3)
  ComplexMatrix sigma_plus = ComplexMatrix::Zero(9, 9);
  sigma_plus(1, 1) = sigma_plus(5, 5) = sigma_plus(6, 6) = 1.0 / 3.0;  // |01>,|12>,|20>
  ComplexMatrix sigma_minus = ComplexMatrix::Zero(9, 9);
  sigma_minus(3, 3) = sigma_minus(7, 7) = sigma_minus(2, 2) = 1.0 / 3.0;  // |10>,|21>,|02>
  ComplexMatrix m = (2.0 / 7.0) * (psi * psi.adjoint());
  m += (b / 7.0) * sigma_plus + ((5.0 - b) / 7.0) * sigma_minus;
  return DensityOperator(dims, std::move(m));
}

// p * horodecki_3x3(b) + (1-p)/9 I.
inline DensityOperator rho3(double b, double p) {
  detail::require_range(p, 0.0, 1.0, "rho3: p");
  ComplexMatrix m = p * horodecki_3x3(b).matrix;
  m += (1.0 - p) / 9.0 * ComplexMatrix::Identity(9, 9);
  return DensityOperator(BipartiteDims(3, 3), std::move(m));
}

// The two-qubit global unitary mixing |00> and |11>.
inline UnitaryOperator u_2q() {
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = r;
  m(0, 3) = r;
  m(1, 1) = 1.0;
  m(2, 2) = 1.0;
  m(3, 0) = -r;
  m(3, 3) = r;
  return UnitaryOperator(std::move(m));
}

namespace detail {

// a1 (sx x sy x sz) + a2 (sy x sz x sx) + a3 (sz x sx x sy); unitary because the
// three Pauli products pairwise anticommute and square to the identity.
inline ComplexMatrix pauli_sum_8x8(double phi1, double phi2) {
  const double a1 = std::cos(phi1);
  const double a2 = std::sin(phi1) * std::sin(phi2);
  const double a3 = std::sin(phi1) * std::cos(phi2);
  ComplexMatrix m = a1 * kron(kron(pauli_x(), pauli_y()), pauli_z());
  m += a2 * kron(kron(pauli_y(), pauli_z()), pauli_x());
  m += a3 * kron(kron(pauli_z(), pauli_x()), pauli_y());
  return m;
}

}  // namespace detail

inline UnitaryOperator u_pauli_2x4(double phi1, double phi2) {
  return UnitaryOperator(detail::pauli_sum_8x8(phi1, phi2));
}

// The 8x8 Pauli sum direct-summed with the 1x1 block [1].
inline UnitaryOperator u_pauli_3x3(double phi1, double phi2) {
  ComplexMatrix m = ComplexMatrix::Zero(9, 9);
  m.topLeftCorner(8, 8) = detail::pauli_sum_8x8(phi1, phi2);
  m(8, 8) = 1.0;
  return UnitaryOperator(std::move(m));
}

// Mixes the first and last basis vectors, identity in between.
inline UnitaryOperator u_appendix(int dim) {
  if (dim != 8 && dim != 9) {
    throw std::invalid_argument("u_appendix: unsupported dim " + std::to_string(dim));
  }
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix m = ComplexMatrix::Identity(dim, dim);
  m(0, 0) = r;
  m(0, dim - 1) = r;
  m(dim - 1, 0) = -r;
  m(dim - 1, dim - 1) = r;
  return UnitaryOperator(std::move(m));
}

}  // namespace abswit
