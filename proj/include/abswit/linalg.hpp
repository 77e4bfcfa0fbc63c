#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

// Dense complex linear algebra on small bipartite systems (total dimension <= 16):
// Kronecker products, partial transposition, Hermitian eigendecomposition with a
// deterministic ordering, Schmidt coefficients and hyperspherical parameterization
// of real unit vectors.

namespace abswit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Centralized tolerances. Spectra and margins in this artifact are O(1), so all
// sign tests use absolute tolerances.
namespace tol {
inline constexpr double eig = 1e-10;
inline constexpr double herm = 1e-10;
inline constexpr double psd_slack = 1e-10;
inline constexpr double norm = 1e-12;
}  // namespace tol

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// A constructed value failed its defining invariant (Hermiticity, positivity, ...).
struct InvariantViolation : NumericError {
  using NumericError::NumericError;
};
// The conjugated partial transpose has no eigenvalue below -tol::psd_slack.
struct NoNegativeEigenvalue : NumericError {
  using NumericError::NumericError;
};
struct NoSignChange : NumericError {
  using NumericError::NumericError;
};
struct NoRoot : NumericError {
  using NumericError::NumericError;
};

struct BipartiteDims {
  int a = 0;
  int b = 0;

  BipartiteDims() = default;
  BipartiteDims(int da, int db) : a(da), b(db) {
    if (a < 1 || b < 1 || total() < 2 || total() > 16) {
      throw std::invalid_argument("BipartiteDims: unsupported split " +
                                  std::to_string(da) + "x" + std::to_string(db));
    }
  }

  int total() const { return a * b; }
  bool operator==(const BipartiteDims& o) const { return a == o.a && b == o.b; }
};

inline double hermiticity_deviation(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& m, double tolerance = tol::herm) {
  return m.rows() == m.cols() && hermiticity_deviation(m) <= tolerance;
}

// Unit-norm amplitude vector over the product basis |i>_A|j>_B, index i*dB + j.
// The constructor rescales to unit norm so that vectors printed with few digits
// (or given as unnormalized integer patterns) satisfy the norm invariant exactly.
struct Ket {
  BipartiteDims dims;
  ComplexVector amps;

  Ket(BipartiteDims d, ComplexVector a) : dims(d), amps(std::move(a)) {
    if (amps.size() != dims.total()) {
      throw std::invalid_argument("Ket: amplitude count " + std::to_string(amps.size()) +
                                  " does not match dims " + std::to_string(dims.total()));
    }
    const double n = amps.norm();
    if (!(n > 0.5) || !std::isfinite(n)) {
      throw std::invalid_argument("Ket: norm " + std::to_string(n) +
                                  " too far from 1 to normalize");
    }
    amps /= n;
  }

  ComplexMatrix projector() const { return amps * amps.adjoint(); }
};

inline Ket basis_ket(BipartiteDims dims, int index) {
  ComplexVector v = ComplexVector::Zero(dims.total());
  v(index) = 1.0;
  return Ket(dims, std::move(v));
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

// Transpose on subsystem B: entry (i*dB+j, k*dB+l) of the result is entry
// (i*dB+l, k*dB+j) of the input. Involutive, trace- and Hermiticity-preserving.
inline ComplexMatrix partial_transpose(const ComplexMatrix& m, BipartiteDims dims) {
  if (m.rows() != m.cols() || m.rows() != dims.total()) {
    throw std::invalid_argument("partial_transpose: matrix dimension " +
                                std::to_string(m.rows()) + " does not match dims " +
                                std::to_string(dims.total()));
  }
  const int db = dims.b;
  ComplexMatrix out(m.rows(), m.cols());
  for (int i = 0; i < dims.a; ++i) {
    for (int k = 0; k < dims.a; ++k) {
      out.block(i * db, k * db, db, db) = m.block(i * db, k * db, db, db).transpose();
    }
  }
  return out;
}

struct EighResult {
  RealVector values;      // non-increasing
  ComplexMatrix vectors;  // columns aligned with values
};

namespace detail {

// Phase key of the first amplitude with magnitude above the norm tolerance.
inline std::pair<double, double> leading_amplitude_key(const ComplexVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tol::norm) {
      return {-std::abs(v(i)), std::arg(v(i))};
    }
  }
  return {0.0, 0.0};
}

}  // namespace detail

// Hermitian eigendecomposition, eigenvalues non-increasing. Within a degenerate
// cluster (eigenvalues equal to within tol::eig) eigenvectors are ordered by
// lexicographic comparison of (-|amplitude|, phase) of their first nonzero
// amplitude, so repeated runs and different clients see the same ordering.
inline EighResult eigh_descending(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("eigh_descending: matrix not square");
  }
  const double dev = hermiticity_deviation(m);
  if (dev > tol::herm) {
    std::ostringstream os;
    os << "eigh_descending: matrix not Hermitian, max |M - M^dagger| = " << dev;
    throw InvariantViolation(os.str());
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigh_descending: eigensolver failed to converge");
  }

  const int n = static_cast<int>(m.rows());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Eigen returns ascending order; flip it.
  std::reverse(order.begin(), order.end());

  const RealVector& raw = solver.eigenvalues();
  for (int lo = 0; lo < n;) {
    int hi = lo + 1;
    while (hi < n && raw(order[lo]) - raw(order[hi]) <= tol::eig) ++hi;
    std::stable_sort(order.begin() + lo, order.begin() + hi, [&](int x, int y) {
      return detail::leading_amplitude_key(solver.eigenvectors().col(x)) <
             detail::leading_amplitude_key(solver.eigenvectors().col(y));
    });
    lo = hi;
  }

  EighResult res;
  res.values.resize(n);
  res.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    res.values(i) = raw(order[i]);
    res.vectors.col(i) = solver.eigenvectors().col(order[i]);
  }
  return res;
}

struct EigPair {
  double value = 0.0;
  ComplexVector vector;
};

inline EigPair min_eigpair(const ComplexMatrix& m) {
  const EighResult eig = eigh_descending(m);
  const Eigen::Index last = eig.values.size() - 1;
  return {eig.values(last), eig.vectors.col(last)};
}

// Tr(rho * m). Real to within tol::norm when m is Hermitian.
inline Complex expectation(const ComplexMatrix& m, const ComplexMatrix& rho) {
  if (m.rows() != rho.rows() || m.cols() != rho.cols()) {
    throw std::invalid_argument("expectation: dimension mismatch");
  }
  return (rho * m).trace();
}

// Singular values of the dA x dB amplitude matrix, non-increasing; their squares
// sum to 1 for a unit ket.
inline RealVector schmidt_values(const Ket& psi) {
  ComplexMatrix amp(psi.dims.a, psi.dims.b);
  for (int i = 0; i < psi.dims.a; ++i) {
    for (int j = 0; j < psi.dims.b; ++j) {
      amp(i, j) = psi.amps(i * psi.dims.b + j);
    }
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(amp);
  return svd.singularValues();
}

// Square of the largest Schmidt coefficient.
inline double largest_schmidt_square(const Ket& psi) {
  const RealVector sv = schmidt_values(psi);
  return sv(0) * sv(0);
}

// Real unit vector from n-1 angles: the last component is cos(theta_1), component
// k (1-based, k >= 2) is sin(theta_1)...sin(theta_{n-k}) * cos(theta_{n-k+1}), and
// the first component is the all-sines product.
inline Ket hyperspherical_ket(const std::vector<double>& angles, BipartiteDims dims) {
  const int n = dims.total();
  if (static_cast<int>(angles.size()) != n - 1) {
    throw std::invalid_argument("hyperspherical_ket: expected " + std::to_string(n - 1) +
                                " angles, got " + std::to_string(angles.size()));
  }
  ComplexVector v(n);
  double sines = 1.0;  // running product sin(theta_1)...sin(theta_m)
  v(n - 1) = std::cos(angles[0]);
  for (int m = 1; m < n - 1; ++m) {
    sines *= std::sin(angles[m - 1]);
    v(n - 1 - m) = sines * std::cos(angles[m]);
  }
  v(0) = sines * std::sin(angles[n - 2]);
  return Ket(dims, std::move(v));
}

}  // namespace abswit
