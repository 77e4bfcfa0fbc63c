#pragma once

#include <random>

#include "abswit/linalg.hpp"
#include "abswit/states.hpp"

// Seeded random samples used by property tests and the CLI's random-spec demos.

namespace abswit {

using Rng = std::mt19937_64;

inline ComplexMatrix random_ginibre(int dim, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      g(i, j) = Complex(gauss(rng), gauss(rng));
    }
  }
  return g;
}

// Haar-distributed unitary: QR of a Ginibre matrix with the R phases fixed.
inline UnitaryOperator random_unitary(int dim, Rng& rng) {
  const ComplexMatrix g = random_ginibre(dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return UnitaryOperator(std::move(q));
}

inline Ket random_ket(BipartiteDims dims, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexVector v(dims.total());
  for (int i = 0; i < dims.total(); ++i) {
    v(i) = Complex(gauss(rng), gauss(rng));
  }
  v.normalize();
  return Ket(dims, std::move(v));
}

// Full-rank random state: Haar eigenbasis with a random simplex spectrum.
inline DensityOperator random_density(BipartiteDims dims, Rng& rng) {
  const int d = dims.total();
  std::exponential_distribution<double> expo(1.0);
  RealVector w(d);
  double sum = 0.0;
  for (int i = 0; i < d; ++i) {
    w(i) = expo(rng);
    sum += w(i);
  }
  w /= sum;
  const UnitaryOperator v = random_unitary(d, rng);
  return DensityOperator(dims, v.matrix * w.asDiagonal() * v.matrix.adjoint());
}

// Random state mixed toward the maximally mixed point by 1 - weight.
inline DensityOperator random_density_near_mixed(BipartiteDims dims, double weight, Rng& rng) {
  const int d = dims.total();
  ComplexMatrix m = weight * random_density(dims, rng).matrix;
  m += (1.0 - weight) / d * ComplexMatrix::Identity(d, d);
  return DensityOperator(dims, std::move(m));
}

}  // namespace abswit
