#pragma once

#include <random>

#include "isospec/lie_core.hpp"

namespace testing_util {

using namespace isospec;

template <typename Scalar>
VectorXd random_coords(const LieAlgebra<Scalar>& alg, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  VectorXd c(alg.dim());
  for (int i = 0; i < alg.dim(); ++i) c(i) = n(rng);
  return c;
}

template <typename Scalar>
Mat<Scalar> random_element(const LieAlgebra<Scalar>& alg, std::mt19937_64& rng) {
  return alg.element(random_coords(alg, rng));
}

/// Random skew-symmetric real matrix built from entries directly, bypassing any basis.
inline MatrixXd random_skew(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = d(rng);
  return a - a.transpose();
}

/// Random traceless skew-Hermitian matrix built from entries directly.
inline MatrixXcd random_su(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(d(rng), d(rng));
  MatrixXcd x = a - a.adjoint();
  x -= (x.trace() / double(n)) * MatrixXcd::Identity(n, n);
  return x;
}

/// Random rotation via QR of a Gaussian matrix, det fixed to +1.
inline MatrixXd random_rotation(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = d(rng);
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

}  // namespace testing_util
