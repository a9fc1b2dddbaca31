#pragma once

// Shared random generators and small oracles for the test suites.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dlame/clifford.hpp"

namespace dlame::test {

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

template <int N>
MinkowskiVector<N> random_minkowski(double scale = 1.0) {
  MinkowskiVector<N> v;
  for (int k = 0; k < N + 2; ++k) v[k] = uniform(-scale, scale);
  return v;
}

template <int N>
EVec<N> random_point(double scale = 1.0) {
  EVec<N> x;
  for (int k = 0; k < N; ++k) x[k] = uniform(-scale, scale);
  return x;
}

template <int N>
EVec<N> random_unit() {
  EVec<N> x;
  do x = random_point<N>();
  while (x.norm() < 0.1);
  return x.normalized();
}

// u = a + c e_inf with |a| = 1 Euclidean: u^2 = -1 and <u, e_inf> = 0.
template <int N>
MinkowskiVector<N> random_hinf_generator() {
  return MinkowskiVector<N>::euclidean(random_unit<N>()) + uniform(-2.0, 2.0) * MinkowskiVector<N>::einf();
}

// Even product of 2 * pairs generators: an element of H_inf.
template <int N>
PinElement<N> random_hinf(int pairs = 2) {
  PinElement<N> psi;
  for (int k = 0; k < 2 * pairs; ++k) psi = psi * PinElement<N>::vector(random_hinf_generator<N>());
  return psi;
}

// Positively oriented orthonormal matrix.
template <int N>
Eigen::Matrix<double, N, N> random_rotation() {
  Eigen::Matrix<double, N, N> A;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) A(i, j) = uniform(-1.0, 1.0);
  Eigen::Matrix<double, N, N> Q = A.householderQr().householderQ();
  if (Q.determinant() < 0.0) Q.col(0) *= -1.0;
  return Q;
}

template <int N>
double dist(const MinkowskiVector<N>& a, const MinkowskiVector<N>& b) {
  return (a - b).coeff_norm();
}

}  // namespace dlame::test
