#pragma once

// Minkowski space R^{N+1,1}, its Clifford algebra and the Moebius-model maps.
//
// Basis vectors are 0-based in code: basis(k) for k = 0..N is e_{k+1}
// (square -1 in the algebra, <e,e> = +1), basis(N+1) is the timelike e_{N+2}.
// Blades are bitmasks over these N+2 generators.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dlame/error.hpp"

namespace dlame {

template <int N>
using EVec = Eigen::Matrix<double, N, 1>;

template <int N>
class MinkowskiVector {
 public:
  static constexpr int kDim = N + 2;

  MinkowskiVector() { c_.fill(0.0); }

  static MinkowskiVector basis(int k) {
    MinkowskiVector v;
    v.c_[static_cast<std::size_t>(k)] = 1.0;
    return v;
  }
  static MinkowskiVector e0() {
    MinkowskiVector v;
    v.c_[N] = 0.5;
    v.c_[N + 1] = 0.5;
    return v;
  }
  static MinkowskiVector einf() {
    MinkowskiVector v;
    v.c_[N] = -0.5;
    v.c_[N + 1] = 0.5;
    return v;
  }
  // Euclidean vector x embedded in span(e_1..e_N).
  static MinkowskiVector euclidean(const EVec<N>& x) {
    MinkowskiVector v;
    for (int k = 0; k < N; ++k) v.c_[k] = x[k];
    return v;
  }

  double& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }
  double operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  const std::array<double, kDim>& coords() const { return c_; }

  EVec<N> head() const {
    EVec<N> x;
    for (int k = 0; k < N; ++k) x[k] = c_[k];
    return x;
  }

  MinkowskiVector& operator+=(const MinkowskiVector& o) {
    for (int k = 0; k < kDim; ++k) c_[k] += o.c_[k];
    return *this;
  }
  MinkowskiVector& operator-=(const MinkowskiVector& o) {
    for (int k = 0; k < kDim; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  MinkowskiVector& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  friend MinkowskiVector operator+(MinkowskiVector a, const MinkowskiVector& b) { return a += b; }
  friend MinkowskiVector operator-(MinkowskiVector a, const MinkowskiVector& b) { return a -= b; }
  friend MinkowskiVector operator*(double s, MinkowskiVector a) { return a *= s; }
  friend MinkowskiVector operator*(MinkowskiVector a, double s) { return a *= s; }
  friend MinkowskiVector operator-(MinkowskiVector a) { return a *= -1.0; }

  // Euclidean coefficient norm, used for residuals only.
  double coeff_norm() const {
    double s = 0.0;
    for (double v : c_) s += v * v;
    return std::sqrt(s);
  }

 private:
  std::array<double, kDim> c_;
};

template <int N>
double lorentz_dot(const MinkowskiVector<N>& u, const MinkowskiVector<N>& v) {
  double s = 0.0;
  for (int k = 0; k <= N; ++k) s += u[k] * v[k];
  return s - u[N + 1] * v[N + 1];
}

namespace detail {

template <int N>
struct BladeTable {
  static constexpr int kDim = N + 2;
  static constexpr int kBlades = 1 << kDim;
  // Generators 0..N square to -1, generator N+1 to +1.
  static constexpr unsigned kNegSquare = (1u << (N + 1)) - 1u;

  static constexpr int product_sign(unsigned a, unsigned b) {
    int swaps = 0;
    unsigned t = a >> 1;
    while (t) {
      swaps += std::popcount(t & b);
      t >>= 1;
    }
    swaps += std::popcount(a & b & kNegSquare);
    return (swaps & 1) ? -1 : 1;
  }

  static constexpr std::array<std::int8_t, kBlades * kBlades> make() {
    std::array<std::int8_t, kBlades * kBlades> s{};
    for (unsigned a = 0; a < kBlades; ++a)
      for (unsigned b = 0; b < kBlades; ++b)
        s[a * kBlades + b] = static_cast<std::int8_t>(product_sign(a, b));
    return s;
  }

  static constexpr std::array<std::int8_t, kBlades * kBlades> sign = make();
};

}  // namespace detail

template <int N>
class Multivector {
 public:
  static constexpr int kDim = N + 2;
  static constexpr int kBlades = 1 << kDim;

  Multivector() { c_.fill(0.0); }
  explicit Multivector(double scalar) {
    c_.fill(0.0);
    c_[0] = scalar;
  }
  static Multivector vector(const MinkowskiVector<N>& v) {
    Multivector m;
    for (int k = 0; k < kDim; ++k) m.c_[1u << k] = v[k];
    return m;
  }
  static Multivector from_coeffs(std::span<const double> coeffs) {
    Multivector m;
    std::copy(coeffs.begin(), coeffs.end(), m.c_.begin());
    return m;
  }

  double& operator[](unsigned blade) { return c_[blade]; }
  double operator[](unsigned blade) const { return c_[blade]; }
  const std::array<double, kBlades>& coeffs() const { return c_; }
  double scalar() const { return c_[0]; }

  MinkowskiVector<N> grade1() const {
    MinkowskiVector<N> v;
    for (int k = 0; k < kDim; ++k) v[k] = c_[1u << k];
    return v;
  }

  Multivector grade(int g) const {
    Multivector m;
    for (unsigned b = 0; b < kBlades; ++b)
      if (std::popcount(b) == g) m.c_[b] = c_[b];
    return m;
  }

  // Sum of squares of coefficients outside grade g.
  double mass_outside_grade(int g) const {
    double s = 0.0;
    for (unsigned b = 0; b < kBlades; ++b)
      if (std::popcount(b) != g) s += c_[b] * c_[b];
    return std::sqrt(s);
  }

  Multivector reverse() const {
    Multivector m;
    for (unsigned b = 0; b < kBlades; ++b) {
      const int g = std::popcount(b);
      m.c_[b] = ((g * (g - 1) / 2) & 1) ? -c_[b] : c_[b];
    }
    return m;
  }

  Multivector grade_involution() const {
    Multivector m;
    for (unsigned b = 0; b < kBlades; ++b)
      m.c_[b] = (std::popcount(b) & 1) ? -c_[b] : c_[b];
    return m;
  }

  double norm() const {
    double s = 0.0;
    for (double v : c_) s += v * v;
    return std::sqrt(s);
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  Multivector& operator+=(const Multivector& o) {
    for (int b = 0; b < kBlades; ++b) c_[b] += o.c_[b];
    return *this;
  }
  Multivector& operator-=(const Multivector& o) {
    for (int b = 0; b < kBlades; ++b) c_[b] -= o.c_[b];
    return *this;
  }
  Multivector& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  friend Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
  friend Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
  friend Multivector operator*(double s, Multivector a) { return a *= s; }
  friend Multivector operator*(Multivector a, double s) { return a *= s; }
  friend Multivector operator-(Multivector a) { return a *= -1.0; }

  friend Multivector operator*(const Multivector& a, const Multivector& b) {
    const auto& sign = detail::BladeTable<N>::sign;
    Multivector out;
    for (unsigned i = 0; i < kBlades; ++i) {
      const double ai = a.c_[i];
      if (ai == 0.0) continue;
      const std::int8_t* row = &sign[i * kBlades];
      for (unsigned j = 0; j < kBlades; ++j) {
        const double bj = b.c_[j];
        if (bj == 0.0) continue;
        out.c_[i ^ j] += row[j] * ai * bj;
      }
    }
    return out;
  }

 private:
  std::array<double, kBlades> c_;
};

template <int N>
Multivector<N> geometric_product(const Multivector<N>& a, const Multivector<N>& b) {
  return a * b;
}

inline constexpr double kVectorTol = 1e-12;

template <int N>
Multivector<N> invert_vector(const MinkowskiVector<N>& u) {
  const double q = lorentz_dot(u, u);
  if (std::abs(q) <= kVectorTol * std::max(1.0, u.coeff_norm() * u.coeff_norm()))
    fail(ErrorKind::NullVector, "vector on the light cone has no inverse");
  return Multivector<N>::vector(u) * (-1.0 / q);
}

enum class Parity { Even, Odd };

template <int N>
class PinElement {
 public:
  PinElement() : value_(1.0), parity_(Parity::Even) {}
  PinElement(Multivector<N> value, Parity parity) : value_(value), parity_(parity) {}

  static PinElement identity() { return PinElement(); }
  static PinElement vector(const MinkowskiVector<N>& u) {
    return PinElement(Multivector<N>::vector(u), Parity::Odd);
  }

  const Multivector<N>& value() const { return value_; }
  Parity parity() const { return parity_; }

  // psi * reverse(psi); a scalar for genuine group elements.
  double norm_scalar() const { return (value_ * value_.reverse()).scalar(); }

  PinElement inverse() const {
    const double s = norm_scalar();
    if (std::abs(s) < 1e-300) fail(ErrorKind::NullVector, "pin element is not invertible");
    return PinElement(value_.reverse() * (1.0 / s), parity_);
  }

  // Flip the overall sign so the largest-magnitude coefficient is positive
  // (first blade wins ties).
  PinElement sign_normalized() const {
    const auto& c = value_.coeffs();
    std::size_t best = 0;
    for (std::size_t b = 1; b < c.size(); ++b)
      if (std::abs(c[b]) > std::abs(c[best])) best = b;
    return c[best] < 0.0 ? PinElement(-value_, parity_) : *this;
  }

  friend PinElement operator*(const PinElement& a, const PinElement& b) {
    const Parity p = (a.parity_ == b.parity_) ? Parity::Even : Parity::Odd;
    return PinElement(a.value_ * b.value_, p);
  }

 private:
  Multivector<N> value_;
  Parity parity_;
};

inline constexpr double kNonVectorTol = 1e-9;

// A_psi(v) = psi^{-1} v psi.
template <int N>
MinkowskiVector<N> adjoint(const PinElement<N>& psi, const MinkowskiVector<N>& v) {
  const Multivector<N> r = psi.inverse().value() * Multivector<N>::vector(v) * psi.value();
  const double stray = r.mass_outside_grade(1);
  if (stray > kNonVectorTol * std::max(1.0, r.norm()))
    fail(ErrorKind::NonVectorResult, "adjoint action left the vector grade");
  return r.grade1();
}

template <int N>
MinkowskiVector<N> lift_lambda(const EVec<N>& x) {
  MinkowskiVector<N> u = MinkowskiVector<N>::euclidean(x);
  const double q = x.squaredNorm();
  u[N] = 0.5 * (1.0 - q);
  u[N + 1] = 0.5 * (1.0 + q);
  return u;
}

// Tangent vector at lambda(x) for a Euclidean direction v: v + 2<x,v> e_inf.
template <int N>
MinkowskiVector<N> lift_tangent(const EVec<N>& x, const EVec<N>& v) {
  return MinkowskiVector<N>::euclidean(v) + 2.0 * x.dot(v) * MinkowskiVector<N>::einf();
}

template <int N>
EVec<N + 1> project_pi(const MinkowskiVector<N>& u) {
  if (std::abs(u[N + 1]) <= kVectorTol * std::max(1.0, u.coeff_norm()))
    fail(ErrorKind::AtInfinity, "last coordinate vanishes");
  EVec<N + 1> p;
  for (int k = 0; k <= N; ++k) p[k] = u[k] / u[N + 1];
  return p;
}

template <int N>
EVec<N> drop_to_euclidean(const MinkowskiVector<N>& p) {
  // -2<p, e_inf> = p_{N+1} + p_{N+2}, equal to 1 on the section.
  const double s = p[N] + p[N + 1];
  if (std::abs(s) <= kVectorTol * std::max(1.0, p.coeff_norm()))
    fail(ErrorKind::AtInfinity, "point maps to infinity");
  EVec<N> x = p.head();
  if (s != 1.0) x /= s;
  return x;
}

template <int N>
EVec<N + 1> stereographic_inverse(const EVec<N>& x) {
  const double q = x.squaredNorm();
  EVec<N + 1> p;
  p.template head<N>() = (2.0 / (1.0 + q)) * x;
  p[N] = (1.0 - q) / (1.0 + q);
  return p;
}

// Element of H_inf acting as the translation by t.
template <int N>
PinElement<N> translation_frame(const EVec<N>& t) {
  const auto tv = Multivector<N>::vector(MinkowskiVector<N>::euclidean(t));
  const auto ei = Multivector<N>::vector(MinkowskiVector<N>::einf());
  return PinElement<N>(Multivector<N>(1.0) - tv * ei, Parity::Even).sign_normalized();
}

// Even element of H_inf whose adjoint action fixes e_0, e_inf and rotates the
// Euclidean block by the orthogonal matrix V (columns v_k = image of e_k).
// V must have determinant +1.
template <int N>
PinElement<N> rotation_frame(const Eigen::Matrix<double, N, N>& V) {
  Eigen::Matrix<double, N, N> Q = Eigen::Matrix<double, N, N>::Identity();
  Multivector<N> psi(1.0);
  int reflections = 0;
  for (int k = 0; k < N; ++k) {
    const EVec<N> f = Q.col(k);
    EVec<N> n;
    if (k + 1 < N) {
      const EVec<N> d = f - V.col(k);
      if (d.norm() < 1e-14) continue;
      n = d.normalized();
    } else {
      // The last column is already +-v up to rounding; a reflection built
      // from that noise would flip some perpendicular direction.
      if (f.dot(V.col(k)) > 0.0) continue;
      n = f.normalized();
    }
    Q -= 2.0 * n * (n.transpose() * Q);
    psi = psi * Multivector<N>::vector(MinkowskiVector<N>::euclidean(n));
    ++reflections;
  }
  if (reflections % 2 != 0)
    fail(ErrorKind::DegenerateBasis, "orientation-reversing basis has no even frame");
  return PinElement<N>(psi, Parity::Even);
}

inline constexpr double kBasisTol = 1e-9;

// Frame psi in H_inf with A_psi(e_0) = xhat and A_psi(e_k) = basis[k]
// (k < M). Missing directions are completed deterministically.
template <int N>
PinElement<N> frame_from_adapted_basis(const MinkowskiVector<N>& xhat,
                                       const std::vector<MinkowskiVector<N>>& basis) {
  const int M = static_cast<int>(basis.size());
  if (M > N) fail(ErrorKind::InvalidArgument, "more basis vectors than dimensions");
  const auto ei = MinkowskiVector<N>::einf();
  const double scale = std::max(1.0, xhat.coeff_norm());
  if (std::abs(lorentz_dot(xhat, xhat)) > kBasisTol * scale * scale ||
      std::abs(lorentz_dot(xhat, ei) + 0.5) > kBasisTol * scale)
    fail(ErrorKind::InvalidArgument, "point is not on the light-cone section");
  const EVec<N> x = drop_to_euclidean(xhat);

  Eigen::Matrix<double, N, Eigen::Dynamic> V(N, M);
  for (int k = 0; k < M; ++k) {
    const auto& b = basis[static_cast<std::size_t>(k)];
    if (std::abs(lorentz_dot(b, ei)) > kBasisTol || std::abs(lorentz_dot(b, xhat)) > kBasisTol * scale)
      fail(ErrorKind::InvalidArgument, "basis vector is not tangent at the point");
    V.col(k) = b.head();
  }
  if (M > 0) {
    const Eigen::MatrixXd G = V.transpose() * V;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.eigenvalues().minCoeff() < 1e-10)
      fail(ErrorKind::DegenerateBasis, "Gram matrix of the basis is singular");
    if ((G - Eigen::MatrixXd::Identity(M, M)).cwiseAbs().maxCoeff() > kBasisTol)
      fail(ErrorKind::InvalidArgument, "basis is not orthonormal");
  }

  Eigen::Matrix<double, N, N> full;
  for (int k = 0; k < M; ++k) full.col(k) = V.col(k);
  std::array<bool, N> used{};
  for (int k = M; k < N; ++k) {
    int pick = -1;
    double best = -1.0;
    EVec<N> best_vec;
    for (int c = 0; c < N; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      EVec<N> cand = EVec<N>::Unit(c);
      for (int j = 0; j < k; ++j) cand -= full.col(j).dot(cand) * full.col(j);
      const double nrm = cand.norm();
      if (nrm > best) {
        best = nrm;
        pick = c;
        best_vec = cand;
      }
    }
    used[static_cast<std::size_t>(pick)] = true;
    full.col(k) = best_vec / best;
  }
  if (full.determinant() < 0.0) {
    if (M == N)
      fail(ErrorKind::DegenerateBasis, "orientation-reversing basis has no even frame");
    full.col(N - 1) *= -1.0;
  }

  const PinElement<N> rot = rotation_frame<N>(full);
  const PinElement<N> tr = translation_frame<N>(x);
  return (rot * tr).sign_normalized();
}

// Convenience: frame at Euclidean point x with Euclidean orthonormal directions.
template <int N>
PinElement<N> frame_from_euclidean(const EVec<N>& x, const std::vector<EVec<N>>& directions) {
  std::vector<MinkowskiVector<N>> basis;
  basis.reserve(directions.size());
  for (const auto& v : directions) basis.push_back(lift_tangent<N>(x, v));
  return frame_from_adapted_basis<N>(lift_lambda<N>(x), basis);
}

}  // namespace dlame
