#pragma once

// Closed-form oracles, error fields of discrete solutions against them,
// epsilon sweeps and log-log rate fits.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "dlame/clifford.hpp"
#include "dlame/lattice.hpp"
#include "dlame/orthogonal.hpp"

namespace dlame {

// Smooth orthogonal system F on origin + [0, r]^m.
template <int N>
class OrthogonalOracle {
 public:
  virtual ~OrthogonalOracle() = default;
  virtual std::string name() const = 0;
  virtual int m() const = 0;
  virtual EVec<N> point(std::span<const double> xi) const = 0;
  virtual EVec<N> partial(int i, std::span<const double> xi) const = 0;
  virtual EVec<N> second_partial(int i, std::span<const double> xi) const = 0;  // d_i d_i F
  virtual double h(int i, std::span<const double> xi) const = 0;
  // beta_ij = d_i h_j / h_i.
  virtual double beta(int i, int j, std::span<const double> xi) const = 0;
  // gamma_ij = (d_i beta_ij - d_j beta_ji) / 2 on the plane P_ij.
  virtual double gamma(int i, int j, std::span<const double> xi) const = 0;

  std::vector<double> origin;
};

struct EllipticValues {
  Eigen::Vector2d F;
  double h, beta12, beta21, gamma;
};

// F = (cosh s cos t, sinh s sin t); gamma = d_1 beta_12 = -d_2 beta_21.
EllipticValues elliptic_oracle(double s, double t);

class EllipticOracle final : public OrthogonalOracle<2> {
 public:
  explicit EllipticOracle(double s0 = 0.3, double t0 = 0.3) { origin = {s0, t0}; }
  std::string name() const override { return "elliptic"; }
  int m() const override { return 2; }
  EVec<2> point(std::span<const double> xi) const override;
  EVec<2> partial(int i, std::span<const double> xi) const override;
  EVec<2> second_partial(int i, std::span<const double> xi) const override;
  double h(int i, std::span<const double> xi) const override;
  double beta(int i, int j, std::span<const double> xi) const override;
  double gamma(int i, int j, std::span<const double> xi) const override;
};

// F = rho (sin th cos ph, sin th sin ph, cos th) in coordinates (rho, th, ph).
class SphericalOracle final : public OrthogonalOracle<3> {
 public:
  explicit SphericalOracle(double rho0 = 1.0, double th0 = 0.8, double ph0 = 0.3) { origin = {rho0, th0, ph0}; }
  std::string name() const override { return "spherical"; }
  int m() const override { return 3; }
  EVec<3> point(std::span<const double> xi) const override;
  EVec<3> partial(int i, std::span<const double> xi) const override;
  EVec<3> second_partial(int i, std::span<const double> xi) const override;
  double h(int i, std::span<const double> xi) const override;
  double beta(int i, int j, std::span<const double> xi) const override;
  double gamma(int i, int j, std::span<const double> xi) const override;
};

// Identity map of R^N restricted to m coordinates.
template <int N>
class FlatOracle final : public OrthogonalOracle<N> {
 public:
  explicit FlatOracle(int m = N) : m_(m) { this->origin.assign(static_cast<std::size_t>(m), 0.0); }
  std::string name() const override { return "flat"; }
  int m() const override { return m_; }
  EVec<N> point(std::span<const double> xi) const override {
    EVec<N> p = EVec<N>::Zero();
    for (int i = 0; i < m_; ++i) p[i] = xi[static_cast<std::size_t>(i)];
    return p;
  }
  EVec<N> partial(int i, std::span<const double>) const override { return EVec<N>::Unit(i); }
  EVec<N> second_partial(int, std::span<const double>) const override { return EVec<N>::Zero(); }
  double h(int, std::span<const double>) const override { return 1.0; }
  double beta(int, int, std::span<const double>) const override { return 0.0; }
  double gamma(int, int, std::span<const double>) const override { return 0.0; }

 private:
  int m_;
};

// Unit-speed circle of radius R through (R, 0), counter-clockwise.
SmoothCurve<2> circle_curve(double R);
// X(t) = t e_1.
template <int N>
SmoothCurve<N> line_curve() {
  SmoothCurve<N> c;
  c.x = [](double t) { return EVec<N>(t * EVec<N>::Unit(0)); };
  c.dx = [](double) { return EVec<N>(EVec<N>::Unit(0)); };
  c.ddx = [](double) { return EVec<N>(EVec<N>::Zero()); };
  return c;
}

// ---------------------------------------------------------------------------
// Oracle-derived Goursat data

template <int N>
std::vector<double> oracle_coords(const OrthogonalOracle<N>& F, std::initializer_list<std::pair<int, double>> offs) {
  std::vector<double> xi = F.origin;
  for (auto [i, t] : offs) xi[static_cast<std::size_t>(i)] += t;
  return xi;
}

// t -> F(origin + t e_i).
template <int N>
SmoothCurve<N> oracle_axis_curve(std::shared_ptr<const OrthogonalOracle<N>> F, int i) {
  SmoothCurve<N> c;
  c.x = [F, i](double t) { return F->point(oracle_coords(*F, {{i, t}})); };
  c.dx = [F, i](double t) { return F->partial(i, oracle_coords(*F, {{i, t}})); };
  c.ddx = [F, i](double t) { return F->second_partial(i, oracle_coords(*F, {{i, t}})); };
  return c;
}

// Frame adapted to F(origin) and the unit coordinate directions.
template <int N>
PinElement<N> oracle_frame(const OrthogonalOracle<N>& F) {
  std::vector<EVec<N>> dirs;
  for (int i = 0; i < F.m(); ++i) dirs.push_back(F.partial(i, F.origin).normalized());
  return frame_from_euclidean<N>(F.point(F.origin), dirs);
}

// C-surface data from closed forms (m = N = 2 only: every beta is known).
template <int N>
LameData2D<N> oracle_csurface_data(std::shared_ptr<const OrthogonalOracle<N>> F, double eps, bool stagger) {
  if (F->m() != 2 || N != 2) fail(ErrorKind::InvalidArgument, "closed-form C-surface data needs m = N = 2");
  LameData2D<N> d;
  d.psi0 = oracle_frame(*F);
  const double o = stagger ? 0.5 * eps : 0.0;
  d.h_a = [F, eps, o](int k) { return F->h(0, oracle_coords(*F, {{0, k * eps + o}})); };
  d.beta_a = [F, eps, o](int k) {
    EVec<N> b = EVec<N>::Zero();
    b[1] = F->beta(1, 0, oracle_coords(*F, {{0, k * eps + o}}));
    return b;
  };
  d.h_b = [F, eps, o](int k) { return F->h(1, oracle_coords(*F, {{1, k * eps + o}})); };
  d.beta_b = [F, eps, o](int k) {
    EVec<N> b = EVec<N>::Zero();
    b[0] = F->beta(0, 1, oracle_coords(*F, {{1, k * eps + o}}));
    return b;
  };
  d.split = [F, eps, o](int i, int j) { return F->gamma(0, 1, oracle_coords(*F, {{0, i * eps + o}, {1, j * eps + o}})); };
  d.kind = Splitting::Gamma;
  return d;
}

// Axis curves and gamma functions of F for orthosys_assemble.
template <int N>
OrthoSystemData<N> oracle_ortho_data(std::shared_ptr<const OrthogonalOracle<N>> F) {
  OrthoSystemData<N> d;
  d.psi0 = oracle_frame(*F);
  for (int i = 0; i < F->m(); ++i) d.curves.push_back(oracle_axis_curve(F, i));
  d.gamma = [F](int i, int j, double s, double t) { return F->gamma(i, j, oracle_coords(*F, {{i, s}, {j, t}})); };
  return d;
}

// ---------------------------------------------------------------------------
// Error fields

// Pointwise x^eps - F(origin + xi) over the lattice of a solved net.
template <int N>
LatticeField oracle_error_field(const OrthogonalOracle<N>& F, const LatticeField& x) {
  const MeshSpec& mesh = x.mesh();
  LatticeField e(mesh, N);
  const Grid& g = x.grid();
  MultiIndex idx(static_cast<std::size_t>(mesh.dims()));
  std::vector<double> xi(F.origin);
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    g.unravel(lin, idx);
    for (int i = 0; i < F.m(); ++i)
      xi[static_cast<std::size_t>(i)] =
          F.origin[static_cast<std::size_t>(i)] + idx[static_cast<std::size_t>(i)] * mesh.eps[static_cast<std::size_t>(i)];
    const EVec<N> p = F.point(xi);
    const auto v = x.at(lin);
    auto o = e.at(lin);
    for (int d = 0; d < N; ++d) o[static_cast<std::size_t>(d)] = v[static_cast<std::size_t>(d)] - p[d];
  }
  return e;
}

// ---------------------------------------------------------------------------
// Rates

struct RateFit {
  double slope = 0.0, intercept = 0.0, residual = 0.0;
};

// Least squares on (log eps, log error).
RateFit rate_fit(std::span<const double> errors, std::span<const double> eps);

enum class ProblemKind { CSurface, Curve, OrthoSystem, Ribaucour };

std::string to_string(ProblemKind k);

struct SweepOptions {
  ProblemKind problem = ProblemKind::CSurface;
  std::string oracle = "elliptic";  // elliptic | flat | spherical | circle:R | line
  std::vector<double> eps;
  double r = 0.3 * 3.14159265358979323846;
  int lmax = 1;
  bool stagger = false;
  std::vector<double> offset;  // oracle origin override
};

struct SweepReport {
  SweepOptions options;
  std::vector<std::vector<double>> errors;  // [l][eps index]
  std::vector<RateFit> fits;                // per l; NaN when exact or fewer than 3 eps
  std::vector<bool> exact;                  // per l: errors vanish to rounding
  std::vector<std::vector<double>> ratios;  // [l][k] = error_k / error_{k+1}
  std::vector<int> steps;                   // R per eps
};

// Error field of one solve at mesh size eps. Solver errors carry eps.
LatticeField sweep_error_field(const SweepOptions& opts, double eps);

SweepReport convergence_sweep(const SweepOptions& opts);

// Ribaucour sweep problem: elliptic axis curve, A(t) = 0.4 + 0.3 sin(2t), and
// an offset normal seed. The error field holds the per-edge enveloping
// residual.
struct RibaucourProblem {
  std::shared_ptr<const OrthogonalOracle<2>> oracle;
  RibaucourData<2> data;
};
RibaucourProblem elliptic_ribaucour_problem();

// Spherical-coordinate system with mt in {1, 2, 3} Ribaucour transforms:
// fixed seed offsets, affine/trigonometric A per axis, and corner points of
// transform pairs placed on the circle through x(0), x^(s)(0), x^(t)(0).
struct RibaucourFamilyProblem {
  std::shared_ptr<const OrthogonalOracle<3>> oracle;
  OrthoSystemData<3> data;
  std::vector<TransformData<3>> transforms;
  std::vector<EVec<3>> corners;
};
RibaucourFamilyProblem spherical_ribaucour_family_problem(int mt);

}  // namespace dlame
