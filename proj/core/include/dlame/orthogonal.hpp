#pragma once

// Discrete orthogonal systems in the frame formalism: frame steps, curve
// read-off and canonical discretization, the two-dimensional discrete Lame
// system with gamma- and alpha-splitting, 3D assembly through coordinate
// C-surfaces and Ribaucour pairs.
//
// Frame labels are 0-based: label k stands for e_{k+1}. A two-dimensional
// solve maps lattice directions 0 and 1 to frame labels a and b.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dlame/clifford.hpp"
#include "dlame/conjugate.hpp"
#include "dlame/geometry.hpp"
#include "dlame/lattice.hpp"

namespace dlame {

inline constexpr double kImmersionTol = 1e-12;
inline constexpr double kFrameDriftTol = 1e-6;
inline constexpr double kDegenerateCircleTol = 1e-10;

template <int N>
struct SmoothCurve {
  std::function<EVec<N>(double)> x, dx, ddx;
};

// drop(A_psi(e_0)).
template <int N>
EVec<N> frame_to_point(const PinElement<N>& psi) {
  return drop_to_euclidean(adjoint(psi, MinkowskiVector<N>::e0()));
}

template <int N>
double infinity_drift(const PinElement<N>& psi) {
  return (adjoint(psi, MinkowskiVector<N>::einf()) - MinkowskiVector<N>::einf()).coeff_norm();
}

// ---------------------------------------------------------------------------
// Frame step

// N_i = sqrt(1 - eps^2/4 sum_{k != i} beta_k^2), positive root.
template <int N>
double frame_normalizer(int i, double eps, const EVec<N>& beta, ErrorKind on_fail = ErrorKind::SqrtDomain) {
  double s = 0.0;
  for (int k = 0; k < N; ++k)
    if (k != i) s += beta[k] * beta[k];
  const double q = 1.0 - 0.25 * eps * eps * s;
  if (!(q > 0.0)) fail(on_fail, "N_" + std::to_string(i + 1) + "^2 = " + std::to_string(q) + " <= 0");
  return std::sqrt(q);
}

// Sigma_i = N_i e_i + eps/2 sum_{k != i} beta_k e_k - eps h e_inf.
template <int N>
MinkowskiVector<N> sigma_vector(int i, double eps, double h, const EVec<N>& beta,
                                ErrorKind on_fail = ErrorKind::SqrtDomain) {
  MinkowskiVector<N> s = frame_normalizer<N>(i, eps, beta, on_fail) * MinkowskiVector<N>::basis(i);
  for (int k = 0; k < N; ++k)
    if (k != i) s[k] = 0.5 * eps * beta[k];
  return s - (eps * h) * MinkowskiVector<N>::einf();
}

// tau_i psi = -Sigma_i e_i psi.
template <int N>
PinElement<N> frame_step(const PinElement<N>& psi, int i, const MinkowskiVector<N>& sigma) {
  const Multivector<N> m = -(Multivector<N>::vector(sigma) * Multivector<N>::vector(MinkowskiVector<N>::basis(i)));
  return PinElement<N>(m, Parity::Even) * psi;
}

// v_i = A_{e_i psi}(Sigma_i), the unit edge direction of tau_i x.
template <int N>
MinkowskiVector<N> edge_direction(const PinElement<N>& psi, int i, const MinkowskiVector<N>& sigma) {
  return adjoint(PinElement<N>::vector(MinkowskiVector<N>::basis(i)) * psi, sigma);
}

// ---------------------------------------------------------------------------
// Read-off

template <int N>
struct ReadOff {
  int label = 0;
  double dt = 0.0;
  std::vector<double> h;             // at t = n dt
  std::vector<EVec<N>> beta;         // beta_{k,label}; entry `label` is zero
  std::vector<EVec<N>> tangent;      // v_label
  double max_drift = 0.0;            // worst orthonormality loss before re-projection
};

// Integrates d v_k = beta_k v_label, beta_k = -<v_k, d v_label>, with RK4 at
// step dt and Gram-Schmidt after every step. Initial normals from Psi.
template <int N>
ReadOff<N> read_off_curve(const SmoothCurve<N>& X, const PinElement<N>& Psi, int label, double dt, int samples) {
  using Mat = Eigen::Matrix<double, N, N>;
  if (!(dt > 0.0) || samples < 1) fail(ErrorKind::InvalidArgument, "read-off needs dt > 0 and samples >= 1");
  const int i = label;
  struct Tangent {
    EVec<N> u, du;
    double h;
  };
  auto tangent = [&](double t) {
    const EVec<N> d = X.dx(t), dd = X.ddx(t);
    const double h = d.norm();
    if (!(h >= kImmersionTol))
      fail(ErrorKind::ImmersionFailure, "curve speed " + std::to_string(h) + " at t = " + std::to_string(t));
    Tangent T;
    T.h = h;
    T.u = d / h;
    T.du = (dd - dd.dot(T.u) * T.u) / h;
    return T;
  };
  auto rhs = [&](double t, const Mat& V) {
    const Tangent T = tangent(t);
    Mat D = Mat::Zero();
    for (int k = 0; k < N; ++k)
      if (k != i) D.col(k) = -V.col(k).dot(T.du) * T.u;
    return D;
  };

  Mat V;
  for (int k = 0; k < N; ++k) V.col(k) = adjoint(Psi, MinkowskiVector<N>::basis(k)).head();
  {
    const Tangent T0 = tangent(0.0);
    if ((V.col(i) - T0.u).norm() > 1e-6)
      fail(ErrorKind::InvalidArgument, "frame is not adapted to the curve tangent");
  }

  ReadOff<N> out;
  out.label = label;
  out.dt = dt;
  out.h.reserve(static_cast<std::size_t>(samples));
  out.beta.reserve(static_cast<std::size_t>(samples));
  auto record = [&](double t) {
    const Tangent T = tangent(t);
    EVec<N> b = EVec<N>::Zero();
    for (int k = 0; k < N; ++k)
      if (k != i) b[k] = -V.col(k).dot(T.du);
    out.h.push_back(T.h);
    out.beta.push_back(b);
    out.tangent.push_back(T.u);
  };

  record(0.0);
  for (int n = 1; n < samples; ++n) {
    const double t = (n - 1) * dt;
    const Mat k1 = rhs(t, V);
    const Mat k2 = rhs(t + 0.5 * dt, V + 0.5 * dt * k1);
    const Mat k3 = rhs(t + 0.5 * dt, V + 0.5 * dt * k2);
    const Mat k4 = rhs(t + dt, V + dt * k3);
    V += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double tn = n * dt;
    const Tangent T = tangent(tn);
    V.col(i) = T.u;
    double drift = 0.0;
    for (int k = 0; k < N; ++k)
      for (int j = 0; j <= k; ++j)
        drift = std::max(drift, std::abs(V.col(k).dot(V.col(j)) - (j == k ? 1.0 : 0.0)));
    out.max_drift = std::max(out.max_drift, drift);
    if (drift > kFrameDriftTol)
      fail(ErrorKind::FrameDrift, "normal frame drifted by " + std::to_string(drift) + " at t = " + std::to_string(tn));
    for (int k = 0; k < N; ++k) {
      if (k == i) continue;
      EVec<N> v = V.col(k) - V.col(k).dot(T.u) * T.u;
      for (int j = 0; j < k; ++j)
        if (j != i) v -= v.dot(V.col(j)) * V.col(j);
      V.col(k) = v.normalized();
    }
    record(tn);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical discretization

template <int N>
struct DiscreteCurve {
  double eps = 0.0;
  std::vector<PinElement<N>> frames;
  std::vector<EVec<N>> points;
};

// Read-off samples per lattice step (RK4 step eps/4).
inline constexpr int kReadOffSubsteps = 4;

// Lattice data of a read-off: exact restriction or half-step staggering.
template <int N>
double sampled_h(const ReadOff<N>& ro, int k, bool stagger) {
  return ro.h[static_cast<std::size_t>(kReadOffSubsteps * k + (stagger ? kReadOffSubsteps / 2 : 0))];
}
template <int N>
EVec<N> sampled_beta(const ReadOff<N>& ro, int k, bool stagger) {
  return ro.beta[static_cast<std::size_t>(kReadOffSubsteps * k + (stagger ? kReadOffSubsteps / 2 : 0))];
}

// Enough samples for R lattice steps (plus the staggered midpoint).
inline int read_off_samples(int R) { return kReadOffSubsteps * (R + 1) + 1; }

template <int N>
DiscreteCurve<N> canonical_discretization(const SmoothCurve<N>& X, const PinElement<N>& Psi, int label, double eps,
                                          double r, bool stagger = false) {
  const int R = steps_for(eps, r);
  const ReadOff<N> ro = read_off_curve<N>(X, Psi, label, eps / kReadOffSubsteps, read_off_samples(R));
  DiscreteCurve<N> c;
  c.eps = eps;
  c.frames.push_back(Psi);
  c.points.push_back(frame_to_point(Psi));
  for (int k = 0; k < R; ++k) {
    const auto sigma = sigma_vector<N>(label, eps, sampled_h(ro, k, stagger), sampled_beta(ro, k, stagger));
    c.frames.push_back(frame_step(c.frames.back(), label, sigma));
    c.points.push_back(frame_to_point(c.frames.back()));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Two-dimensional discrete Lame system

enum class Splitting { Gamma, Alpha };

struct LameRho {
  double rho_ab = 0.0, rho_ba = 0.0, n = 1.0, Na = 1.0, Nb = 1.0;
};

// rho for the pair (a, b) from either splitting. Theta = 1/2 sum over the
// remaining labels of beta_ka beta_kb.
//   gamma: rho_ab = eps_b N_a beta_ab - eps_a eps_b/2 (Theta - gamma)
//          rho_ba = eps_a N_b beta_ba - eps_a eps_b/2 (Theta + gamma)
//   alpha: rho_ba = eps_a alpha, rho_ab from the sum rule.
template <int N>
LameRho lame_rho(int a, int b, double ea, double eb, const EVec<N>& beta_a, const EVec<N>& beta_b, double split,
                 Splitting kind, ErrorKind b_fail = ErrorKind::SqrtDomain) {
  LameRho r;
  r.Na = frame_normalizer<N>(a, ea, beta_a);
  r.Nb = frame_normalizer<N>(b, eb, beta_b, b_fail);
  double theta = 0.0;
  for (int k = 0; k < N; ++k)
    if (k != a && k != b) theta += beta_a[k] * beta_b[k];
  theta *= 0.5;
  const double sum = eb * r.Na * beta_b[a] + ea * r.Nb * beta_a[b] - ea * eb * theta;
  if (kind == Splitting::Gamma) {
    r.rho_ab = eb * r.Na * beta_b[a] - 0.5 * ea * eb * (theta - split);
    r.rho_ba = ea * r.Nb * beta_a[b] - 0.5 * ea * eb * (theta + split);
  } else {
    r.rho_ba = ea * split;
    r.rho_ab = sum - r.rho_ba;
  }
  if (std::abs(-0.5 * sum - 1.0) < kDegenerateCircleTol)
    fail(ErrorKind::OutsideDomain, "edges span a degenerate circle (a line)");
  const double q = 1.0 - r.rho_ab * r.rho_ba;
  if (!(q > 0.0)) fail(ErrorKind::SqrtDomain, "n^2 = " + std::to_string(q) + " <= 0");
  r.n = std::sqrt(q);
  return r;
}

// tau_i of (h_j, beta_{.j}) for a step in label i with rho_ij and n.
template <int N>
void lame_update(int i, int j, double ei, double ej, double hi, const EVec<N>& beta_i, double rho_ij, double n,
                 double Ni, double& hj, EVec<N>& beta_j) {
  const double inv = 1.0 / (n * ej);
  EVec<N> nb = EVec<N>::Zero();
  for (int k = 0; k < N; ++k)
    if (k != i && k != j) nb[k] = (ej * beta_j[k] + ei * beta_i[k] * rho_ij) * inv;
  nb[i] = (2.0 * Ni * rho_ij - ej * beta_j[i]) * inv;
  hj = (ej * hj + ei * hi * rho_ij) * inv;
  beta_j = nb;
}

struct LameLayout {
  static constexpr int psi = 0, h_a = 1, beta_a = 2, h_b = 3, beta_b = 4, split = 5;
};

template <int N>
struct LameData2D {
  int a = 0, b = 1;
  PinElement<N> psi0;
  std::function<double(int)> h_a;          // on lattice axis 0
  std::function<EVec<N>(int)> beta_a;
  std::function<double(int)> h_b;          // on lattice axis 1
  std::function<EVec<N>(int)> beta_b;
  std::function<double(int, int)> split;   // gamma or alpha at a site
  Splitting kind = Splitting::Gamma;
};

template <int N>
HyperbolicSystem make_lame_system(int a, int b, Splitting kind) {
  using L = LameLayout;
  constexpr int kB = Multivector<N>::kBlades;
  HyperbolicSystem sys(2);
  sys.add_component("psi", kB, {0, 1});
  sys.add_component("h_a", 1, {1});
  sys.add_component("beta_a", N, {1});
  sys.add_component("h_b", 1, {0});
  sys.add_component("beta_b", N, {0});
  // (value, live): live = 0 marks the last layer of a discrete direction,
  // where the other direction's data are never consumed.
  sys.add_component("split", 2, {});

  auto vec = [](std::span<const double> s) {
    EVec<N> v;
    for (int k = 0; k < N; ++k) v[k] = s[static_cast<std::size_t>(k)];
    return v;
  };
  auto store = [](const EVec<N>& v, std::span<double> s) {
    for (int k = 0; k < N; ++k) s[static_cast<std::size_t>(k)] = v[k];
  };

  for (int dir = 0; dir < 2; ++dir) {
    const int lab = dir == 0 ? a : b;
    const int hi_c = dir == 0 ? L::h_a : L::h_b, bi_c = dir == 0 ? L::beta_a : L::beta_b;
    sys.add_rule(dir, {L::psi}, {L::psi, hi_c, bi_c},
                 [=](const CornerView& u, const CornerOutput& out, const MeshSpec& mesh) {
                   const double e = mesh.eps[static_cast<std::size_t>(dir)];
                   const ErrorKind ek = mesh.is_tail(dir) ? ErrorKind::OutsideDomain : ErrorKind::SqrtDomain;
                   const auto sigma = sigma_vector<N>(lab, e, u[hi_c][0], vec(u[bi_c]), ek);
                   const auto psi = PinElement<N>(Multivector<N>::from_coeffs(u[L::psi]), Parity::Even);
                   const auto next = frame_step(psi, lab, sigma);
                   const auto& c = next.value().coeffs();
                   std::copy(c.begin(), c.end(), out[L::psi].begin());
                 });
  }
  auto pair_rule = [=](int dir) {
    return [=](const CornerView& u, const CornerOutput& out, const MeshSpec& mesh) {
      const double ea = mesh.eps[0], eb = mesh.eps[1];
      const int oh = dir == 0 ? L::h_b : L::h_a, ob = dir == 0 ? L::beta_b : L::beta_a;
      if (dir == 0 && u[L::split][1] == 0.0) {
        out[oh][0] = u[oh][0];
        std::copy(u[ob].begin(), u[ob].end(), out[ob].begin());
        return;
      }
      const EVec<N> ba = vec(u[L::beta_a]), bb = vec(u[L::beta_b]);
      const ErrorKind bk = mesh.is_tail(1) ? ErrorKind::OutsideDomain : ErrorKind::SqrtDomain;
      const LameRho r = lame_rho<N>(a, b, ea, eb, ba, bb, u[L::split][0], kind, bk);
      double h;
      EVec<N> beta;
      if (dir == 0) {
        h = u[L::h_b][0];
        beta = bb;
        lame_update<N>(a, b, ea, eb, u[L::h_a][0], ba, r.rho_ab, r.n, r.Na, h, beta);
      } else {
        h = u[L::h_a][0];
        beta = ba;
        lame_update<N>(b, a, eb, ea, u[L::h_b][0], bb, r.rho_ba, r.n, r.Nb, h, beta);
      }
      out[oh][0] = h;
      store(beta, out[ob]);
    };
  };
  const std::vector<int> scalars{L::h_a, L::beta_a, L::h_b, L::beta_b, L::split};
  sys.add_rule(0, {L::h_b, L::beta_b}, scalars, pair_rule(0));
  sys.add_rule(1, {L::h_a, L::beta_a}, scalars, pair_rule(1));
  sys.check_complete();
  return sys;
}

template <int N>
struct LameNet2D {
  MeshSpec mesh;
  int a = 0, b = 1;
  Splitting kind = Splitting::Gamma;
  GoursatSolution raw;
  LatticeField x;

  PinElement<N> frame(int k0, int k1) const {
    const int idx[2] = {k0, k1};
    return PinElement<N>(Multivector<N>::from_coeffs(raw.fields[LameLayout::psi].at(idx)), Parity::Even);
  }
  EVec<N> point(int k0, int k1) const {
    const int idx[2] = {k0, k1};
    const auto v = x.at(idx);
    EVec<N> p;
    for (int k = 0; k < N; ++k) p[k] = v[static_cast<std::size_t>(k)];
    return p;
  }
  double h(int dir, int k0, int k1) const {
    const int idx[2] = {k0, k1};
    return raw.fields[dir == 0 ? LameLayout::h_a : LameLayout::h_b].at(idx)[0];
  }
  EVec<N> beta(int dir, int k0, int k1) const {
    const int idx[2] = {k0, k1};
    const auto v = raw.fields[dir == 0 ? LameLayout::beta_a : LameLayout::beta_b].at(idx);
    EVec<N> p;
    for (int k = 0; k < N; ++k) p[k] = v[static_cast<std::size_t>(k)];
    return p;
  }
  double split(int k0, int k1) const {
    const int idx[2] = {k0, k1};
    return raw.fields[LameLayout::split].at(idx)[0];
  }
  LameRho rho(int k0, int k1) const {
    return lame_rho<N>(a, b, mesh.eps[0], mesh.eps[1], beta(0, k0, k1), beta(1, k0, k1), split(k0, k1), kind);
  }
  int label(int dir) const { return dir == 0 ? a : b; }
  // v_dir at a site.
  MinkowskiVector<N> edge(int dir, int k0, int k1) const {
    const auto s = sigma_vector<N>(label(dir), mesh.eps[static_cast<std::size_t>(dir)], h(dir, k0, k1), beta(dir, k0, k1));
    return edge_direction(frame(k0, k1), label(dir), s);
  }
};

template <int N>
LameNet2D<N> solve_lame_2d(const LameData2D<N>& data, const MeshSpec& mesh, const GoursatOptions& opts = {}) {
  using L = LameLayout;
  mesh.validate();
  if (mesh.dims() != 2 || mesh.is_tail(0)) fail(ErrorKind::InvalidArgument, "two-dimensional solve needs a 2D mesh");
  if (data.a == data.b || data.a < 0 || data.b < 0 || data.a >= N || data.b >= N)
    fail(ErrorKind::InvalidArgument, "frame labels must be distinct and below N");
  const HyperbolicSystem sys = make_lame_system<N>(data.a, data.b, data.kind);
  const bool tail_b = mesh.is_tail(1);
  const int last_b = mesh.steps[1];
  const GoursatData g = [&](int k, std::span<const int> site, std::span<double> out) {
    auto put = [&](const EVec<N>& v) {
      for (int d = 0; d < N; ++d) out[static_cast<std::size_t>(d)] = v[d];
    };
    switch (k) {
      case L::psi: {
        const auto& c = data.psi0.value().coeffs();
        std::copy(c.begin(), c.end(), out.begin());
        break;
      }
      case L::h_a: out[0] = data.h_a(site[0]); break;
      case L::beta_a: put(data.beta_a(site[0])); break;
      // On the far layer of a discrete direction h_b, beta_b are inert.
      case L::h_b: out[0] = data.h_b(tail_b ? 0 : site[1]); break;
      case L::beta_b: put(data.beta_b(tail_b ? 0 : site[1])); break;
      case L::split:
        out[0] = data.split(site[0], site[1]);
        out[1] = (tail_b && site[1] == last_b) ? 0.0 : 1.0;
        break;
      default: break;
    }
  };
  LameNet2D<N> net;
  net.mesh = mesh;
  net.a = data.a;
  net.b = data.b;
  net.kind = data.kind;
  net.raw = goursat_solve(sys, g, mesh, opts);
  net.x = LatticeField(mesh, N);
  const Grid& grid = net.x.grid();
  int idx[2];
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    grid.unravel(lin, idx);
    const EVec<N> p = frame_to_point(net.frame(idx[0], idx[1]));
    auto o = net.x.at(lin);
    for (int d = 0; d < N; ++d) o[static_cast<std::size_t>(d)] = p[d];
  }
  return net;
}

// Discrete C-surface on B^eps(r) with gamma-splitting.
template <int N>
LameNet2D<N> csurface_solve(LameData2D<N> data, double eps, double r, const GoursatOptions& opts = {}) {
  data.kind = Splitting::Gamma;
  return solve_lame_2d<N>(data, MeshSpec::uniform(2, eps, r), opts);
}

struct LameInvariants {
  double membership = 0.0;   // |A_psi(e_inf) - e_inf|
  double frame = 0.0;        // |tau_i psi + Sigma_i e_i psi|
  double edge = 0.0;         // |tau_i x - x - eps h v_i|
  double circle_law = 0.0;   // |rho_ab + rho_ba + 2 <v_a, v_b>|
  double normalizer = 0.0;   // |n^2 - 1 + rho_ab rho_ba|
  double rotation = 0.0;     // |n tau_i v_j - v_j - rho_ji v_i|
  double circularity = 0.0;  // worst circularity_residual over cells
};

template <int N>
LameInvariants lame_invariants(const LameNet2D<N>& net) {
  LameInvariants inv;
  const int s0 = net.mesh.steps[0], s1 = net.mesh.steps[1];
  const auto e0 = MinkowskiVector<N>::e0();
  auto to_vec = [](const EVec<N>& p) { return Eigen::VectorXd(p); };
  for (int i = 0; i <= s0; ++i)
    for (int j = 0; j <= s1; ++j) {
      const PinElement<N> psi = net.frame(i, j);
      inv.membership = std::max(inv.membership, infinity_drift(psi));
      const auto xhat = adjoint(psi, e0);
      for (int dir = 0; dir < 2; ++dir) {
        const int ni = dir == 0 ? i + 1 : i, nj = dir == 0 ? j : j + 1;
        if (ni > s0 || nj > s1) continue;
        const double e = net.mesh.eps[static_cast<std::size_t>(dir)];
        const auto sigma = sigma_vector<N>(net.label(dir), e, net.h(dir, i, j), net.beta(dir, i, j));
        const PinElement<N> next = net.frame(ni, nj);
        const Multivector<N> diff = next.value() - frame_step(psi, net.label(dir), sigma).value();
        inv.frame = std::max(inv.frame, diff.max_abs());
        const auto v = edge_direction(psi, net.label(dir), sigma);
        const auto xn = adjoint(next, e0);
        inv.edge = std::max(inv.edge, (xn - xhat - (e * net.h(dir, i, j)) * v).coeff_norm());
      }
      if (i >= s0 || j >= s1) continue;
      const LameRho r = net.rho(i, j);
      const auto va = net.edge(0, i, j), vb = net.edge(1, i, j);
      inv.circle_law = std::max(inv.circle_law, std::abs(r.rho_ab + r.rho_ba + 2.0 * lorentz_dot(va, vb)));
      inv.normalizer = std::max(inv.normalizer, std::abs(r.n * r.n - 1.0 + r.rho_ab * r.rho_ba));
      // n tau_a v_b = v_b + rho_ba v_a, and symmetrically.
      inv.rotation = std::max(inv.rotation, (r.n * net.edge(1, i + 1, j) - vb - r.rho_ba * va).coeff_norm());
      inv.rotation = std::max(inv.rotation, (r.n * net.edge(0, i, j + 1) - va - r.rho_ab * vb).coeff_norm());
      inv.circularity = std::max(inv.circularity,
                                 circularity_residual(to_vec(net.point(i, j)), to_vec(net.point(i + 1, j)),
                                                      to_vec(net.point(i, j + 1)), to_vec(net.point(i + 1, j + 1))));
    }
  return inv;
}

// Corner state of the Lame system at a site (for consistency checks).
template <int N>
CornerState lame_corner(const PinElement<N>& psi, double h_a, const EVec<N>& beta_a, double h_b, const EVec<N>& beta_b,
                        double split) {
  CornerState u(6);
  const auto& c = psi.value().coeffs();
  u[LameLayout::psi].assign(c.begin(), c.end());
  u[LameLayout::h_a] = {h_a};
  u[LameLayout::beta_a].assign(beta_a.data(), beta_a.data() + N);
  u[LameLayout::h_b] = {h_b};
  u[LameLayout::beta_b].assign(beta_b.data(), beta_b.data() + N);
  u[LameLayout::split] = {split, 1.0};
  return u;
}

// ---------------------------------------------------------------------------
// 3D assembly

template <int N>
struct OrthoSystemData {
  PinElement<N> psi0;                  // adapted to X(0) and the axis tangents
  std::vector<SmoothCurve<N>> curves;  // axis curves X_i, i < m
  // Gamma_ij at (xi_i, xi_j) = (s, t) on the plane P_ij, i < j.
  std::function<double(int i, int j, double s, double t)> gamma;
};

inline int pair_index(int m, int i, int j) {
  // lexicographic index of {i < j} among pairs of 0..m-1
  return i * (2 * m - i - 1) / 2 + (j - i - 1);
}

template <int N>
struct OrthoSystem {
  MeshSpec mesh;
  std::vector<ReadOff<N>> readoffs;
  std::vector<LameNet2D<N>> surfaces;  // per pair i < j, lattice dirs (i, j)
  ConjugateNet net;

  int m() const { return mesh.dims(); }
  const LameNet2D<N>& surface(int i, int j) const {
    return surfaces[static_cast<std::size_t>(pair_index(m(), i, j))];
  }
};

template <int N>
LameData2D<N> surface_data(const OrthoSystemData<N>& d, const std::vector<ReadOff<N>>& ro, int i, int j, double eps,
                           bool stagger) {
  LameData2D<N> s;
  s.a = i;
  s.b = j;
  s.psi0 = d.psi0;
  s.kind = Splitting::Gamma;
  const ReadOff<N>* ri = &ro[static_cast<std::size_t>(i)];
  const ReadOff<N>* rj = &ro[static_cast<std::size_t>(j)];
  s.h_a = [ri, stagger](int k) { return sampled_h(*ri, k, stagger); };
  s.beta_a = [ri, stagger](int k) { return sampled_beta(*ri, k, stagger); };
  s.h_b = [rj, stagger](int k) { return sampled_h(*rj, k, stagger); };
  s.beta_b = [rj, stagger](int k) { return sampled_beta(*rj, k, stagger); };
  const double off = stagger ? 0.5 * eps : 0.0;
  s.split = [g = d.gamma, i, j, eps, off](int k0, int k1) { return g(i, j, k0 * eps + off, k1 * eps + off); };
  return s;
}

// Per-cell (c_ij, c_ji) tables of one surface; zero outside the cells.
template <int N>
std::vector<std::pair<double, double>> surface_coefficients(const LameNet2D<N>& s) {
  const int s0 = s.mesh.steps[0], s1 = s.mesh.steps[1];
  std::vector<std::pair<double, double>> c(static_cast<std::size_t>((s0 + 1) * (s1 + 1)), {0.0, 0.0});
  for (int p = 0; p < s0; ++p)
    for (int q = 0; q < s1; ++q)
      c[static_cast<std::size_t>(p * (s1 + 1) + q)] =
          extract_rotation_coeffs(Eigen::VectorXd(s.point(p, q)), Eigen::VectorXd(s.point(p + 1, q)),
                                  Eigen::VectorXd(s.point(p, q + 1)), Eigen::VectorXd(s.point(p + 1, q + 1)),
                                  s.mesh.eps[0], s.mesh.eps[1]);
  return c;
}

template <int N>
OrthoSystem<N> orthosys_assemble(const OrthoSystemData<N>& d, double eps, double r, bool stagger = false) {
  const int m = static_cast<int>(d.curves.size());
  if (m < 2 || m > N) fail(ErrorKind::InvalidArgument, "need 2 <= m <= N axis curves");
  OrthoSystem<N> sys;
  sys.mesh = MeshSpec::uniform(m, eps, r);
  const int R = sys.mesh.steps[0];
  for (int i = 0; i < m; ++i)
    sys.readoffs.push_back(
        read_off_curve<N>(d.curves[static_cast<std::size_t>(i)], d.psi0, i, eps / kReadOffSubsteps, read_off_samples(R)));
  std::vector<std::vector<std::pair<double, double>>> coeffs;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      sys.surfaces.push_back(csurface_solve<N>(surface_data(d, sys.readoffs, i, j, eps, stagger), eps, r));
      coeffs.push_back(surface_coefficients(sys.surfaces.back()));
    }

  ConjugateNetData cd;
  cd.origin = frame_to_point(d.psi0);
  const OrthoSystem<N>* S = &sys;
  cd.edge = [S, m, eps, R](int i, int k) -> Vec {
    k = std::min(k, R - 1);  // the far end of an axis has no outgoing edge
    const auto& s = i + 1 < m ? S->surface(i, i + 1) : S->surface(i - 1, i);
    const bool first = i + 1 < m;
    const EVec<N> p0 = first ? s.point(k, 0) : s.point(0, k);
    const EVec<N> p1 = first ? s.point(k + 1, 0) : s.point(0, k + 1);
    return Vec((p1 - p0) / eps);
  };
  cd.coeff = [&coeffs, m, R](int i, int j, std::span<const int> site) {
    const int lo = std::min(i, j), hi = std::max(i, j);
    const auto& c = coeffs[static_cast<std::size_t>(pair_index(m, lo, hi))];
    const auto& cell = c[static_cast<std::size_t>(site[static_cast<std::size_t>(lo)] * (R + 1) +
                                                  site[static_cast<std::size_t>(hi)])];
    return i == lo ? cell.first : cell.second;
  };
  sys.net = solve_conjugate_net(cd, sys.mesh, N);
  return sys;
}

// Worst circularity_residual over every elementary quad of a net.
double net_circularity(const ConjugateNet& net);
// Worst distance (relative to the local edge scale) between the eighth vertex
// of each elementary hexahedron among directions (i, j, k) and the Miquel
// point of its seven other vertices.
double net_miquel_residual(const ConjugateNet& net);
// Worst circularity of x, x^(t1), x^(t2), x^(t1 t2) over the continuous sites
// (corresponding points of four systems).
double transform_concircularity(const ConjugateNet& net, int t1, int t2);

// ---------------------------------------------------------------------------
// Ribaucour pairs

template <int N>
struct RibaucourPair {
  LameNet2D<N> net;  // lattice (curve direction, transform layer)
  std::vector<EVec<N>> x, x_plus;
};

// Raw Goursat data: read-off (h_a, beta_a) along the curve, seed (h_b,
// beta_b) of the transform edge at the origin and alpha on the curve.
template <int N>
struct RibaucourRawData {
  int a = 0, b = 1;
  PinElement<N> psi0;
  std::function<double(int)> h_a;
  std::function<EVec<N>(int)> beta_a;
  double h_b0 = 0.0;
  EVec<N> beta_b0 = EVec<N>::Zero();
  std::function<double(int)> alpha;
};

template <int N>
RibaucourPair<N> ribaucour_solve_raw(const RibaucourRawData<N>& d, double eps, double r) {
  double s = 0.0;
  for (int k = 0; k < N; ++k)
    if (k != d.b) s += d.beta_b0[k] * d.beta_b0[k];
  if (!(s < 4.0))
    fail(ErrorKind::OutsideDomain, "transform seed has sum beta_k^2 = " + std::to_string(s) + " >= 4");
  if (!(d.h_b0 > 0.0)) fail(ErrorKind::OutsideDomain, "transform seed has zero length");
  LameData2D<N> ld;
  ld.a = d.a;
  ld.b = d.b;
  ld.psi0 = d.psi0;
  ld.h_a = d.h_a;
  ld.beta_a = d.beta_a;
  ld.h_b = [h = d.h_b0](int) { return h; };
  ld.beta_b = [bb = d.beta_b0](int) { return bb; };
  ld.split = [al = d.alpha](int k0, int) { return al(k0); };
  ld.kind = Splitting::Alpha;
  MeshSpec mesh = MeshSpec::uniform(1, eps, r, 1);
  RibaucourPair<N> p;
  p.net = solve_lame_2d<N>(ld, mesh);
  for (int k = 0; k <= mesh.steps[0]; ++k) {
    p.x.push_back(p.net.point(k, 0));
    p.x_plus.push_back(p.net.point(k, 1));
  }
  return p;
}

// Seed (h_b, beta_b) of the edge from X(0) to X+(0) in frame Psi:
// Sigma_b = A_{e_b}(A_{Psi^-1}(v_b)), N_b = its e_b coefficient.
template <int N>
void ribaucour_seed(const PinElement<N>& Psi, int b, const EVec<N>& x0, const EVec<N>& xp, double& h, EVec<N>& beta) {
  h = (xp - x0).norm();
  if (!(h > 0.0)) fail(ErrorKind::OutsideDomain, "transform point coincides with the curve point");
  const MinkowskiVector<N> v = (1.0 / h) * (lift_lambda<N>(xp) - lift_lambda<N>(x0));
  const MinkowskiVector<N> w = adjoint(Psi.inverse(), v);
  if (!(w[b] > 0.0))
    fail(ErrorKind::OutsideDomain, "transform point lies on the wrong side of the frame (N_b <= 0)");
  beta = EVec<N>::Zero();
  for (int k = 0; k < N; ++k)
    if (k != b) beta[k] = -2.0 * w[k];
}

template <int N>
struct RibaucourData {
  SmoothCurve<N> curve;
  std::function<double(double)> A;  // on the curve parameter
  EVec<N> x_plus0;
};

// Frame at X(0) with e_a -> tangent and e_b toward X+(0); for N = 2 the labels
// are swapped when that is the only way to keep the frame even.
template <int N>
void ribaucour_frame(const RibaucourData<N>& d, PinElement<N>& Psi, int& a, int& b) {
  const EVec<N> x0 = d.curve.x(0.0);
  const EVec<N> t = d.curve.dx(0.0).normalized();
  EVec<N> u = d.x_plus0 - x0;
  u -= u.dot(t) * t;
  if (u.norm() < 1e-12 * std::max(1.0, (d.x_plus0 - x0).norm()))
    fail(ErrorKind::OutsideDomain, "transform point lies on the curve tangent");
  u.normalize();
  a = 0;
  b = 1;
  if constexpr (N == 2) {
    if (t[0] * u[1] - t[1] * u[0] < 0.0) std::swap(a, b);
  }
  std::vector<EVec<N>> dirs(2);
  dirs[static_cast<std::size_t>(a)] = t;
  dirs[static_cast<std::size_t>(b)] = u;
  Psi = frame_from_euclidean<N>(x0, dirs);
}

template <int N>
RibaucourPair<N> ribaucour_solve(const RibaucourData<N>& d, double eps, double r, bool stagger = false) {
  RibaucourRawData<N> raw;
  ribaucour_frame(d, raw.psi0, raw.a, raw.b);
  const int R = steps_for(eps, r);
  auto ro = std::make_shared<ReadOff<N>>(
      read_off_curve<N>(d.curve, raw.psi0, raw.a, eps / kReadOffSubsteps, read_off_samples(R)));
  raw.h_a = [ro, stagger](int k) { return sampled_h(*ro, k, stagger); };
  raw.beta_a = [ro, stagger](int k) { return sampled_beta(*ro, k, stagger); };
  ribaucour_seed<N>(raw.psi0, raw.b, d.curve.x(0.0), d.x_plus0, raw.h_b0, raw.beta_b0);
  const double off = stagger ? 0.5 * eps : 0.0;
  raw.alpha = [A = d.A, eps, off](int k) { return A(k * eps + off); };
  return ribaucour_solve_raw<N>(raw, eps, r);
}

// A = (|X+'| - |X'|) / |X+ - X| for a given transform curve.
template <int N>
std::function<double(double)> alpha_from_transform(const SmoothCurve<N>& X, const SmoothCurve<N>& Xp) {
  return [X, Xp](double t) { return (Xp.dx(t).norm() - X.dx(t).norm()) / (Xp.x(t) - X.x(t)).norm(); };
}

struct RibaucourResiduals {
  double envelope = 0.0;  // |(dX+/|dX+| + dX/|dX|) . (X+ - X)| / |X+ - X|
  double alpha = 0.0;     // ||dX+| - |dX| - A |X+ - X||
  double circularity = 0.0;
};

template <int N>
RibaucourResiduals ribaucour_residuals(const RibaucourPair<N>& p, const std::function<double(double)>& A) {
  RibaucourResiduals res;
  const double eps = p.net.mesh.eps[0];
  for (std::size_t k = 0; k + 1 < p.x.size(); ++k) {
    const EVec<N> d = (p.x[k + 1] - p.x[k]) / eps, dp = (p.x_plus[k + 1] - p.x_plus[k]) / eps;
    const EVec<N> chord = p.x_plus[k] - p.x[k];
    const double L = chord.norm();
    res.envelope = std::max(res.envelope, std::abs((dp.normalized() + d.normalized()).dot(chord)) / L);
    res.alpha = std::max(res.alpha, std::abs(dp.norm() - d.norm() - A(static_cast<double>(k) * eps) * L));
    res.circularity =
        std::max(res.circularity, circularity_residual(Eigen::VectorXd(p.x[k]), Eigen::VectorXd(p.x[k + 1]),
                                                       Eigen::VectorXd(p.x_plus[k]), Eigen::VectorXd(p.x_plus[k + 1])));
  }
  return res;
}

// m-dimensional orthogonal system with m' Ribaucour transforms as trailing
// discrete directions of one conjugate net.
template <int N>
struct TransformData {
  EVec<N> x_plus0;
  std::vector<std::function<double(double)>> A;  // per axis
};

template <int N>
struct RibaucourFamily {
  OrthoSystem<N> base;
  std::vector<std::vector<RibaucourPair<N>>> pairs;  // [transform][axis]
  ConjugateNet net;
};

// `corner_points` lists x^{(st)}(0) for transform pairs s < t in
// lexicographic order; each must lie on the circle through x(0), x^{(s)}(0)
// and x^{(t)}(0).
template <int N>
RibaucourFamily<N> ribaucour_family(const OrthoSystemData<N>& d, const std::vector<TransformData<N>>& transforms,
                                    const std::vector<EVec<N>>& corner_points, double eps, double r,
                                    bool stagger = false) {
  const int m = static_cast<int>(d.curves.size());
  const int mt = static_cast<int>(transforms.size());
  if (mt < 1) fail(ErrorKind::InvalidArgument, "need at least one transform");
  if (static_cast<int>(corner_points.size()) != mt * (mt - 1) / 2)
    fail(ErrorKind::InvalidArgument, "need one corner point per pair of transforms");
  RibaucourFamily<N> fam;
  fam.base = orthosys_assemble<N>(d, eps, r, stagger);
  const int R = fam.base.mesh.steps[0];
  const EVec<N> origin = frame_to_point(d.psi0);

  for (int t = 0; t < mt; ++t) {
    const auto& T = transforms[static_cast<std::size_t>(t)];
    if (static_cast<int>(T.A.size()) != m) fail(ErrorKind::InvalidArgument, "need one A per axis");
    std::vector<RibaucourPair<N>> row;
    for (int i = 0; i < m; ++i) {
      RibaucourData<N> rd{d.curves[static_cast<std::size_t>(i)], T.A[static_cast<std::size_t>(i)], T.x_plus0};
      row.push_back(ribaucour_solve<N>(rd, eps, r, stagger));
    }
    fam.pairs.push_back(std::move(row));
  }

  // Coefficient tables on the mixed planes (axis i, transform t).
  std::vector<std::vector<std::pair<double, double>>> mixed(static_cast<std::size_t>(mt * m));
  for (int t = 0; t < mt; ++t)
    for (int i = 0; i < m; ++i) {
      const auto& p = fam.pairs[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      auto& tab = mixed[static_cast<std::size_t>(t * m + i)];
      tab.assign(static_cast<std::size_t>(R + 1), {0.0, 0.0});
      for (int k = 0; k < R; ++k)
        tab[static_cast<std::size_t>(k)] =
            extract_rotation_coeffs(Eigen::VectorXd(p.x[static_cast<std::size_t>(k)]),
                                    Eigen::VectorXd(p.x[static_cast<std::size_t>(k + 1)]),
                                    Eigen::VectorXd(p.x_plus[static_cast<std::size_t>(k)]),
                                    Eigen::VectorXd(p.x_plus[static_cast<std::size_t>(k + 1)]), eps, 1.0);
    }
  // Transform-transform coefficients at the origin.
  std::vector<std::pair<double, double>> tails;
  for (int s = 0, c = 0; s < mt; ++s)
    for (int t = s + 1; t < mt; ++t, ++c)
      tails.push_back(extract_rotation_coeffs(
          Eigen::VectorXd(origin), Eigen::VectorXd(transforms[static_cast<std::size_t>(s)].x_plus0),
          Eigen::VectorXd(transforms[static_cast<std::size_t>(t)].x_plus0),
          Eigen::VectorXd(corner_points[static_cast<std::size_t>(c)]), 1.0, 1.0));

  MeshSpec mesh = MeshSpec::uniform(m, eps, r, mt);
  const OrthoSystem<N>* B = &fam.base;
  ConjugateNetData cd;
  cd.origin = origin;
  cd.edge = [B, &transforms, origin, m, eps, R](int i, int k) -> Vec {
    if (i >= m) return Vec(transforms[static_cast<std::size_t>(i - m)].x_plus0 - origin);
    k = std::min(k, R - 1);
    const auto& s = i + 1 < m ? B->surface(i, i + 1) : B->surface(i - 1, i);
    const bool first = i + 1 < m;
    const EVec<N> p0 = first ? s.point(k, 0) : s.point(0, k);
    const EVec<N> p1 = first ? s.point(k + 1, 0) : s.point(0, k + 1);
    return Vec((p1 - p0) / eps);
  };
  const int mtc = mt;
  cd.coeff = [B, &mixed, &tails, m, mtc, R](int i, int j, std::span<const int> site) -> double {
    const int lo = std::min(i, j), hi = std::max(i, j);
    if (hi < m) {
      const auto cell = B->net.coeff(i, j, std::vector<int>(site.begin(), site.begin() + m));
      return cell;
    }
    if (lo < m) {
      const auto& tab = mixed[static_cast<std::size_t>((hi - m) * m + lo)];
      const auto& cell = tab[static_cast<std::size_t>(site[static_cast<std::size_t>(lo)])];
      return i == lo ? cell.first : cell.second;
    }
    const int s = lo - m, t = hi - m;
    const int c = s * (2 * mtc - s - 1) / 2 + (t - s - 1);
    const auto& cell = tails[static_cast<std::size_t>(c)];
    return i == lo ? cell.first : cell.second;
  };
  fam.net = solve_conjugate_net(cd, mesh, N);
  return fam;
}

extern template LameNet2D<2> solve_lame_2d<2>(const LameData2D<2>&, const MeshSpec&, const GoursatOptions&);
extern template LameNet2D<3> solve_lame_2d<3>(const LameData2D<3>&, const MeshSpec&, const GoursatOptions&);
extern template OrthoSystem<3> orthosys_assemble<3>(const OrthoSystemData<3>&, double, double, bool);
extern template LameInvariants lame_invariants<2>(const LameNet2D<2>&);
extern template LameInvariants lame_invariants<3>(const LameNet2D<3>&);

}  // namespace dlame
