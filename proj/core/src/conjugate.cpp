#include "dlame/conjugate.hpp"

#include <algorithm>
#include <cmath>

namespace dlame {

std::array<std::array<int, 3>, 6> triple_permutations(int a, int b, int c) {
  return {{{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}}};
}

namespace {

int perm_slot(const std::array<std::array<int, 3>, 6>& perms, int p, int q, int r) {
  for (int s = 0; s < 6; ++s)
    if (perms[static_cast<std::size_t>(s)] == std::array<int, 3>{p, q, r}) return s;
  return -1;
}

double eps_of(std::span<const double> eps, int i) { return eps[static_cast<std::size_t>(i)]; }

}  // namespace

// Unknown (p, q, r) stands for delta_p c_rq. Row (a, b, c) encodes
//   delta_a c_cb = (tau_b c_ac) c_cb + (tau_b c_ca) c_ab - (tau_a c_cb) c_ab.
std::array<double, 6> solve_triple_block(const Eigen::MatrixXd& c, std::span<const double> eps,
                                         const std::array<int, 3>& triple, int tail_begin) {
  if (tail_begin >= 0) {
    for (int t : triple) {
      if (t < tail_begin) continue;
      for (int i : triple)
        if (i != t && std::abs(1.0 + c(t, i)) < kJonasTol)
          fail(ErrorKind::DegenerateHexahedron, "Jonas coefficient c_ti = -1 leaves the admissible set");
    }
  }
  const auto perms = triple_permutations(triple[0], triple[1], triple[2]);
  Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> F;
  for (int row = 0; row < 6; ++row) {
    const auto [a, b, cc] = perms[static_cast<std::size_t>(row)];
    A(row, row) += 1.0 + eps_of(eps, a) * c(a, b);
    A(row, perm_slot(perms, b, cc, a)) -= eps_of(eps, b) * c(cc, b);
    A(row, perm_slot(perms, b, a, cc)) -= eps_of(eps, b) * c(a, b);
    F(row) = c(a, cc) * c(cc, b) + c(cc, a) * c(a, b) - c(cc, b) * c(a, b);
  }
  const Eigen::PartialPivLU<Eigen::Matrix<double, 6, 6>> lu(A);
  // Hadamard bound: |det A| <= prod of row norms.
  double scale = 1.0;
  for (int row = 0; row < 6; ++row) scale *= A.row(row).norm();
  if (!(std::abs(lu.determinant()) >= kBlockDetTol * scale))
    fail(ErrorKind::DegenerateHexahedron, "coefficient block is singular");
  const Eigen::Matrix<double, 6, 1> d = lu.solve(F);
  std::array<double, 6> out{};
  for (int s = 0; s < 6; ++s) out[static_cast<std::size_t>(s)] = d(s);
  return out;
}

std::vector<Eigen::MatrixXd> dcn_step_c(const Eigen::MatrixXd& c, std::span<const double> eps, int tail_begin) {
  const int M = static_cast<int>(c.rows());
  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(M), Eigen::MatrixXd::Zero(M, M));
  for (int a = 0; a < M; ++a)
    for (int b = a + 1; b < M; ++b)
      for (int cc = b + 1; cc < M; ++cc) {
        const auto perms = triple_permutations(a, b, cc);
        const auto d = solve_triple_block(c, eps, {a, b, cc}, tail_begin);
        for (int s = 0; s < 6; ++s) {
          const auto [p, q, r] = perms[static_cast<std::size_t>(s)];
          out[static_cast<std::size_t>(p)](r, q) = c(r, q) + eps_of(eps, p) * d[static_cast<std::size_t>(s)];
        }
      }
  return out;
}

ConjugateState shift_state(const ConjugateState& s, int i, std::span<const double> eps, int tail_begin) {
  const int M = s.M();
  const double e = eps_of(eps, i);
  ConjugateState t = s;
  t.x = s.x + e * s.w[static_cast<std::size_t>(i)];
  for (int j = 0; j < M; ++j) {
    if (j == i) continue;
    t.w[static_cast<std::size_t>(j)] =
        s.w[static_cast<std::size_t>(j)] + e * (s.c(j, i) * s.w[static_cast<std::size_t>(i)] + s.c(i, j) * s.w[static_cast<std::size_t>(j)]);
  }
  if (M >= 3) {
    const auto tc = dcn_step_c(s.c, eps, tail_begin);
    for (int k = 0; k < M; ++k)
      for (int j = 0; j < M; ++j)
        if (k != j && k != i && j != i) t.c(k, j) = tc[static_cast<std::size_t>(i)](k, j);
  }
  // w_i and the c entries carrying index i do not evolve in direction i;
  // they are copied as placeholders.
  return t;
}

namespace {

ConjugateState sub_state(const ConjugateState& s, const std::array<int, 3>& dirs) {
  ConjugateState t;
  t.x = s.x;
  t.c = Eigen::MatrixXd::Zero(3, 3);
  for (int a = 0; a < 3; ++a) {
    t.w.push_back(s.w[static_cast<std::size_t>(dirs[static_cast<std::size_t>(a)])]);
    for (int b = 0; b < 3; ++b)
      if (a != b) t.c(a, b) = s.c(dirs[static_cast<std::size_t>(a)], dirs[static_cast<std::size_t>(b)]);
  }
  return t;
}

double max_len(std::initializer_list<Vec> vs) {
  double m = 0.0;
  for (const auto& v : vs) m = std::max(m, v.norm());
  return m;
}

void reject_collapsed(const Vec& p, const std::vector<Vec>& others, double scale) {
  for (const auto& q : others)
    if ((p - q).norm() <= 1e-10 * scale)
      fail(ErrorKind::DegenerateHexahedron, "eighth vertex collapses onto a known vertex");
}

}  // namespace

Vec elementary_hexahedron(const ConjugateState& s, std::span<const double> eps) {
  if (s.M() != 3) fail(ErrorKind::InvalidArgument, "elementary hexahedron needs three directions");
  const double e1 = eps_of(eps, 0), e2 = eps_of(eps, 1), e3 = eps_of(eps, 2);
  const auto tc = dcn_step_c(s.c, eps);
  const Vec x1 = s.x + e1 * s.w[0];
  const Vec w2_1 = s.w[1] + e1 * (s.c(1, 0) * s.w[0] + s.c(0, 1) * s.w[1]);
  const Vec w3_1 = s.w[2] + e1 * (s.c(2, 0) * s.w[0] + s.c(0, 2) * s.w[2]);
  const double c32_1 = tc[0](2, 1), c23_1 = tc[0](1, 2);
  const Vec w3_12 = w3_1 + e2 * (c32_1 * w2_1 + c23_1 * w3_1);
  const Vec x12 = x1 + e2 * w2_1;
  const Vec x123 = x12 + e3 * w3_12;

  const Vec x2 = s.x + e2 * s.w[1];
  const Vec x3 = s.x + e3 * s.w[2];
  const Vec x13 = x1 + e3 * w3_1;
  const Vec w3_2 = s.w[2] + e2 * (s.c(2, 1) * s.w[1] + s.c(1, 2) * s.w[2]);
  const Vec x23 = x2 + e3 * w3_2;
  const double scale = max_len({x1 - s.x, x2 - s.x, x3 - s.x, x12 - x1, x13 - x1, x23 - x2});
  reject_collapsed(x123, {x12, x13, x23}, scale);
  return x123;
}

Vec hexahedron_from_seven(const Vec& x0, const Vec& xa, const Vec& xb, const Vec& xc, const Vec& xab,
                          const Vec& xac, const Vec& xbc) {
  const int N = static_cast<int>(x0.size());
  if (N < 3) fail(ErrorKind::InvalidArgument, "hexahedra need ambient dimension >= 3");
  Eigen::MatrixXd D(N, 3);
  D.col(0) = xa - x0;
  D.col(1) = xb - x0;
  D.col(2) = xc - x0;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
  const auto& sv = svd.singularValues();
  if (sv(2) <= 1e-12 * sv(0)) fail(ErrorKind::DegenerateHexahedron, "edges at the corner are coplanar");
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
  auto local = [&](const Vec& p) -> Eigen::Vector3d { return qr.solve(p - x0); };
  const Eigen::Vector3d ya = local(xa), yb = local(xb), yc = local(xc);
  const Eigen::Vector3d yab = local(xab), yac = local(xac), ybc = local(xbc);
  Eigen::Matrix3d Nrm;
  Eigen::Vector3d rhs;
  const Eigen::Vector3d na = (yab - ya).cross(yac - ya);
  const Eigen::Vector3d nb = (yab - yb).cross(ybc - yb);
  const Eigen::Vector3d nc = (yac - yc).cross(ybc - yc);
  Nrm.row(0) = na.transpose();
  Nrm.row(1) = nb.transpose();
  Nrm.row(2) = nc.transpose();
  rhs << na.dot(ya), nb.dot(yb), nc.dot(yc);
  const double norms = na.norm() * nb.norm() * nc.norm();
  if (norms == 0.0 || std::abs(Nrm.determinant()) <= 1e-12 * norms)
    fail(ErrorKind::DegenerateHexahedron, "face planes do not meet in a single point");
  const Eigen::Vector3d y = Nrm.partialPivLu().solve(rhs);
  const Vec p = x0 + D * y;
  const double scale = max_len({xa - x0, xb - x0, xc - x0, xab - xa, xac - xa, xbc - xb});
  reject_collapsed(p, {xab, xac, xbc}, scale);
  return p;
}

Vec elementary_hexahedron_geometric(const ConjugateState& s, std::span<const double> eps) {
  if (s.M() != 3) fail(ErrorKind::InvalidArgument, "elementary hexahedron needs three directions");
  std::array<Vec, 3> xi;
  Vec pair[3][3];
  for (int i = 0; i < 3; ++i) xi[static_cast<std::size_t>(i)] = s.x + eps_of(eps, i) * s.w[static_cast<std::size_t>(i)];
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const Vec wj_i = s.w[static_cast<std::size_t>(j)] +
                       eps_of(eps, i) * (s.c(j, i) * s.w[static_cast<std::size_t>(i)] + s.c(i, j) * s.w[static_cast<std::size_t>(j)]);
      pair[i][j] = xi[static_cast<std::size_t>(i)] + eps_of(eps, j) * wj_i;
    }
  return hexahedron_from_seven(s.x, xi[0], xi[1], xi[2], pair[0][1], pair[0][2], pair[1][2]);
}

double plane_residual(const Vec& p, const Vec& q0, const Vec& q1, const Vec& q2) {
  Eigen::MatrixXd B(q0.size(), 2);
  B.col(0) = q1 - q0;
  B.col(1) = q2 - q0;
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  const Vec d = p - q0;
  return (B * qr.solve(d) - d).norm();
}

double planarity_residual(const Vec& x00, const Vec& x10, const Vec& x01, const Vec& x11) {
  const double scale = max_len({x10 - x00, x11 - x10, x11 - x01, x01 - x00});
  if (x00.size() < 3 || scale == 0.0) return 0.0;
  Eigen::MatrixXd E(x00.size(), 3);
  E.col(0) = x10 - x00;
  E.col(1) = x01 - x00;
  E.col(2) = x11 - x00;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(E);
  return svd.singularValues()(2) / scale;
}

std::pair<double, double> extract_rotation_coeffs(const Vec& x, const Vec& xi, const Vec& xj, const Vec& xij,
                                                  double eps_i, double eps_j) {
  const Vec di = (xi - x) / eps_i;
  const Vec dj = (xj - x) / eps_j;
  const Vec dd = (xij - xi - xj + x) / (eps_i * eps_j);
  const double li = di.norm(), lj = dj.norm();
  if (li == 0.0 || lj == 0.0) fail(ErrorKind::DegenerateEdges, "quad has a zero-length edge");
  Eigen::MatrixXd B(x.size(), 2);
  B.col(0) = di / li;
  B.col(1) = dj / lj;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
  if (svd.singularValues()(1) < 1e-12) fail(ErrorKind::DegenerateEdges, "quad edges are collinear");
  if (planarity_residual(x, xi, xj, xij) > 1e-8) fail(ErrorKind::NonPlanarQuad, "quad is not planar");
  B.col(0) = di;
  B.col(1) = dj;
  const Eigen::Vector2d sol = B.colPivHouseholderQr().solve(dd);
  return {sol(1), sol(0)};
}

double check_4d_consistency(const ConjugateState& s, std::span<const double> eps) {
  if (s.M() != 4) fail(ErrorKind::InvalidArgument, "4D consistency needs four directions");
  std::vector<Vec> pts;
  for (int i = 0; i < 4; ++i) {
    std::array<int, 3> rest{};
    int n = 0;
    for (int j = 0; j < 4; ++j)
      if (j != i) rest[static_cast<std::size_t>(n++)] = j;
    const ConjugateState t = shift_state(s, i, eps);
    const std::array<double, 3> sub_eps{eps_of(eps, rest[0]), eps_of(eps, rest[1]), eps_of(eps, rest[2])};
    pts.push_back(elementary_hexahedron(sub_state(t, rest), sub_eps));
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) worst = std::max(worst, (pts[a] - pts[b]).norm());
  return worst;
}

HyperbolicSystem make_conjugate_system(int M, int N) {
  const ConjugateLayout L{M};
  HyperbolicSystem sys(M);
  std::vector<int> all(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) all[static_cast<std::size_t>(i)] = i;
  auto without = [&](std::initializer_list<int> drop) {
    std::vector<int> v;
    for (int i : all)
      if (std::find(drop.begin(), drop.end(), i) == drop.end()) v.push_back(i);
    return v;
  };
  sys.add_component("x", N, all);
  for (int i = 0; i < M; ++i) sys.add_component("w" + std::to_string(i + 1), N, without({i}));
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (i != j) sys.add_component("c" + std::to_string(i + 1) + std::to_string(j + 1), 1, without({i, j}));

  for (int i = 0; i < M; ++i) {
    sys.add_rule(i, {L.x()}, {L.x(), L.w(i)}, [L, i, N](const CornerView& u, const CornerOutput& out, const MeshSpec& mesh) {
      const double e = mesh.eps[static_cast<std::size_t>(i)];
      const auto x = u[L.x()];
      const auto wi = u[L.w(i)];
      auto o = out[L.x()];
      for (int d = 0; d < N; ++d) o[static_cast<std::size_t>(d)] = x[static_cast<std::size_t>(d)] + e * wi[static_cast<std::size_t>(d)];
    });
    for (int j = 0; j < M; ++j) {
      if (j == i) continue;
      sys.add_rule(i, {L.w(j)}, {L.w(i), L.w(j), L.c(i, j), L.c(j, i)},
                   [L, i, j, N](const CornerView& u, const CornerOutput& out, const MeshSpec& mesh) {
                     const double e = mesh.eps[static_cast<std::size_t>(i)];
                     const double cji = u[L.c(j, i)][0], cij = u[L.c(i, j)][0];
                     const auto wi = u[L.w(i)];
                     const auto wj = u[L.w(j)];
                     auto o = out[L.w(j)];
                     for (int d = 0; d < N; ++d) {
                       const auto k = static_cast<std::size_t>(d);
                       o[k] = wj[k] + e * (cji * wi[k] + cij * wj[k]);
                     }
                   });
    }
  }
  for (int a = 0; a < M; ++a)
    for (int b = a + 1; b < M; ++b)
      for (int c = b + 1; c < M; ++c) {
        const std::array<int, 3> tri{a, b, c};
        std::vector<int> inputs;
        for (int p : tri)
          for (int q : tri)
            if (p != q) inputs.push_back(L.c(p, q));
        for (int i : tri) {
          int j = -1, k = -1;
          for (int t : tri)
            if (t != i) (j < 0 ? j : k) = t;
          sys.add_rule(i, {L.c(k, j), L.c(j, k)}, inputs,
                       [L, tri, i, M](const CornerView& u, const CornerOutput& out, const MeshSpec& mesh) {
                         Eigen::MatrixXd cm = Eigen::MatrixXd::Zero(M, M);
                         for (int p : tri)
                           for (int q : tri)
                             if (p != q) cm(p, q) = u[L.c(p, q)][0];
                         const int tail_begin = mesh.tail > 0 ? mesh.continuous() : -1;
                         const auto d = solve_triple_block(cm, mesh.eps, tri, tail_begin);
                         const auto perms = triple_permutations(tri[0], tri[1], tri[2]);
                         const double e = mesh.eps[static_cast<std::size_t>(i)];
                         for (int s = 0; s < 6; ++s) {
                           const auto [p, q, r] = perms[static_cast<std::size_t>(s)];
                           if (p != i) continue;
                           out[L.c(r, q)][0] = cm(r, q) + e * d[static_cast<std::size_t>(s)];
                         }
                       });
        }
      }
  return sys;
}

Vec ConjugateNet::point(std::span<const int> idx) const {
  const auto v = x.at(idx);
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double ConjugateNet::coeff(int i, int j, std::span<const int> idx) const {
  const ConjugateLayout L{mesh.dims()};
  return raw.fields[static_cast<std::size_t>(L.c(i, j))].at(idx)[0];
}

ConjugateNetData conjugate_data_from_curves(const Vec& origin, std::vector<CurveFn> axis_curves,
                                            std::vector<Vec> tail_points, CoeffFn coeff, const MeshSpec& mesh) {
  const int m = mesh.continuous();
  if (static_cast<int>(axis_curves.size()) != m || static_cast<int>(tail_points.size()) != mesh.tail)
    fail(ErrorKind::InvalidArgument, "curve/transform counts do not match the mesh");
  ConjugateNetData d;
  d.origin = origin;
  d.edge = [origin, curves = std::move(axis_curves), tails = std::move(tail_points), mesh, m](int i, int k) -> Vec {
    if (i < m) {
      const double e = mesh.eps[static_cast<std::size_t>(i)];
      const auto& X = curves[static_cast<std::size_t>(i)];
      return (X((k + 1) * e) - X(k * e)) / e;
    }
    return tails[static_cast<std::size_t>(i - m)] - origin;
  };
  d.coeff = [coeff = std::move(coeff), mesh](int i, int j, std::span<const int> site) {
    std::vector<double> xi(site.size());
    for (std::size_t a = 0; a < site.size(); ++a) xi[a] = site[a] * mesh.eps[a];
    return coeff(i, j, xi);
  };
  return d;
}

ConjugateNet solve_conjugate_net(const ConjugateNetData& data, const MeshSpec& mesh, int N) {
  const int M = mesh.dims();
  const ConjugateLayout L{M};
  const HyperbolicSystem sys = make_conjugate_system(M, N);
  std::vector<int> comp_w(static_cast<std::size_t>(L.count()), -1);
  std::vector<std::pair<int, int>> comp_c(static_cast<std::size_t>(L.count()), {-1, -1});
  for (int i = 0; i < M; ++i) {
    comp_w[static_cast<std::size_t>(L.w(i))] = i;
    for (int j = 0; j < M; ++j)
      if (i != j) comp_c[static_cast<std::size_t>(L.c(i, j))] = {i, j};
  }
  const GoursatData g = [&](int k, std::span<const int> site, std::span<double> out) {
    if (k == L.x()) {
      for (int d = 0; d < N; ++d) out[static_cast<std::size_t>(d)] = data.origin[d];
    } else if (comp_w[static_cast<std::size_t>(k)] >= 0) {
      const int i = comp_w[static_cast<std::size_t>(k)];
      const Vec w = data.edge(i, site[static_cast<std::size_t>(i)]);
      for (int d = 0; d < N; ++d) out[static_cast<std::size_t>(d)] = w[d];
    } else {
      const auto [i, j] = comp_c[static_cast<std::size_t>(k)];
      out[0] = data.coeff(i, j, site);
    }
  };
  ConjugateNet net;
  net.mesh = mesh;
  net.N = N;
  net.raw = goursat_solve(sys, g, mesh);
  net.x = net.raw.fields[static_cast<std::size_t>(L.x())];
  return net;
}

NetResiduals conjugate_residuals(const ConjugateNet& net) {
  NetResiduals res;
  const int M = net.mesh.dims();
  const Grid& grid = net.x.grid();
  MultiIndex idx(static_cast<std::size_t>(M));
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    grid.unravel(lin, idx);
    for (int i = 0; i < M; ++i)
      for (int j = i + 1; j < M; ++j) {
        if (idx[static_cast<std::size_t>(i)] >= net.mesh.steps[static_cast<std::size_t>(i)] ||
            idx[static_cast<std::size_t>(j)] >= net.mesh.steps[static_cast<std::size_t>(j)])
          continue;
        MultiIndex a = idx, b = idx, ab = idx;
        ++a[static_cast<std::size_t>(i)];
        ++b[static_cast<std::size_t>(j)];
        ++ab[static_cast<std::size_t>(i)];
        ++ab[static_cast<std::size_t>(j)];
        const Vec x0 = net.point(idx), xa = net.point(a), xb = net.point(b), xab = net.point(ab);
        res.planarity = std::max(res.planarity, planarity_residual(x0, xa, xb, xab));
        const double ei = net.mesh.eps[static_cast<std::size_t>(i)], ej = net.mesh.eps[static_cast<std::size_t>(j)];
        const Vec di = (xa - x0) / ei, dj = (xb - x0) / ej;
        const Vec dd = (xab - xa - xb + x0) / (ei * ej);
        const Vec r = dd - net.coeff(j, i, idx) * di - net.coeff(i, j, idx) * dj;
        const double scale = std::max(di.norm(), dj.norm());
        if (scale > 0.0) res.dcn = std::max(res.dcn, r.norm() / scale);
      }
  }
  return res;
}

double jonas_permutability_check(const ConjugateNet& net, int t1, int t2) {
  const int M = net.mesh.dims();
  const Grid& grid = net.x.grid();
  MultiIndex idx(static_cast<std::size_t>(M));
  double worst = 0.0;
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    grid.unravel(lin, idx);
    bool base = true;
    for (int t = net.mesh.continuous(); t < M; ++t)
      if (idx[static_cast<std::size_t>(t)] != 0) base = false;
    if (!base) continue;
    MultiIndex a = idx, b = idx, ab = idx;
    a[static_cast<std::size_t>(t1)] = 1;
    b[static_cast<std::size_t>(t2)] = 1;
    ab[static_cast<std::size_t>(t1)] = 1;
    ab[static_cast<std::size_t>(t2)] = 1;
    worst = std::max(worst, planarity_residual(net.point(idx), net.point(a), net.point(b), net.point(ab)));
  }
  return worst;
}

}  // namespace dlame
