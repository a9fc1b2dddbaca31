#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>

#include "dlame/analysis.hpp"
#include "dlame/conjugate.hpp"
#include "dlame/lattice.hpp"
#include "dlame/orthogonal.hpp"
#include "support.hpp"

using namespace dlame;

namespace {

// f(idx) from a callback, scalar field.
template <typename F>
LatticeField make_field(const MeshSpec& mesh, F&& f) {
  LatticeField x(mesh, 1);
  MultiIndex idx(static_cast<std::size_t>(mesh.dims()));
  for (std::size_t lin = 0; lin < x.size(); ++lin) {
    x.grid().unravel(lin, idx);
    x.at(lin)[0] = f(idx);
  }
  return x;
}

double max_abs(const LatticeField& f) {
  double m = 0.0;
  for (double v : f.data()) m = std::max(m, std::abs(v));
  return m;
}

// u in R^2, tau_i u = (I + eps_i A_i) u with commuting A_i.
HyperbolicSystem linear_system(const std::vector<Eigen::Matrix2d>& A) {
  const int M = static_cast<int>(A.size());
  std::vector<int> all;
  for (int i = 0; i < M; ++i) all.push_back(i);
  HyperbolicSystem sys(M);
  sys.add_component("u", 2, all);
  for (int i = 0; i < M; ++i)
    sys.add_rule(i, {0}, {0}, [Ai = A[static_cast<std::size_t>(i)], i](const CornerView& u, const CornerOutput& out,
                                                                       const MeshSpec& mesh) {
      const double e = mesh.eps[static_cast<std::size_t>(i)];
      const Eigen::Vector2d v(u[0][0], u[0][1]);
      const Eigen::Vector2d w = v + e * (Ai * v);
      out[0][0] = w[0];
      out[0][1] = w[1];
    });
  return sys;
}

// Conjugate-net system with an explicit coefficient step that drops the
// last term of the quadrilateral law: delta_a c_cb = c_ac c_cb + c_ca c_ab.
HyperbolicSystem broken_conjugate_system(int N) {
  constexpr int M = 3;
  const ConjugateLayout L{M};
  HyperbolicSystem sys(M);
  auto without = [](std::initializer_list<int> drop) {
    std::vector<int> v;
    for (int i = 0; i < M; ++i)
      if (std::find(drop.begin(), drop.end(), i) == drop.end()) v.push_back(i);
    return v;
  };
  sys.add_component("x", N, {0, 1, 2});
  for (int i = 0; i < M; ++i) sys.add_component("w", N, without({i}));
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (i != j) sys.add_component("c", 1, without({i, j}));
  std::vector<int> cs;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (i != j) cs.push_back(L.c(i, j));
  for (int i = 0; i < M; ++i) {
    sys.add_rule(i, {L.x()}, {L.x(), L.w(i)}, [L, i, N](const CornerView& u, const CornerOutput& out, const MeshSpec& m) {
      for (int d = 0; d < N; ++d)
        out[L.x()][static_cast<std::size_t>(d)] =
            u[L.x()][static_cast<std::size_t>(d)] + m.eps[static_cast<std::size_t>(i)] * u[L.w(i)][static_cast<std::size_t>(d)];
    });
    for (int j = 0; j < M; ++j) {
      if (j == i) continue;
      sys.add_rule(i, {L.w(j)}, {L.w(i), L.w(j), L.c(i, j), L.c(j, i)},
                   [L, i, j, N](const CornerView& u, const CornerOutput& out, const MeshSpec& m) {
                     const double e = m.eps[static_cast<std::size_t>(i)];
                     for (int d = 0; d < N; ++d) {
                       const auto k = static_cast<std::size_t>(d);
                       out[L.w(j)][k] = u[L.w(j)][k] + e * (u[L.c(j, i)][0] * u[L.w(i)][k] + u[L.c(i, j)][0] * u[L.w(j)][k]);
                     }
                   });
    }
    const int j = (i + 1) % M, k = (i + 2) % M;
    sys.add_rule(i, {L.c(k, j), L.c(j, k)}, cs, [L, i, j, k](const CornerView& u, const CornerOutput& out, const MeshSpec& m) {
      const double e = m.eps[static_cast<std::size_t>(i)];
      auto c = [&](int p, int q) { return u[L.c(p, q)][0]; };
      out[L.c(k, j)][0] = c(k, j) + e * (c(i, k) * c(k, j) + c(k, i) * c(i, j));
      out[L.c(j, k)][0] = c(j, k) + e * (c(i, j) * c(j, k) + c(j, i) * c(i, k));
    });
  }
  return sys;
}

CornerState random_conjugate_corner(int M, int N) {
  const ConjugateLayout L{M};
  CornerState u(static_cast<std::size_t>(L.count()));
  auto rnd = [](int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = test::uniform(-1.0, 1.0);
    return v;
  };
  u[static_cast<std::size_t>(L.x())] = rnd(N);
  for (int i = 0; i < M; ++i) u[static_cast<std::size_t>(L.w(i))] = rnd(N);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (i != j) u[static_cast<std::size_t>(L.c(i, j))] = {test::uniform(-0.2, 0.2)};
  return u;
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("mesh shapes") {
  const auto m = MeshSpec::uniform(2, 0.1, 1.0);
  CHECK(m.steps == std::vector<int>{10, 10});
  CHECK(steps_for(std::numbers::pi / 20, 0.3 * std::numbers::pi) == 6);
  CHECK(steps_for(std::numbers::pi / 80, 0.3 * std::numbers::pi) == 24);
  const auto t = MeshSpec::uniform(2, 0.1, 0.5, 2);
  CHECK(t.dims() == 4);
  CHECK(t.continuous() == 2);
  CHECK(t.is_tail(3));
  CHECK(t.steps[3] == 1);
  CHECK(t.site_count() == 6u * 6u * 2u * 2u);
  CHECK_THROWS_AS(MeshSpec::explicit_steps({0.1, 0.1}, {3, 3}, 1).validate(), Error);
}

TEST_CASE("grid indexing round trip") {
  const Grid g({3, 0, 4});
  CHECK(g.size() == 4u * 1u * 5u);
  int idx[3];
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    g.unravel(lin, idx);
    CHECK(g.linear(idx) == lin);
    CHECK(g.contains(idx));
  }
  const int out[3] = {4, 0, 0};
  CHECK_FALSE(g.contains(out));
}

TEST_CASE("difference operators") {
  const auto mesh = MeshSpec::uniform(2, 0.125, 1.0);
  const auto c = make_field(mesh, [](const MultiIndex&) { return 3.5; });
  CHECK(max_abs(diff(c, 0)) == 0.0);
  CHECK(max_abs(diff(c, 1)) == 0.0);

  const auto lin = make_field(mesh, [](const MultiIndex& i) { return 0.125 * i[0]; });
  const auto d = diff(lin, 0);
  CHECK(d.grid().steps() == std::vector<int>{7, 8});
  for (double v : d.data()) CHECK(v == 1.0);
  CHECK(max_abs(diff(lin, 1)) == 0.0);

  const auto tau = shift(lin, 0);
  const int i0[2] = {0, 3};
  CHECK(tau.at(i0)[0] == 0.125);
}

TEST_CASE("mixed differences commute on stored data") {
  const MeshSpec mesh = MeshSpec::explicit_steps({0.5, 0.25}, {6, 5});
  const auto f = make_field(mesh, [](const MultiIndex&) { return std::round(test::uniform(-100.0, 100.0)); });
  const auto a = diff(diff(f, 0), 1), b = diff(diff(f, 1), 0);
  CHECK(a.data() == b.data());
}

TEST_CASE("C^l norms") {
  const auto mesh = MeshSpec::uniform(1, 0.1, 1.0);
  const auto c = make_field(mesh, [](const MultiIndex&) { return -2.0; });
  CHECK(cl_norm(c, 1) == 2.0);
  CHECK(cl_norm(c, 0) == 2.0);

  const auto lin = make_field(mesh, [](const MultiIndex& i) { return 0.1 * i[0]; });
  CHECK(cl_norm(lin, 1) == doctest::Approx(1.0).epsilon(1e-12));

  // sup over [0, 1] of |sin|, |cos|, |sin| is 1 (cos at 0), approached at O(eps).
  for (double eps : {0.1, 0.05, 0.025}) {
    const auto m = MeshSpec::uniform(1, eps, 1.0);
    const auto s = make_field(m, [eps](const MultiIndex& i) { return std::sin(eps * i[0]); });
    CHECK(std::abs(cl_norm(s, 2) - 1.0) <= eps);
    CHECK(cl_norm(s, 0) == doctest::Approx(std::sin(eps * m.steps[0])));
  }
}

TEST_CASE("tail directions are excluded from the norm") {
  const auto mesh = MeshSpec::uniform(1, 0.25, 1.0, 1);
  const auto f = make_field(mesh, [](const MultiIndex& i) { return 100.0 * i[1]; });
  CHECK(cl_norm(f, 1) == 100.0);  // the value itself, no tail quotient
}

TEST_CASE("constant rule gives a constant field") {
  HyperbolicSystem sys(1);
  sys.add_component("u", 1, {0});
  sys.add_rule(0, {0}, {0}, [](const CornerView& u, const CornerOutput& out, const MeshSpec&) { out[0][0] = u[0][0]; });
  const auto sol = goursat_solve(sys, [](int, std::span<const int>, std::span<double> o) { o[0] = 4.25; },
                                 MeshSpec::uniform(1, 0.1, 1.0));
  for (double v : sol.fields[0].data()) CHECK(v == 4.25);
}

TEST_CASE("linear system matches the product formula") {
  Eigen::Matrix2d A1, A2;
  A1 << 0.3, 0.7, 0.0, 0.3;
  A2 << -0.4, 1.1, 0.0, -0.4;
  REQUIRE((A1 * A2 - A2 * A1).norm() == 0.0);
  const auto sys = linear_system({A1, A2});
  const Eigen::Vector2d u0(1.0, -2.0);
  const GoursatData data = [&](int, std::span<const int>, std::span<double> o) {
    o[0] = u0[0];
    o[1] = u0[1];
  };
  const auto mesh = MeshSpec::explicit_steps({0.1, 0.05}, {8, 12});
  const auto sol = goursat_solve(sys, data, mesh);
  const Eigen::Matrix2d P1 = Eigen::Matrix2d::Identity() + 0.1 * A1, P2 = Eigen::Matrix2d::Identity() + 0.05 * A2;
  double worst = 0.0;
  int idx[2];
  for (std::size_t lin = 0; lin < sol.fields[0].size(); ++lin) {
    sol.fields[0].grid().unravel(lin, idx);
    Eigen::Vector2d expect = u0;
    for (int k = 0; k < idx[0]; ++k) expect = P1 * expect;
    for (int k = 0; k < idx[1]; ++k) expect = P2 * expect;
    const auto got = sol.fields[0].at(lin);
    worst = std::max(worst, std::hypot(got[0] - expect[0], got[1] - expect[1]));
  }
  CHECK(worst <= 1e-13);

  SUBCASE("reversed fill order is bitwise identical") {
    const auto rev = goursat_solve(sys, data, mesh, {.reverse_within_level = true});
    CHECK(rev.fields[0].data() == sol.fields[0].data());
  }
}

TEST_CASE("fill order on a nonlinear system moves only rounding") {
  auto F = std::make_shared<const EllipticOracle>();
  const double eps = std::numbers::pi / 20;
  const auto d = oracle_csurface_data<2>(F, eps, false);
  const auto a = csurface_solve<2>(d, eps, 0.3 * std::numbers::pi);
  const auto b = csurface_solve<2>(d, eps, 0.3 * std::numbers::pi, {.prefer_highest_direction = true});
  const auto c = csurface_solve<2>(d, eps, 0.3 * std::numbers::pi, {.reverse_within_level = true});
  CHECK(max_abs(subtract(a.x, b.x)) <= 1e-12);
  CHECK(a.x.data() == c.x.data());
}

TEST_CASE("rule registration is checked") {
  HyperbolicSystem sys(2);
  const int u = sys.add_component("u", 1, {0});
  const int v = sys.add_component("v", 1, {0, 1});
  // u does not evolve in direction 1
  CHECK_THROWS_AS(sys.add_rule(1, {u}, {u}, [](const CornerView&, const CornerOutput&, const MeshSpec&) {}), Error);
  // input u is not known on the whole line {1} spanned by E(v) without 0
  CHECK_THROWS_AS(sys.add_rule(0, {v}, {u, v}, [](const CornerView&, const CornerOutput&, const MeshSpec&) {}), Error);
  sys.add_rule(0, {u}, {u}, [](const CornerView&, const CornerOutput&, const MeshSpec&) {});
  CHECK_THROWS_AS(sys.check_complete(), Error);
}

TEST_CASE("a rule leaving its domain reports the site") {
  HyperbolicSystem sys(1);
  sys.add_component("u", 1, {0});
  sys.add_rule(0, {0}, {0}, [](const CornerView& u, const CornerOutput& out, const MeshSpec& m) {
    if (u[0][0] >= 1.0) fail(ErrorKind::SqrtDomain, "too large");
    out[0][0] = u[0][0] + m.eps[0];
  });
  try {
    goursat_solve(sys, [](int, std::span<const int>, std::span<double> o) { o[0] = 0.0; }, MeshSpec::uniform(1, 0.25, 2.0));
    FAIL("expected a domain violation");
  } catch (const DomainViolation& e) {
    CHECK(e.site() == MultiIndex{4});
    CHECK(e.direction() == 0);
    CHECK(e.cause() == ErrorKind::SqrtDomain);
    CHECK(e.kind() == ErrorKind::DomainViolation);
  }
}

TEST_CASE("conjugate system is consistent on random cubes") {
  for (int N : {3, 4}) {
    const auto sys = make_conjugate_system(3, N);
    double worst = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
      const auto mesh = MeshSpec::explicit_steps({test::uniform(0.2, 1.0), test::uniform(0.2, 1.0), test::uniform(0.2, 1.0)},
                                                 {1, 1, 1});
      worst = std::max(worst, consistency_residual(sys, random_conjugate_corner(3, N), mesh));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("negative control: a dropped term breaks consistency") {
  const auto sys = broken_conjugate_system(3);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto u = random_conjugate_corner(3, 3);
    for (std::size_t k = 4; k < u.size(); ++k) u[k][0] = test::uniform(0.3, 0.6);
    worst = std::max(worst, consistency_residual(sys, u, MeshSpec::explicit_steps({1.0, 1.0, 1.0}, {1, 1, 1})));
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("C-surface system is consistent on random cubes") {
  for (auto kind : {Splitting::Gamma, Splitting::Alpha}) {
    const auto sys2 = make_lame_system<2>(0, 1, kind);
    const auto sys3 = make_lame_system<3>(0, 2, kind);
    double worst = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
      const auto mesh = MeshSpec::explicit_steps({test::uniform(0.05, 0.3), test::uniform(0.05, 0.3)}, {1, 1});
      {
        const auto Q = test::random_rotation<2>();
        const auto psi = frame_from_euclidean<2>(test::random_point<2>(), {Q.col(0), Q.col(1)});
        const EVec<2> ba(0.0, test::uniform(-0.8, 0.8)), bb(test::uniform(-0.8, 0.8), 0.0);
        const auto u = lame_corner<2>(psi, test::uniform(0.5, 1.5), ba, test::uniform(0.5, 1.5), bb, test::uniform(-0.5, 0.5));
        worst = std::max(worst, consistency_residual(sys2, u, mesh));
      }
      {
        const auto Q = test::random_rotation<3>();
        const auto psi = frame_from_euclidean<3>(test::random_point<3>(), {Q.col(0), Q.col(1), Q.col(2)});
        const EVec<3> ba(0.0, test::uniform(-0.8, 0.8), test::uniform(-0.8, 0.8));
        const EVec<3> bb(test::uniform(-0.8, 0.8), test::uniform(-0.8, 0.8), 0.0);
        const auto u = lame_corner<3>(psi, test::uniform(0.5, 1.5), ba, test::uniform(0.5, 1.5), bb, test::uniform(-0.5, 0.5));
        worst = std::max(worst, consistency_residual(sys3, u, mesh));
      }
    }
    CHECK(worst <= 1e-10);
  }
}

}  // TEST_SUITE
