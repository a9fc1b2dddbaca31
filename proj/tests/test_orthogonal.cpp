#include "doctest.h"

#include <cmath>
#include <memory>

#include "dlame/analysis.hpp"
#include "dlame/orthogonal.hpp"
#include "support.hpp"

using namespace dlame;
using test::dist;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const DomainViolation& e) {
    return e.cause();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

template <int N>
PinElement<N> random_frame() {
  const auto Q = test::random_rotation<N>();
  std::vector<EVec<N>> dirs;
  for (int k = 0; k < N; ++k) dirs.push_back(Q.col(k));
  return frame_from_euclidean<N>(test::random_point<N>(), dirs);
}

double max_point_error(const LatticeField& x, const std::function<EVec<2>(int, int)>& F) {
  double e = 0.0;
  int idx[2];
  for (std::size_t lin = 0; lin < x.size(); ++lin) {
    x.grid().unravel(lin, idx);
    const auto p = x.at(lin);
    e = std::max(e, (EVec<2>(p[0], p[1]) - F(idx[0], idx[1])).norm());
  }
  return e;
}

}  // namespace

TEST_SUITE("orthogonal") {

TEST_CASE("frame point of reference frames") {
  CHECK(frame_to_point(PinElement<3>::identity()).norm() == 0.0);
  const EVec<3> t(0.4, -1.2, 2.0);
  CHECK((frame_to_point(translation_frame<3>(t)) - t).norm() <= 1e-14);
  CHECK(infinity_drift(translation_frame<3>(t)) <= 1e-14);
}

TEST_CASE_TEMPLATE("frame step laws", T, std::integral_constant<int, 2>, std::integral_constant<int, 3>) {
  constexpr int N = T::value;
  using MV = MinkowskiVector<N>;
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto psi = random_frame<N>();
    const int i = trial % N;
    const double eps = test::uniform(0.01, 0.5), h = test::uniform(0.2, 2.0);
    EVec<N> beta = EVec<N>::Zero();
    for (int k = 0; k < N; ++k)
      if (k != i) beta[k] = test::uniform(-1.5, 1.5);
    const auto sigma = sigma_vector<N>(i, eps, h, beta);
    const auto next = frame_step(psi, i, sigma);
    const auto v = edge_direction(psi, i, sigma);
    worst = std::max(worst, infinity_drift(next));
    // edge law: tau_i x - x = eps h v_i in the lift
    worst = std::max(worst, dist(adjoint(next, MV::e0()) - adjoint(psi, MV::e0()), (eps * h) * v));
    worst = std::max(worst, std::abs(lorentz_dot(v, v) - 1.0));
    worst = std::max(worst, std::abs(lorentz_dot(v, MV::einf())));
    // the image point is the Euclidean step
    const EVec<N> dx = frame_to_point(next) - frame_to_point(psi);
    worst = std::max(worst, std::abs(dx.norm() - eps * h));
  }
  CHECK(worst <= 1e-11);
}

TEST_CASE("normalizer takes the positive root and rejects the outside") {
  const EVec<3> beta(0.0, 3.0, 0.0);
  CHECK(frame_normalizer<3>(0, 0.1, beta) == doctest::Approx(std::sqrt(1.0 - 0.0025 * 9.0)));
  CHECK(frame_normalizer<3>(0, 0.1, beta) > 0.0);
  CHECK(kind_of([&] { frame_normalizer<3>(0, 1.0, beta); }) == ErrorKind::SqrtDomain);
}

TEST_CASE("read-off of a straight line") {
  const auto ro = read_off_curve<2>(line_curve<2>(), PinElement<2>::identity(), 0, 0.05, 41);
  REQUIRE(ro.h.size() == 41u);
  for (std::size_t n = 0; n < ro.h.size(); ++n) {
    CHECK(ro.h[n] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ro.beta[n].norm() <= 1e-15);
  }
}

TEST_CASE("read-off along the real axis of elliptic coordinates") {
  // X(t) = (cosh(t0 + t), 0): a straight line with speed sinh.
  const double t0 = 0.5;
  SmoothCurve<2> X;
  X.x = [t0](double t) { return EVec<2>(std::cosh(t0 + t), 0.0); };
  X.dx = [t0](double t) { return EVec<2>(std::sinh(t0 + t), 0.0); };
  X.ddx = [t0](double t) { return EVec<2>(std::cosh(t0 + t), 0.0); };
  const auto psi = frame_from_euclidean<2>(X.x(0.0), {EVec<2>::Unit(0), EVec<2>::Unit(1)});
  const double dt = 0.01;
  const auto ro = read_off_curve<2>(X, psi, 0, dt, 101);
  double eh = 0.0, eb = 0.0;
  for (std::size_t n = 0; n < ro.h.size(); ++n) {
    eh = std::max(eh, std::abs(ro.h[n] - std::sinh(t0 + n * dt)));
    eb = std::max(eb, ro.beta[n].norm());
  }
  CHECK(eh <= 1e-12);
  CHECK(eb <= 1e-12);
}

TEST_CASE("read-off of elliptic coordinate lines matches the closed forms") {
  auto F = std::make_shared<const EllipticOracle>();
  const auto psi = oracle_frame(*F);
  const double dt = 0.01;
  for (int label : {0, 1}) {
    const int other = 1 - label;
    const auto ro = read_off_curve<2>(oracle_axis_curve<2>(F, label), psi, label, dt, 101);
    double eh = 0.0, eb = 0.0;
    for (std::size_t n = 0; n < ro.h.size(); ++n) {
      const auto xi = oracle_coords(*F, {{label, n * dt}});
      eh = std::max(eh, std::abs(ro.h[n] - F->h(label, xi)));
      // beta_{other,label} = d_other h_label / h_other
      eb = std::max(eb, std::abs(ro.beta[n][other] - F->beta(other, label, xi)));
    }
    CHECK(eh <= 1e-12);
    CHECK(eb <= 1e-8);
    CHECK(ro.max_drift <= kFrameDriftTol);
  }
}

TEST_CASE("read-off of a circle has constant curvature") {
  for (double R : {0.5, 1.0, 3.0}) {
    const auto X = circle_curve(R);
    const auto psi = frame_from_euclidean<2>(X.x(0.0), {EVec<2>(0, 1), EVec<2>(-1, 0)});
    const auto ro = read_off_curve<2>(X, psi, 0, 0.01, 201);
    double eh = 0.0, eb = 0.0;
    for (std::size_t n = 0; n < ro.h.size(); ++n) {
      eh = std::max(eh, std::abs(ro.h[n] - 1.0));
      eb = std::max(eb, std::abs(std::abs(ro.beta[n][1]) - 1.0 / R));
    }
    CHECK(eh <= 1e-12);
    CHECK(eb <= 1e-8);
  }
}

TEST_CASE("read-off refuses a stalled curve") {
  SmoothCurve<2> X;
  X.x = [](double t) { return EVec<2>(t * t, 0.0); };
  X.dx = [](double t) { return EVec<2>(2.0 * t, 0.0); };
  X.ddx = [](double) { return EVec<2>(2.0, 0.0); };
  CHECK(kind_of([&] { read_off_curve<2>(X, PinElement<2>::identity(), 0, 0.01, 11); }) == ErrorKind::ImmersionFailure);
}

TEST_CASE("canonical discretization") {
  SUBCASE("straight line is reproduced exactly") {
    const auto c = canonical_discretization<2>(line_curve<2>(), PinElement<2>::identity(), 0, 0.1, 1.0);
    REQUIRE(c.points.size() == 11u);
    for (std::size_t k = 0; k < c.points.size(); ++k) CHECK((c.points[k] - EVec<2>(0.1 * k, 0.0)).norm() <= 1e-13);
  }
  SUBCASE("unit circle error is O(eps) or better") {
    const auto X = circle_curve(1.0);
    const auto psi = frame_from_euclidean<2>(X.x(0.0), {EVec<2>(0, 1), EVec<2>(-1, 0)});
    double prev = 1.0;
    for (double eps : {std::numbers::pi / 10, std::numbers::pi / 20, std::numbers::pi / 40}) {
      const auto c = canonical_discretization<2>(X, psi, 0, eps, 0.3 * std::numbers::pi);
      double e = 0.0;
      for (std::size_t k = 0; k < c.points.size(); ++k) e = std::max(e, (c.points[k] - X.x(k * eps)).norm());
      CHECK(e <= eps);
      CHECK(e < prev);
      prev = e;
      // every discrete point lies on the circle: the frame step turns by the exact chord angle
      for (const auto& p : c.points) CHECK(std::abs(p.norm() - 1.0) <= 0.5 * eps * eps);
    }
  }
}

TEST_CASE("flat Goursat data give the identity grid") {
  LameData2D<2> d;
  d.psi0 = PinElement<2>::identity();
  d.h_a = d.h_b = [](int) { return 1.0; };
  d.beta_a = d.beta_b = [](int) { return EVec<2>(EVec<2>::Zero()); };
  d.split = [](int, int) { return 0.0; };
  const double eps = 0.125;
  const auto net = csurface_solve<2>(d, eps, 1.0);
  CHECK(max_point_error(net.x, [eps](int i, int j) { return EVec<2>(eps * i, eps * j); }) <= 1e-14);
}

TEST_CASE("elliptic C-surface at pi/20") {
  auto F = std::make_shared<const EllipticOracle>();
  const double eps = std::numbers::pi / 20;
  const auto net = csurface_solve<2>(oracle_csurface_data<2>(F, eps, false), eps, 0.3 * std::numbers::pi);
  CHECK(net.mesh.steps == std::vector<int>{6, 6});
  const auto inv = lame_invariants(net);
  CHECK(inv.membership <= 1e-12);
  CHECK(inv.frame <= 1e-12);
  CHECK(inv.edge <= 1e-12);
  CHECK(inv.circle_law <= 1e-12);
  CHECK(inv.normalizer <= 1e-12);
  CHECK(inv.rotation <= 1e-12);
  CHECK(inv.circularity <= 1e-9);
  const auto err = oracle_error_field(*F, net.x);
  CHECK(cl_norm(err, 0) <= 2.0 * eps);
}

TEST_CASE("discrete orthogonality defect vanishes in the limit") {
  auto F = std::make_shared<const EllipticOracle>();
  std::vector<double> defect;
  for (double eps : {std::numbers::pi / 20, std::numbers::pi / 40, std::numbers::pi / 80}) {
    const auto net = csurface_solve<2>(oracle_csurface_data<2>(F, eps, false), eps, 0.3 * std::numbers::pi);
    double d = 0.0;
    for (int i = 0; i < net.mesh.steps[0]; ++i)
      for (int j = 0; j < net.mesh.steps[1]; ++j) {
        const auto r = net.rho(i, j);
        d = std::max(d, std::abs(r.rho_ab + r.rho_ba) / 2.0);
      }
    defect.push_back(d);
  }
  CHECK(defect[0] / defect[1] >= 1.7);
  CHECK(defect[1] / defect[2] >= 1.7);
}

TEST_CASE("three flat coordinate planes give the cubic grid") {
  auto F = std::make_shared<const FlatOracle<3>>();
  const auto sys = orthosys_assemble<3>(oracle_ortho_data<3>(F), 0.125, 0.5);
  double worst = 0.0;
  MultiIndex idx(3);
  for (std::size_t lin = 0; lin < sys.net.x.size(); ++lin) {
    sys.net.x.grid().unravel(lin, idx);
    const auto p = sys.net.x.at(lin);
    for (int d = 0; d < 3; ++d) worst = std::max(worst, std::abs(p[static_cast<std::size_t>(d)] - 0.125 * idx[static_cast<std::size_t>(d)]));
  }
  CHECK(worst <= 1e-14);
}

TEST_CASE("spherical coordinates: circular hexahedra with Miquel closure") {
  auto F = std::make_shared<const SphericalOracle>();
  const auto sys = orthosys_assemble<3>(oracle_ortho_data<3>(F), 0.1, 0.6);
  CHECK(net_circularity(sys.net) <= 1e-9);
  CHECK(net_miquel_residual(sys.net) <= 1e-9);
  CHECK(conjugate_residuals(sys.net).planarity <= 1e-9);
  const auto err = oracle_error_field(*F, sys.net.x);
  CHECK(cl_norm(err, 0) <= 0.01);
}

TEST_CASE("Ribaucour seed outside the domain gate") {
  RibaucourRawData<2> d;
  d.psi0 = PinElement<2>::identity();
  d.h_a = [](int) { return 1.0; };
  d.beta_a = [](int) { return EVec<2>(EVec<2>::Zero()); };
  d.alpha = [](int) { return 0.0; };
  d.h_b0 = 0.5;
  d.beta_b0 = EVec<2>(std::sqrt(4.5), 0.0);  // sum beta_k^2 = 4.5
  CHECK(kind_of([&] { ribaucour_solve_raw<2>(d, 0.1, 1.0); }) == ErrorKind::OutsideDomain);
  d.beta_b0 = EVec<2>(1.0, 0.0);
  CHECK_NOTHROW(ribaucour_solve_raw<2>(d, 0.1, 1.0));
}

TEST_CASE("Ribaucour transform of a line with A = 0 is a parallel line") {
  RibaucourData<2> d{line_curve<2>(), [](double) { return 0.0; }, EVec<2>(0.0, 0.7)};
  const auto p = ribaucour_solve<2>(d, 0.1, 1.0);
  double off = 0.0;
  for (std::size_t k = 0; k < p.x.size(); ++k) {
    off = std::max(off, std::abs(p.x_plus[k][1] - 0.7));
    off = std::max(off, std::abs(p.x_plus[k][0] - p.x[k][0]));
  }
  CHECK(off <= 1e-9);
  const auto res = ribaucour_residuals(p, d.A);
  CHECK(res.envelope <= 1e-9);
  CHECK(res.alpha <= 1e-9);
  CHECK(res.circularity <= 1e-9);
}

TEST_CASE("A of a parallel line is zero") {
  SmoothCurve<2> Xp = line_curve<2>();
  Xp.x = [](double t) { return EVec<2>(t, 1.0); };
  const auto A = alpha_from_transform<2>(line_curve<2>(), Xp);
  CHECK(A(0.3) == 0.0);
}

TEST_CASE("elliptic Ribaucour pair is circular") {
  const auto prob = elliptic_ribaucour_problem();
  const auto p = ribaucour_solve<2>(prob.data, std::numbers::pi / 20, 0.3 * std::numbers::pi);
  const auto res = ribaucour_residuals(p, prob.data.A);
  CHECK(res.circularity <= 1e-9);
  CHECK(lame_invariants(p.net).circularity <= 1e-9);
  CHECK(res.envelope <= 0.2);
}

TEST_CASE("Ribaucour family: permutability of two transforms") {
  const auto prob = spherical_ribaucour_family_problem(2);
  const auto fam = ribaucour_family<3>(prob.data, prob.transforms, prob.corners, 0.1, 0.4);
  CHECK(net_circularity(fam.net) <= 1e-9);
  CHECK(net_miquel_residual(fam.net) <= 1e-9);
  CHECK(transform_concircularity(fam.net, 3, 4) <= 1e-9);
  CHECK(jonas_permutability_check(fam.net, 3, 4) <= 1e-9);
  CHECK_THROWS_AS(transform_concircularity(fam.net, 0, 3), Error);
  CHECK_THROWS_AS(spherical_ribaucour_family_problem(4), Error);
}

}  // TEST_SUITE
