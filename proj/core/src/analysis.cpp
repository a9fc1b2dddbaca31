#include "dlame/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dlame/geometry.hpp"

namespace dlame {

EllipticValues elliptic_oracle(double s, double t) {
  const double h2 = std::sinh(s) * std::sinh(s) + std::sin(t) * std::sin(t);
  if (!(h2 > 1e-24)) fail(ErrorKind::SingularPoint, "elliptic coordinates are singular at the foci");
  EllipticValues v;
  v.F = {std::cosh(s) * std::cos(t), std::sinh(s) * std::sin(t)};
  v.h = std::sqrt(h2);
  v.beta12 = std::sinh(2.0 * s) / (2.0 * h2);
  v.beta21 = std::sin(2.0 * t) / (2.0 * h2);
  v.gamma = (1.0 - std::cosh(2.0 * s) * std::cos(2.0 * t)) / (2.0 * h2 * h2);
  return v;
}

EVec<2> EllipticOracle::point(std::span<const double> xi) const { return elliptic_oracle(xi[0], xi[1]).F; }

EVec<2> EllipticOracle::partial(int i, std::span<const double> xi) const {
  const double s = xi[0], t = xi[1];
  if (i == 0) return {std::sinh(s) * std::cos(t), std::cosh(s) * std::sin(t)};
  return {-std::cosh(s) * std::sin(t), std::sinh(s) * std::cos(t)};
}

EVec<2> EllipticOracle::second_partial(int i, std::span<const double> xi) const {
  const EVec<2> F{std::cosh(xi[0]) * std::cos(xi[1]), std::sinh(xi[0]) * std::sin(xi[1])};
  return i == 0 ? F : EVec<2>(-F);
}

double EllipticOracle::h(int, std::span<const double> xi) const { return elliptic_oracle(xi[0], xi[1]).h; }

double EllipticOracle::beta(int i, int j, std::span<const double> xi) const {
  const auto v = elliptic_oracle(xi[0], xi[1]);
  if (i == 0 && j == 1) return v.beta12;
  if (i == 1 && j == 0) return v.beta21;
  return 0.0;
}

double EllipticOracle::gamma(int i, int j, std::span<const double> xi) const {
  const double g = elliptic_oracle(xi[0], xi[1]).gamma;
  return i < j ? g : -g;
}

EVec<3> SphericalOracle::point(std::span<const double> xi) const {
  const double r = xi[0], th = xi[1], ph = xi[2];
  return {r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph), r * std::cos(th)};
}

EVec<3> SphericalOracle::partial(int i, std::span<const double> xi) const {
  const double r = xi[0], th = xi[1], ph = xi[2];
  const double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
  switch (i) {
    case 0: return {st * cp, st * sp, ct};
    case 1: return {r * ct * cp, r * ct * sp, -r * st};
    default: return {-r * st * sp, r * st * cp, 0.0};
  }
}

EVec<3> SphericalOracle::second_partial(int i, std::span<const double> xi) const {
  const double r = xi[0], th = xi[1], ph = xi[2];
  const double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
  switch (i) {
    case 0: return EVec<3>::Zero();
    case 1: return {-r * st * cp, -r * st * sp, -r * ct};
    default: return {-r * st * cp, -r * st * sp, 0.0};
  }
}

double SphericalOracle::h(int i, std::span<const double> xi) const {
  switch (i) {
    case 0: return 1.0;
    case 1: return xi[0];
    default: return xi[0] * std::sin(xi[1]);
  }
}

double SphericalOracle::beta(int i, int j, std::span<const double> xi) const {
  if (i == 0 && j == 1) return 1.0;
  if (i == 0 && j == 2) return std::sin(xi[1]);
  if (i == 1 && j == 2) return std::cos(xi[1]);
  return 0.0;
}

double SphericalOracle::gamma(int i, int j, std::span<const double> xi) const {
  if ((i == 1 && j == 2) || (i == 2 && j == 1)) {
    const double g = -0.5 * std::sin(xi[1]);
    return i < j ? g : -g;
  }
  return 0.0;
}

SmoothCurve<2> circle_curve(double R) {
  if (!(R > 0.0)) fail(ErrorKind::InvalidArgument, "circle radius must be positive");
  SmoothCurve<2> c;
  c.x = [R](double t) { return EVec<2>(R * std::cos(t / R), R * std::sin(t / R)); };
  c.dx = [R](double t) { return EVec<2>(-std::sin(t / R), std::cos(t / R)); };
  c.ddx = [R](double t) { return EVec<2>(-std::cos(t / R) / R, -std::sin(t / R) / R); };
  return c;
}

RateFit rate_fit(std::span<const double> errors, std::span<const double> eps) {
  if (errors.size() != eps.size()) fail(ErrorKind::InvalidArgument, "errors and eps differ in length");
  if (errors.size() < 3) fail(ErrorKind::DegenerateFit, "rate fit needs at least three points");
  const std::size_t n = errors.size();
  std::vector<double> X(n), Y(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(errors[k] > 0.0) || !std::isfinite(errors[k]) || !(eps[k] > 0.0))
      fail(ErrorKind::DegenerateFit, "rate fit needs positive finite errors");
    X[k] = std::log(eps[k]);
    Y[k] = std::log(errors[k]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += X[k];
    my += Y[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (X[k] - mx) * (X[k] - mx);
    sxy += (X[k] - mx) * (Y[k] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorKind::DegenerateFit, "rate fit needs distinct mesh sizes");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = Y[k] - (f.intercept + f.slope * X[k]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / static_cast<double>(n));
  return f;
}

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::CSurface: return "csurface";
    case ProblemKind::Curve: return "curve";
    case ProblemKind::OrthoSystem: return "orthosys";
    case ProblemKind::Ribaucour: return "ribaucour";
  }
  return "?";
}

RibaucourProblem elliptic_ribaucour_problem() {
  RibaucourProblem p;
  auto F = std::make_shared<EllipticOracle>(0.6, 0.4);
  p.oracle = F;
  p.data.curve = oracle_axis_curve<2>(F, 0);
  p.data.A = [](double t) { return 0.4 + 0.3 * std::sin(2.0 * t); };
  const EVec<2> x0 = p.data.curve.x(0.0), t0 = p.data.curve.dx(0.0).normalized();
  const EVec<2> n0(-t0[1], t0[0]);
  p.data.x_plus0 = x0 + 0.25 * n0 + 0.05 * t0;
  return p;
}

RibaucourFamilyProblem spherical_ribaucour_family_problem(int mt) {
  if (mt < 1 || mt > 3) fail(ErrorKind::ConfigError, "transform count must be 1, 2 or 3");
  RibaucourFamilyProblem p;
  auto F = std::make_shared<SphericalOracle>();
  p.oracle = F;
  p.data = oracle_ortho_data<3>(std::shared_ptr<const OrthogonalOracle<3>>(F));
  const EVec<3> x0 = F->point(F->origin);
  const EVec<3> offsets[3] = {{0.2, 0.05, 0.1}, {-0.1, 0.2, 0.05}, {0.05, -0.1, 0.2}};
  for (int t = 0; t < mt; ++t) {
    TransformData<3> T;
    T.x_plus0 = x0 + offsets[t];
    const double c = 0.1 * (t + 1);
    T.A = {[c](double s) { return c + 0.1 * s; }, [c](double s) { return -c + 0.2 * std::sin(s); },
           [c](double) { return 0.5 * c; }};
    p.transforms.push_back(std::move(T));
  }
  for (int s = 0; s < mt; ++s)
    for (int t = s + 1; t < mt; ++t)
      p.corners.push_back(point_on_circle(Eigen::VectorXd(x0), Eigen::VectorXd(p.transforms[static_cast<std::size_t>(s)].x_plus0),
                                          Eigen::VectorXd(p.transforms[static_cast<std::size_t>(t)].x_plus0),
                                          2.0 + 0.3 * s + 0.1 * t));
  return p;
}

namespace {

template <int N>
void set_origin(OrthogonalOracle<N>& F, const std::vector<double>& offset) {
  if (offset.empty()) return;
  if (static_cast<int>(offset.size()) != F.m()) fail(ErrorKind::ConfigError, "offset has the wrong dimension");
  F.origin = offset;
}

double parse_radius(const std::string& oracle) {
  const auto colon = oracle.find(':');
  if (colon == std::string::npos) return 1.0;
  double R = 0.0;
  const char* b = oracle.data() + colon + 1;
  const char* e = oracle.data() + oracle.size();
  const auto res = std::from_chars(b, e, R);
  if (res.ec != std::errc() || res.ptr != e || !(R > 0.0))
    fail(ErrorKind::ConfigError, "bad circle radius in '" + oracle + "'");
  return R;
}

LatticeField curve_error_field(const SmoothCurve<2>& X, const PinElement<2>& Psi, double eps, double r, bool stagger) {
  const auto c = canonical_discretization<2>(X, Psi, 0, eps, r, stagger);
  LatticeField e(MeshSpec::uniform(1, eps, r), 2);
  for (std::size_t k = 0; k < c.points.size(); ++k) {
    const EVec<2> d = c.points[k] - X.x(static_cast<double>(k) * eps);
    e.at(k)[0] = d[0];
    e.at(k)[1] = d[1];
  }
  return e;
}

LatticeField solve_error_field(const SweepOptions& o, double eps) {
  switch (o.problem) {
    case ProblemKind::CSurface: {
      std::shared_ptr<OrthogonalOracle<2>> F;
      if (o.oracle == "elliptic") F = std::make_shared<EllipticOracle>();
      else if (o.oracle == "flat") F = std::make_shared<FlatOracle<2>>();
      else fail(ErrorKind::ConfigError, "csurface sweeps support the elliptic and flat oracles");
      set_origin(*F, o.offset);
      const auto net = csurface_solve<2>(oracle_csurface_data<2>(F, eps, o.stagger), eps, o.r);
      return oracle_error_field(*F, net.x);
    }
    case ProblemKind::Curve: {
      if (o.oracle == "line") {
        const auto X = line_curve<2>();
        return curve_error_field(X, PinElement<2>::identity(), eps, o.r, o.stagger);
      }
      if (o.oracle.rfind("circle", 0) != 0) fail(ErrorKind::ConfigError, "curve sweeps support circle:R and line");
      const double R = parse_radius(o.oracle);
      const auto X = circle_curve(R);
      const auto Psi = frame_from_euclidean<2>(X.x(0.0), {X.dx(0.0)});
      return curve_error_field(X, Psi, eps, o.r, o.stagger);
    }
    case ProblemKind::OrthoSystem: {
      std::shared_ptr<OrthogonalOracle<3>> F;
      if (o.oracle == "spherical") F = std::make_shared<SphericalOracle>();
      else if (o.oracle == "flat") F = std::make_shared<FlatOracle<3>>();
      else fail(ErrorKind::ConfigError, "orthosys sweeps support the spherical and flat oracles");
      set_origin(*F, o.offset);
      const auto sys = orthosys_assemble<3>(oracle_ortho_data<3>(F), eps, o.r, o.stagger);
      return oracle_error_field(*F, sys.net.x);
    }
    case ProblemKind::Ribaucour: {
      if (o.oracle != "elliptic") fail(ErrorKind::ConfigError, "ribaucour sweeps support the elliptic oracle");
      const auto P = elliptic_ribaucour_problem();
      const auto pair = ribaucour_solve<2>(P.data, eps, o.r, o.stagger);
      const std::size_t R = pair.x.size() - 1;
      LatticeField e(MeshSpec::uniform(1, eps, o.r), 1);
      for (std::size_t k = 0; k < R; ++k) {
        const EVec<2> d = (pair.x[k + 1] - pair.x[k]) / eps, dp = (pair.x_plus[k + 1] - pair.x_plus[k]) / eps;
        const EVec<2> chord = pair.x_plus[k] - pair.x[k];
        e.at(k)[0] = std::abs((dp.normalized() + d.normalized()).dot(chord)) / chord.norm();
      }
      e.at(R)[0] = R > 0 ? e.at(R - 1)[0] : 0.0;
      return e;
    }
  }
  fail(ErrorKind::ConfigError, "unknown problem");
}

std::string eps_tag(double eps) {
  std::ostringstream s;
  s.precision(17);
  s << "eps = " << eps << ": ";
  return s.str();
}

}  // namespace

LatticeField sweep_error_field(const SweepOptions& opts, double eps) {
  try {
    return solve_error_field(opts, eps);
  } catch (const DomainViolation& e) {
    throw DomainViolation(e.site(), e.component(), e.direction(), e.cause(), eps_tag(eps) + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    throw Error(e.kind(), eps_tag(eps) + e.what());
  }
}

SweepReport convergence_sweep(const SweepOptions& opts) {
  if (opts.eps.empty()) fail(ErrorKind::ConfigError, "empty eps list");
  for (std::size_t k = 1; k < opts.eps.size(); ++k)
    if (!(opts.eps[k] < opts.eps[k - 1])) fail(ErrorKind::ConfigError, "eps list must be strictly decreasing");
  if (opts.lmax < 0 || opts.lmax > 2) fail(ErrorKind::ConfigError, "lmax must be 0, 1 or 2");
  if (opts.problem == ProblemKind::Ribaucour && opts.lmax > 0)
    fail(ErrorKind::ConfigError, "ribaucour sweeps measure a residual; use lmax = 0");

  SweepReport rep;
  rep.options = opts;
  const auto L = static_cast<std::size_t>(opts.lmax + 1);
  rep.errors.assign(L, {});
  for (double eps : opts.eps) {
    const LatticeField f = sweep_error_field(opts, eps);
    rep.steps.push_back(f.mesh().steps[0]);
    for (std::size_t l = 0; l < L; ++l) rep.errors[l].push_back(cl_norm(f, static_cast<int>(l)));
  }
  constexpr double kExactTol = 1e-12;
  for (std::size_t l = 0; l < L; ++l) {
    const auto& e = rep.errors[l];
    const bool exact = *std::max_element(e.begin(), e.end()) <= kExactTol;
    rep.exact.push_back(exact);
    std::vector<double> ratios;
    for (std::size_t k = 0; k + 1 < e.size(); ++k) ratios.push_back(e[k + 1] > 0.0 ? e[k] / e[k + 1] : INFINITY);
    rep.ratios.push_back(std::move(ratios));
    if (exact || e.size() < 3) {
      RateFit f;
      f.slope = f.intercept = f.residual = std::numeric_limits<double>::quiet_NaN();
      rep.fits.push_back(f);
    } else {
      rep.fits.push_back(rate_fit(e, opts.eps));
    }
  }
  return rep;
}

}  // namespace dlame
