#include "dlame/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dlame/error.hpp"

namespace dlame {

namespace {

constexpr double kCoincidentTol = 1e-12;

}  // namespace

double circularity_residual(const Eigen::VectorXd& p0, const Eigen::VectorXd& p1, const Eigen::VectorXd& p2,
                            const Eigen::VectorXd& p3) {
  const std::array<const Eigen::VectorXd*, 4> p{&p0, &p1, &p2, &p3};
  const Eigen::Index N = p0.size();
  if (N < 2) fail(ErrorKind::InvalidArgument, "circularity needs N >= 2");
  double scale = 0.0, closest = INFINITY;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      const double d = (*p[a] - *p[b]).norm();
      scale = std::max(scale, d);
      closest = std::min(closest, d);
    }
  if (!(closest > kCoincidentTol * scale) || scale == 0.0)
    fail(ErrorKind::CoincidentPoints, "circularity test on coincident points");

  Eigen::MatrixXd L(4, N + 2);
  for (int a = 0; a < 4; ++a) {
    const Eigen::VectorXd y = (*p[a] - p0) / scale;
    const double q = y.squaredNorm();
    L.row(a).head(N) = y.transpose();
    L(a, N) = 0.5 * (1.0 - q);
    L(a, N + 1) = 0.5 * (1.0 + q);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(L);
  return svd.singularValues()(3);
}

Circle circumcircle(const Eigen::VectorXd& p0, const Eigen::VectorXd& p1, const Eigen::VectorXd& p2) {
  const Eigen::VectorXd a = p1 - p0, b = p2 - p0;
  const double aa = a.squaredNorm(), bb = b.squaredNorm(), ab = a.dot(b);
  const double det = aa * bb - ab * ab;
  if (aa == 0.0 || bb == 0.0) fail(ErrorKind::CoincidentPoints, "circumcircle of coincident points");
  if (det <= 1e-24 * aa * bb) fail(ErrorKind::DegenerateEdges, "circumcircle of collinear points");
  const double s = 0.5 * bb * (aa - ab) / det;
  const double t = 0.5 * aa * (bb - ab) / det;
  Circle c;
  c.center = p0 + s * a + t * b;
  c.radius = (s * a + t * b).norm();
  return c;
}

Eigen::VectorXd point_on_circle(const Eigen::VectorXd& p0, const Eigen::VectorXd& p1, const Eigen::VectorXd& p2,
                                double angle) {
  const Circle c = circumcircle(p0, p1, p2);
  const Eigen::VectorXd u = (p0 - c.center) / c.radius;
  Eigen::VectorXd w = p1 - c.center;
  w -= w.dot(u) * u;
  w.normalize();
  return c.center + c.radius * (std::cos(angle) * u + std::sin(angle) * w);
}

Eigen::VectorXd invert_point(const Eigen::VectorXd& x, const Eigen::VectorXd& c) {
  const Eigen::VectorXd d = x - c;
  const double q = d.squaredNorm();
  if (q == 0.0) fail(ErrorKind::AtInfinity, "inversion centre maps to infinity");
  return c + d / q;
}

Eigen::VectorXd miquel_point(const Eigen::VectorXd& xa, const Eigen::VectorXd& xb, const Eigen::VectorXd& xab,
                             const Eigen::VectorXd& xac, const Eigen::VectorXd& xbc) {
  const Eigen::VectorXd p = invert_point(xa, xab), u = invert_point(xac, xab) - p;
  const Eigen::VectorXd q = invert_point(xb, xab), v = invert_point(xbc, xab) - q;
  // p + s u = q + t v in the least-squares sense.
  Eigen::MatrixXd A(p.size(), 2);
  A.col(0) = u;
  A.col(1) = -v;
  const Eigen::Vector2d st = A.colPivHouseholderQr().solve(q - p);
  const Eigen::VectorXd meet = 0.5 * (p + st(0) * u + q + st(1) * v);
  return invert_point(meet, xab);
}

}  // namespace dlame
