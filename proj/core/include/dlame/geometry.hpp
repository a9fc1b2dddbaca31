#pragma once

// Circles and spheres in R^N: concircularity test through the light-cone
// lift, circumcircles and the Miquel point of a circular hexahedron.

#include <Eigen/Dense>

#include <span>

namespace dlame {

// Smallest singular value of the 4 x (N+2) matrix of lifted points after
// translating to the first point and scaling by the largest pairwise
// distance. Zero exactly when the points are concircular (or collinear).
double circularity_residual(const Eigen::VectorXd& p0, const Eigen::VectorXd& p1, const Eigen::VectorXd& p2,
                            const Eigen::VectorXd& p3);

struct Circle {
  Eigen::VectorXd center;
  double radius = 0.0;
};

// Circle through three points (in their plane).
Circle circumcircle(const Eigen::VectorXd& p0, const Eigen::VectorXd& p1, const Eigen::VectorXd& p2);

// Point at angle `angle` (from p0, toward p1's side) on the circle through
// p0, p1, p2.
Eigen::VectorXd point_on_circle(const Eigen::VectorXd& p0, const Eigen::VectorXd& p1, const Eigen::VectorXd& p2,
                                double angle);

// Inversion in the unit sphere about c.
Eigen::VectorXd invert_point(const Eigen::VectorXd& x, const Eigen::VectorXd& c);

// Second intersection of the circles (xa, xab, xac) and (xb, xab, xbc),
// computed by inverting about xab so both circles become lines.
Eigen::VectorXd miquel_point(const Eigen::VectorXd& xa, const Eigen::VectorXd& xb, const Eigen::VectorXd& xab,
                             const Eigen::VectorXd& xac, const Eigen::VectorXd& xbc);

}  // namespace dlame
