#pragma once

// Discrete conjugate nets: the first-order system for (x, w_i, c_ij), its
// implicit coefficient step, elementary hexahedra, Jonas layers.

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "dlame/lattice.hpp"

namespace dlame {

using Vec = Eigen::VectorXd;

// Per-corner state: point, M edge vectors and the rotation coefficients
// c(i, j), i != j (diagonal unused).
struct ConjugateState {
  Vec x;
  std::vector<Vec> w;
  Eigen::MatrixXd c;

  int M() const { return static_cast<int>(w.size()); }
  int N() const { return static_cast<int>(x.size()); }
};

// Component numbering of the conjugate-net hyperbolic system.
struct ConjugateLayout {
  int M;
  int x() const { return 0; }
  int w(int i) const { return 1 + i; }
  // c(i, j) for i != j, row-major skipping the diagonal.
  int c(int i, int j) const { return 1 + M + i * (M - 1) + (j < i ? j : j - 1); }
  int count() const { return 1 + M + M * (M - 1); }
};

inline constexpr double kBlockDetTol = 1e-12;
inline constexpr double kJonasTol = 1e-12;

// Solve the linearly implicit 6x6 block of one unordered triple {a, b, c}.
// Returns delta_p c_{rq} for the six permutations (p, q, r), in the order of
// `triple_permutations`.
std::array<std::array<int, 3>, 6> triple_permutations(int a, int b, int c);
std::array<double, 6> solve_triple_block(const Eigen::MatrixXd& c, std::span<const double> eps,
                                         const std::array<int, 3>& triple, int tail_begin);

// All shifted coefficients: result[i](k, j) = tau_i c_kj for i, j, k distinct.
// Directions >= tail_begin are Jonas directions with the admissibility check
// c_{t i} != -1.
std::vector<Eigen::MatrixXd> dcn_step_c(const Eigen::MatrixXd& c, std::span<const double> eps,
                                        int tail_begin = -1);

// tau_i of a whole corner state (x, w and c).
ConjugateState shift_state(const ConjugateState& s, int i, std::span<const double> eps, int tail_begin = -1);

// Eighth vertex tau_1 tau_2 tau_3 x through the coefficient step (M = 3).
Vec elementary_hexahedron(const ConjugateState& s, std::span<const double> eps);
// The same vertex as the intersection of the three planes through the seven
// known vertices (x0, xa, xb, xc, xab, xac, xbc).
Vec hexahedron_from_seven(const Vec& x0, const Vec& xa, const Vec& xb, const Vec& xc, const Vec& xab,
                          const Vec& xac, const Vec& xbc);
Vec elementary_hexahedron_geometric(const ConjugateState& s, std::span<const double> eps);

// Distance of p to the plane through q0, q1, q2.
double plane_residual(const Vec& p, const Vec& q0, const Vec& q1, const Vec& q2);

// (c_ij, c_ji) with delta_i delta_j x = c_ji delta_i x + c_ij delta_j x on the
// quad (x, tau_i x, tau_j x, tau_i tau_j x).
std::pair<double, double> extract_rotation_coeffs(const Vec& x, const Vec& xi, const Vec& xj, const Vec& xij,
                                                  double eps_i, double eps_j);

// Max pairwise distance between the four constructions of
// tau_1 tau_2 tau_3 tau_4 x (M = 4).
double check_4d_consistency(const ConjugateState& s, std::span<const double> eps);

// Smallest singular value of the three edge vectors of a quad over the
// largest edge length.
double planarity_residual(const Vec& x00, const Vec& x10, const Vec& x01, const Vec& x11);

HyperbolicSystem make_conjugate_system(int M, int N);

struct ConjugateNetData {
  Vec origin;
  // w_i at axis index k (k = 0 only for tail directions).
  std::function<Vec(int i, int k)> edge;
  // c_ij at a site of the plane P_ij.
  std::function<double(int i, int j, std::span<const int> site)> coeff;
};

struct ConjugateNet {
  MeshSpec mesh;
  int N = 0;
  LatticeField x;
  GoursatSolution raw;

  Vec point(std::span<const int> idx) const;
  Vec point(std::initializer_list<int> idx) const { return point(std::vector<int>(idx)); }
  double coeff(int i, int j, std::span<const int> idx) const;
};

using CurveFn = std::function<Vec(double)>;
using CoeffFn = std::function<double(int i, int j, std::span<const double> xi)>;

// Goursat data from curves X_i sampled exactly on the axes, transform points
// X^(t) for tail directions and coefficient functions on coordinate planes.
ConjugateNetData conjugate_data_from_curves(const Vec& origin, std::vector<CurveFn> axis_curves,
                                            std::vector<Vec> tail_points, CoeffFn coeff, const MeshSpec& mesh);

ConjugateNet solve_conjugate_net(const ConjugateNetData& data, const MeshSpec& mesh, int N);

struct NetResiduals {
  double planarity = 0.0;  // max planarity_residual over all elementary quads
  double dcn = 0.0;        // max relative residual of the second-difference law
};
NetResiduals conjugate_residuals(const ConjugateNet& net);

// Per continuous site, planarity of x, x^(1,0), x^(0,1), x^(1,1) for the tail
// directions (t1, t2). Returns the maximum.
double jonas_permutability_check(const ConjugateNet& net, int t1, int t2);

}  // namespace dlame
