#include "dlame/orthogonal.hpp"

#include <algorithm>

namespace dlame {

template LameNet2D<2> solve_lame_2d<2>(const LameData2D<2>&, const MeshSpec&, const GoursatOptions&);
template LameNet2D<3> solve_lame_2d<3>(const LameData2D<3>&, const MeshSpec&, const GoursatOptions&);
template OrthoSystem<3> orthosys_assemble<3>(const OrthoSystemData<3>&, double, double, bool);
template LameInvariants lame_invariants<2>(const LameNet2D<2>&);
template LameInvariants lame_invariants<3>(const LameNet2D<3>&);

double net_circularity(const ConjugateNet& net) {
  const int M = net.mesh.dims();
  const Grid& grid = net.x.grid();
  MultiIndex idx(static_cast<std::size_t>(M));
  double worst = 0.0;
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
        worst = std::max(worst, circularity_residual(net.point(idx), net.point(a), net.point(b), net.point(ab)));
      }
  }
  return worst;
}

double net_miquel_residual(const ConjugateNet& net) {
  const int M = net.mesh.dims();
  const Grid& grid = net.x.grid();
  MultiIndex idx(static_cast<std::size_t>(M));
  double worst = 0.0;
  auto room = [&](int d) {
    return idx[static_cast<std::size_t>(d)] < net.mesh.steps[static_cast<std::size_t>(d)];
  };
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    grid.unravel(lin, idx);
    for (int i = 0; i < M; ++i)
      for (int j = i + 1; j < M; ++j)
        for (int k = j + 1; k < M; ++k) {
          if (!room(i) || !room(j) || !room(k)) continue;
          auto at = [&](int di, int dj, int dk) {
            MultiIndex s = idx;
            s[static_cast<std::size_t>(i)] += di;
            s[static_cast<std::size_t>(j)] += dj;
            s[static_cast<std::size_t>(k)] += dk;
            return net.point(s);
          };
          const Vec x0 = at(0, 0, 0), xa = at(1, 0, 0), xb = at(0, 1, 0), xc = at(0, 0, 1);
          const Vec xab = at(1, 1, 0), xac = at(1, 0, 1), xbc = at(0, 1, 1), xabc = at(1, 1, 1);
          const double scale = std::max({(xa - x0).norm(), (xb - x0).norm(), (xc - x0).norm()});
          const Vec mq = miquel_point(xa, xb, xab, xac, xbc);
          worst = std::max(worst, (mq - xabc).norm() / scale);
        }
  }
  return worst;
}

double transform_concircularity(const ConjugateNet& net, int t1, int t2) {
  const int M = net.mesh.dims();
  if (!net.mesh.is_tail(t1) || !net.mesh.is_tail(t2) || t1 == t2)
    fail(ErrorKind::InvalidArgument, "concircularity check needs two distinct transform directions");
  const Grid& grid = net.x.grid();
  MultiIndex idx(static_cast<std::size_t>(M));
  double worst = 0.0;
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    grid.unravel(lin, idx);
    if (std::any_of(idx.begin() + net.mesh.continuous(), idx.end(), [](int v) { return v != 0; })) continue;
    MultiIndex a = idx, b = idx, ab = idx;
    a[static_cast<std::size_t>(t1)] = 1;
    b[static_cast<std::size_t>(t2)] = 1;
    ab[static_cast<std::size_t>(t1)] = 1;
    ab[static_cast<std::size_t>(t2)] = 1;
    worst = std::max(worst, circularity_residual(net.point(idx), net.point(a), net.point(b), net.point(ab)));
  }
  return worst;
}

}  // namespace dlame
