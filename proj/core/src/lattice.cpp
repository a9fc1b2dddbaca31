#include "dlame/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dlame {

int steps_for(double eps, double r) {
  if (!(eps > 0.0) || r < 0.0) fail(ErrorKind::InvalidArgument, "mesh size must be positive");
  return static_cast<int>(std::floor(r / eps + 1e-9));
}

MeshSpec MeshSpec::uniform(int m, double eps, double r, int tail) {
  MeshSpec s;
  const int R = steps_for(eps, r);
  s.eps.assign(static_cast<std::size_t>(m), eps);
  s.steps.assign(static_cast<std::size_t>(m), R);
  for (int t = 0; t < tail; ++t) {
    s.eps.push_back(1.0);
    s.steps.push_back(1);
  }
  s.tail = tail;
  s.r = r;
  return s;
}

MeshSpec MeshSpec::explicit_steps(std::vector<double> eps, std::vector<int> steps, int tail) {
  if (eps.size() != steps.size()) fail(ErrorKind::InvalidArgument, "eps/steps size mismatch");
  MeshSpec s;
  s.eps = std::move(eps);
  s.steps = std::move(steps);
  s.tail = tail;
  for (int i = 0; i < s.continuous(); ++i)
    s.r = std::max(s.r, s.eps[static_cast<std::size_t>(i)] * s.steps[static_cast<std::size_t>(i)]);
  return s;
}

std::size_t MeshSpec::site_count() const {
  std::size_t n = 1;
  for (int s : steps) n *= static_cast<std::size_t>(s + 1);
  return n;
}

void MeshSpec::validate() const {
  if (eps.empty()) fail(ErrorKind::InvalidArgument, "mesh has no directions");
  if (tail < 0 || tail > dims()) fail(ErrorKind::InvalidArgument, "bad tail count");
  for (double e : eps)
    if (!(e > 0.0)) fail(ErrorKind::InvalidArgument, "mesh sizes must be positive at solve time");
  for (int s : steps)
    if (s < 0) fail(ErrorKind::InvalidArgument, "negative extent");
  const double e0 = eps[0];
  for (int i = 0; i < continuous(); ++i)
    if (eps[static_cast<std::size_t>(i)] != e0)
      fail(ErrorKind::InvalidArgument, "continuous directions must share one mesh size");
  for (int i = continuous(); i < dims(); ++i)
    if (eps[static_cast<std::size_t>(i)] != 1.0 || steps[static_cast<std::size_t>(i)] != 1)
      fail(ErrorKind::InvalidArgument, "tail directions need eps = 1 and extent {0,1}");
}

Grid::Grid(std::vector<int> steps) : steps_(std::move(steps)), strides_(steps_.size()) {
  size_ = 1;
  for (std::size_t i = steps_.size(); i-- > 0;) {
    strides_[i] = size_;
    size_ *= static_cast<std::size_t>(steps_[i] + 1);
  }
}

bool Grid::contains(std::span<const int> idx) const {
  if (idx.size() != steps_.size()) return false;
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (idx[i] < 0 || idx[i] > steps_[i]) return false;
  return true;
}

std::size_t Grid::linear(std::span<const int> idx) const {
  std::size_t lin = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) lin += static_cast<std::size_t>(idx[i]) * strides_[i];
  return lin;
}

void Grid::unravel(std::size_t lin, std::span<int> idx) const {
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    idx[i] = static_cast<int>(lin / strides_[i]);
    lin %= strides_[i];
  }
}

LatticeField::LatticeField(MeshSpec mesh, int dim, int component)
    : mesh_(std::move(mesh)), grid_(mesh_.steps), dim_(dim), component_(component),
      data_(grid_.size() * static_cast<std::size_t>(dim), 0.0) {}

std::span<double> LatticeField::at(std::span<const int> idx) {
  if (!grid_.contains(idx)) fail(ErrorKind::OutOfBounds, "lattice index outside the box");
  return at(grid_.linear(idx));
}

std::span<const double> LatticeField::at(std::span<const int> idx) const {
  if (!grid_.contains(idx)) fail(ErrorKind::OutOfBounds, "lattice index outside the box");
  return at(grid_.linear(idx));
}

namespace {

MeshSpec shrink(const MeshSpec& m, int i) {
  MeshSpec s = m;
  s.steps[static_cast<std::size_t>(i)] -= 1;
  return s;
}

// out(xi) = a * f(xi + e_i) + b * f(xi) on the box shortened in i.
LatticeField combine_shifted(const LatticeField& f, int i, double a, double b) {
  if (i < 0 || i >= f.mesh().dims()) fail(ErrorKind::OutOfBounds, "direction out of range");
  if (f.mesh().steps[static_cast<std::size_t>(i)] < 1)
    fail(ErrorKind::OutOfBounds, "no room to shift in this direction");
  LatticeField out(shrink(f.mesh(), i), f.dim(), f.component());
  MultiIndex idx(static_cast<std::size_t>(f.mesh().dims()));
  const std::size_t step = f.grid().stride(i);
  for (std::size_t lin = 0; lin < out.size(); ++lin) {
    out.grid().unravel(lin, idx);
    const std::size_t src = f.grid().linear(idx);
    auto o = out.at(lin);
    auto x0 = f.at(src);
    auto x1 = f.at(src + step);
    for (int d = 0; d < f.dim(); ++d) o[static_cast<std::size_t>(d)] = a * x1[static_cast<std::size_t>(d)] + b * x0[static_cast<std::size_t>(d)];
  }
  return out;
}

double sup_norm(const LatticeField& f) {
  double best = 0.0;
  for (std::size_t lin = 0; lin < f.size(); ++lin) {
    double s = 0.0;
    for (double v : f.at(lin)) s += v * v;
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

void sup_over_derivatives(const LatticeField& f, int first_dir, int remaining, double& best) {
  best = std::max(best, sup_norm(f));
  if (remaining == 0) return;
  for (int i = first_dir; i < f.mesh().continuous(); ++i) {
    if (f.mesh().steps[static_cast<std::size_t>(i)] < 1) continue;
    sup_over_derivatives(diff(f, i), i, remaining - 1, best);
  }
}

}  // namespace

LatticeField shift(const LatticeField& f, int i) { return combine_shifted(f, i, 1.0, 0.0); }

LatticeField diff(const LatticeField& f, int i) {
  if (i < 0 || i >= f.mesh().dims()) fail(ErrorKind::OutOfBounds, "direction out of range");
  const double e = f.mesh().eps[static_cast<std::size_t>(i)];
  return combine_shifted(f, i, 1.0 / e, -1.0 / e);
}

double cl_norm(const LatticeField& f, int order) {
  if (order < 0) fail(ErrorKind::InvalidArgument, "negative order");
  for (int i = 0; i < f.mesh().continuous(); ++i)
    if (f.mesh().steps[static_cast<std::size_t>(i)] < order)
      fail(ErrorKind::OrderTooLarge, "difference order exceeds the grid extent");
  double best = 0.0;
  sup_over_derivatives(f, 0, order, best);
  return best;
}

LatticeField subtract(const LatticeField& a, const LatticeField& b) {
  if (a.mesh().steps != b.mesh().steps || a.dim() != b.dim())
    fail(ErrorKind::InvalidArgument, "fields live on different grids");
  LatticeField out(a.mesh(), a.dim(), a.component());
  for (std::size_t k = 0; k < a.data().size(); ++k) out.data()[k] = a.data()[k] - b.data()[k];
  return out;
}

// ---------------------------------------------------------------------------

CornerView::CornerView(std::span<const double* const> values, std::span<const int> dims,
                       const std::vector<char>* allowed)
    : values_(values), dims_(dims), allowed_(allowed) {}

std::span<const double> CornerView::operator[](int k) const {
  if (allowed_ && !(*allowed_)[static_cast<std::size_t>(k)])
    fail(ErrorKind::InvalidArgument, "step rule read an undeclared component");
  return {values_[static_cast<std::size_t>(k)], static_cast<std::size_t>(dims_[static_cast<std::size_t>(k)])};
}

CornerOutput::CornerOutput(std::span<double* const> values, std::span<const int> dims,
                           const std::vector<char>* allowed)
    : values_(values), dims_(dims), allowed_(allowed) {}

std::span<double> CornerOutput::operator[](int k) const {
  if (allowed_ && !(*allowed_)[static_cast<std::size_t>(k)])
    fail(ErrorKind::InvalidArgument, "step rule wrote an undeclared component");
  return {values_[static_cast<std::size_t>(k)], static_cast<std::size_t>(dims_[static_cast<std::size_t>(k)])};
}

HyperbolicSystem::HyperbolicSystem(int directions) : directions_(directions) {
  if (directions < 1 || directions > 31) fail(ErrorKind::InvalidArgument, "bad direction count");
}

int HyperbolicSystem::add_component(std::string name, int dim, const std::vector<int>& evolution) {
  if (dim < 1) fail(ErrorKind::InvalidArgument, "component dimension must be positive");
  std::uint32_t mask = 0;
  for (int j : evolution) {
    if (j < 0 || j >= directions_) fail(ErrorKind::InvalidArgument, "evolution direction out of range");
    mask |= 1u << j;
  }
  components_.push_back({std::move(name), dim, mask});
  dims_.push_back(dim);
  rule_for_.resize(components_.size() * static_cast<std::size_t>(directions_), -1);
  return component_count() - 1;
}

int HyperbolicSystem::add_rule(int direction, std::vector<int> outputs, std::vector<int> inputs, StepFn fn) {
  const int K = component_count();
  if (direction < 0 || direction >= directions_) fail(ErrorKind::InvalidArgument, "rule direction out of range");
  Rule rule{direction, std::move(outputs), std::move(inputs), std::vector<char>(static_cast<std::size_t>(K), 0),
            std::vector<char>(static_cast<std::size_t>(K), 0), std::move(fn)};
  for (int l : rule.inputs) {
    if (l < 0 || l >= K) fail(ErrorKind::InvalidArgument, "rule input out of range");
    rule.input_mask[static_cast<std::size_t>(l)] = 1;
  }
  const std::uint32_t dbit = 1u << direction;
  for (int k : rule.outputs) {
    if (k < 0 || k >= K) fail(ErrorKind::InvalidArgument, "rule output out of range");
    if (!evolves(k, direction))
      fail(ErrorKind::InvalidArgument, "component " + name(k) + " does not evolve in the rule direction");
    if (rule_for(k, direction) >= 0)
      fail(ErrorKind::InvalidArgument, "component " + name(k) + " already has a rule in this direction");
    const std::uint32_t need = evolution_mask(k) & ~dbit;
    for (int l : rule.inputs)
      if ((need & ~evolution_mask(l)) != 0)
        fail(ErrorKind::InvalidArgument,
             "rule for " + name(k) + " may not read " + name(l) + " (evolution sets incompatible)");
    rule.output_mask[static_cast<std::size_t>(k)] = 1;
  }
  rules_.push_back(std::move(rule));
  const int id = rule_count() - 1;
  for (int k : rules_.back().outputs) rule_for_[static_cast<std::size_t>(k * directions_ + direction)] = id;
  return id;
}

void HyperbolicSystem::check_complete() const {
  for (int k = 0; k < component_count(); ++k)
    for (int j = 0; j < directions_; ++j)
      if (evolves(k, j) && rule_for(k, j) < 0)
        fail(ErrorKind::InvalidArgument, "component " + name(k) + " lacks a rule in direction " + std::to_string(j));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> fill_order(const Grid& grid, bool reverse_within_level) {
  const int M = grid.dims();
  int max_level = 0;
  for (int s : grid.steps()) max_level += s;
  std::vector<std::size_t> count(static_cast<std::size_t>(max_level + 2), 0);
  std::vector<int> level(grid.size());
  MultiIndex idx(static_cast<std::size_t>(M));
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    grid.unravel(lin, idx);
    level[lin] = std::accumulate(idx.begin(), idx.end(), 0);
    ++count[static_cast<std::size_t>(level[lin] + 1)];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<std::size_t> order(grid.size());
  for (std::size_t lin = 0; lin < grid.size(); ++lin) order[count[static_cast<std::size_t>(level[lin])]++] = lin;
  if (reverse_within_level) {
    std::size_t begin = 0;
    while (begin < order.size()) {
      std::size_t end = begin;
      while (end < order.size() && level[order[end]] == level[order[begin]]) ++end;
      std::reverse(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end));
      begin = end;
    }
  }
  return order;
}

}  // namespace

GoursatSolution goursat_solve(const HyperbolicSystem& sys, const GoursatData& data, const MeshSpec& mesh,
                              const GoursatOptions& opts) {
  if (mesh.dims() != sys.directions()) fail(ErrorKind::InvalidArgument, "mesh and system dimension differ");
  for (double e : mesh.eps)
    if (!(e > 0.0)) fail(ErrorKind::InvalidArgument, "mesh sizes must be positive at solve time");
  sys.check_complete();

  const int K = sys.component_count();
  const int M = sys.directions();
  GoursatSolution sol;
  sol.mesh = mesh;
  for (int k = 0; k < K; ++k) sol.fields.emplace_back(mesh, sys.dim(k), k);
  const Grid& grid = sol.fields.front().grid();

  // Scratch buffers for each rule's outputs at the current site.
  std::vector<std::vector<std::vector<double>>> scratch(static_cast<std::size_t>(sys.rule_count()));
  for (int r = 0; r < sys.rule_count(); ++r)
    for (int k = 0; k < K; ++k)
      scratch[static_cast<std::size_t>(r)].emplace_back(
          sys.rule(r).output_mask[static_cast<std::size_t>(k)] ? static_cast<std::size_t>(sys.dim(k)) : 0u, 0.0);
  std::vector<char> done(static_cast<std::size_t>(sys.rule_count()), 0);

  std::vector<const double*> in_ptr(static_cast<std::size_t>(K));
  std::vector<double*> out_ptr(static_cast<std::size_t>(K));
  MultiIndex idx(static_cast<std::size_t>(M)), pred(static_cast<std::size_t>(M));

  for (std::size_t lin : fill_order(grid, opts.reverse_within_level)) {
    grid.unravel(lin, idx);
    std::fill(done.begin(), done.end(), 0);
    for (int k = 0; k < K; ++k) {
      auto dst = sol.fields[static_cast<std::size_t>(k)].at(lin);
      int dir = -1;
      for (int j = 0; j < M; ++j) {
        if (!sys.evolves(k, j) || idx[static_cast<std::size_t>(j)] == 0) continue;
        if (dir < 0 || opts.prefer_highest_direction) dir = j;
      }
      if (dir < 0) {
        data(k, idx, dst);
        continue;
      }
      const int rid = sys.rule_for(k, dir);
      const auto& rule = sys.rule(rid);
      auto& buf = scratch[static_cast<std::size_t>(rid)];
      if (!done[static_cast<std::size_t>(rid)]) {
        pred = idx;
        --pred[static_cast<std::size_t>(dir)];
        const std::size_t plin = grid.linear(pred);
        for (int l = 0; l < K; ++l) {
          in_ptr[static_cast<std::size_t>(l)] = sol.fields[static_cast<std::size_t>(l)].at(plin).data();
          out_ptr[static_cast<std::size_t>(l)] = buf[static_cast<std::size_t>(l)].data();
        }
        try {
          rule.fn(CornerView(in_ptr, sys.dims(), &rule.input_mask), CornerOutput(out_ptr, sys.dims(), &rule.output_mask),
                  mesh);
        } catch (const DomainViolation&) {
          throw;
        } catch (const Error& e) {
          throw DomainViolation(pred, k, dir, e.kind(), e.what());
        }
        done[static_cast<std::size_t>(rid)] = 1;
      }
      const auto& src = buf[static_cast<std::size_t>(k)];
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  return sol;
}

CornerState apply_shift(const HyperbolicSystem& sys, const CornerState& u, int i, const MeshSpec& mesh) {
  const int K = sys.component_count();
  CornerState out = u;
  std::vector<const double*> in_ptr(static_cast<std::size_t>(K));
  std::vector<double*> out_ptr(static_cast<std::size_t>(K));
  for (int l = 0; l < K; ++l) {
    in_ptr[static_cast<std::size_t>(l)] = u[static_cast<std::size_t>(l)].data();
    out_ptr[static_cast<std::size_t>(l)] = out[static_cast<std::size_t>(l)].data();
  }
  for (int r = 0; r < sys.rule_count(); ++r) {
    const auto& rule = sys.rule(r);
    if (rule.direction != i) continue;
    rule.fn(CornerView(in_ptr, sys.dims(), &rule.input_mask), CornerOutput(out_ptr, sys.dims(), &rule.output_mask),
            mesh);
  }
  return out;
}

namespace {

// tau_j applied to the components of `u` needed for output k only.
std::vector<double> shifted_component(const HyperbolicSystem& sys, const CornerState& u, int k, int j,
                                      const MeshSpec& mesh) {
  const int K = sys.component_count();
  const auto& rule = sys.rule(sys.rule_for(k, j));
  CornerState out = u;
  std::vector<const double*> in_ptr(static_cast<std::size_t>(K));
  std::vector<double*> out_ptr(static_cast<std::size_t>(K));
  for (int l = 0; l < K; ++l) {
    in_ptr[static_cast<std::size_t>(l)] = u[static_cast<std::size_t>(l)].data();
    out_ptr[static_cast<std::size_t>(l)] = out[static_cast<std::size_t>(l)].data();
  }
  rule.fn(CornerView(in_ptr, sys.dims(), &rule.input_mask), CornerOutput(out_ptr, sys.dims(), &rule.output_mask), mesh);
  return out[static_cast<std::size_t>(k)];
}

}  // namespace

double consistency_residual(const HyperbolicSystem& sys, const CornerState& corner, const MeshSpec& mesh) {
  sys.check_complete();
  const int M = sys.directions();
  const int K = sys.component_count();
  std::vector<CornerState> once(static_cast<std::size_t>(M));
  try {
    for (int i = 0; i < M; ++i) once[static_cast<std::size_t>(i)] = apply_shift(sys, corner, i, mesh);
  } catch (const Error& e) {
    throw DomainViolation(MultiIndex(static_cast<std::size_t>(M), 0), -1, -1, e.kind(), e.what());
  }
  double worst = 0.0;
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j)
      for (int k = 0; k < K; ++k) {
        if (!sys.evolves(k, i) || !sys.evolves(k, j)) continue;
        std::vector<double> a, b;
        try {
          a = shifted_component(sys, once[static_cast<std::size_t>(i)], k, j, mesh);
          b = shifted_component(sys, once[static_cast<std::size_t>(j)], k, i, mesh);
        } catch (const Error& e) {
          throw DomainViolation(MultiIndex(static_cast<std::size_t>(M), 1), k, -1, e.kind(), e.what());
        }
        const double scale = mesh.eps[static_cast<std::size_t>(i)] * mesh.eps[static_cast<std::size_t>(j)];
        for (std::size_t d = 0; d < a.size(); ++d) worst = std::max(worst, std::abs(a[d] - b[d]) / scale);
      }
  return worst;
}

}  // namespace dlame
