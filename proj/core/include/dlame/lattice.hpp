#pragma once

// Grids B^eps(r) with mixed mesh sizes, difference operators, C^l norms and a
// generic Goursat driver for first-order hyperbolic lattice systems.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dlame/error.hpp"

namespace dlame {

using MultiIndex = std::vector<int>;

struct MeshSpec {
  std::vector<double> eps;  // per direction, > 0 at solve time
  std::vector<int> steps;   // largest index per direction; the box is 0..steps[i]
  int tail = 0;             // trailing directions with eps = 1 and steps = 1
  double r = 0.0;

  // m continuous directions of size eps over [0, r], then `tail` discrete ones.
  static MeshSpec uniform(int m, double eps, double r, int tail = 0);
  static MeshSpec explicit_steps(std::vector<double> eps, std::vector<int> steps, int tail = 0);

  int dims() const { return static_cast<int>(eps.size()); }
  int continuous() const { return dims() - tail; }
  bool is_tail(int i) const { return i >= continuous(); }
  std::size_t site_count() const;

  // Throws InvalidArgument unless the mesh is one of the two admissible shapes.
  void validate() const;
};

// Number of steps R with R*eps <= r (tolerant to rounding in r/eps).
int steps_for(double eps, double r);

class Grid {
 public:
  explicit Grid(std::vector<int> steps);

  int dims() const { return static_cast<int>(steps_.size()); }
  const std::vector<int>& steps() const { return steps_; }
  std::size_t size() const { return size_; }
  bool contains(std::span<const int> idx) const;
  std::size_t linear(std::span<const int> idx) const;
  void unravel(std::size_t lin, std::span<int> idx) const;
  std::size_t stride(int i) const { return strides_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<int> steps_;
  std::vector<std::size_t> strides_;
  std::size_t size_;
};

// Vector-valued field (dim doubles per site), row-major over the grid with
// the first direction slowest.
class LatticeField {
 public:
  LatticeField() = default;
  LatticeField(MeshSpec mesh, int dim, int component = -1);

  const MeshSpec& mesh() const { return mesh_; }
  const Grid& grid() const { return grid_; }
  int dim() const { return dim_; }
  int component() const { return component_; }
  std::size_t size() const { return grid_.size(); }

  std::span<double> at(std::size_t lin) {
    return {data_.data() + lin * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> at(std::size_t lin) const {
    return {data_.data() + lin * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<double> at(std::span<const int> idx);
  std::span<const double> at(std::span<const int> idx) const;

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  MeshSpec mesh_;
  Grid grid_{{}};
  int dim_ = 0;
  int component_ = -1;
  std::vector<double> data_;
};

// (tau_i f)(xi) = f(xi + eps_i e_i) on the box shortened by one step in i.
LatticeField shift(const LatticeField& f, int i);
// (delta_i f) = (tau_i f - f) / eps_i on the same shortened box.
LatticeField diff(const LatticeField& f, int i);
// Sup over |alpha| <= order of |delta^alpha f|, tail directions excluded.
double cl_norm(const LatticeField& f, int order);
// Pointwise difference of two fields on the same grid.
LatticeField subtract(const LatticeField& a, const LatticeField& b);

// ---------------------------------------------------------------------------
// Hyperbolic systems

class CornerView {
 public:
  CornerView(std::span<const double* const> values, std::span<const int> dims,
             const std::vector<char>* allowed);
  std::span<const double> operator[](int component) const;

 private:
  std::span<const double* const> values_;
  std::span<const int> dims_;
  const std::vector<char>* allowed_;
};

class CornerOutput {
 public:
  CornerOutput(std::span<double* const> values, std::span<const int> dims,
               const std::vector<char>* allowed);
  std::span<double> operator[](int component) const;

 private:
  std::span<double* const> values_;
  std::span<const int> dims_;
  const std::vector<char>* allowed_;
};

// A step rule writes tau_dir u_k for each of its outputs. It reports leaving
// its domain by throwing dlame::Error; the driver turns that into a
// DomainViolation carrying the site.
using StepFn = std::function<void(const CornerView& u, const CornerOutput& out, const MeshSpec& mesh)>;

class HyperbolicSystem {
 public:
  explicit HyperbolicSystem(int directions);

  int add_component(std::string name, int dim, const std::vector<int>& evolution);
  // Registration checks: dir in E(k) for every output k, and every input l
  // satisfies E(k) \ {dir} subset of E(l).
  int add_rule(int direction, std::vector<int> outputs, std::vector<int> inputs, StepFn fn);
  // Every (k, j in E(k)) must be produced by exactly one rule.
  void check_complete() const;

  int directions() const { return directions_; }
  int component_count() const { return static_cast<int>(components_.size()); }
  const std::string& name(int k) const { return components_[static_cast<std::size_t>(k)].name; }
  int dim(int k) const { return components_[static_cast<std::size_t>(k)].dim; }
  bool evolves(int k, int j) const {
    return (components_[static_cast<std::size_t>(k)].evolution >> j) & 1u;
  }
  std::uint32_t evolution_mask(int k) const { return components_[static_cast<std::size_t>(k)].evolution; }
  int rule_for(int k, int j) const {
    return rule_for_[static_cast<std::size_t>(k * directions_ + j)];
  }

  struct Rule {
    int direction;
    std::vector<int> outputs;
    std::vector<int> inputs;
    std::vector<char> input_mask;
    std::vector<char> output_mask;
    StepFn fn;
  };
  const Rule& rule(int id) const { return rules_[static_cast<std::size_t>(id)]; }
  int rule_count() const { return static_cast<int>(rules_.size()); }
  const std::vector<int>& dims() const { return dims_; }

 private:
  struct Component {
    std::string name;
    int dim;
    std::uint32_t evolution;
  };
  int directions_;
  std::vector<Component> components_;
  std::vector<int> dims_;
  std::vector<Rule> rules_;
  std::vector<int> rule_for_;
};

// Goursat data: value of component k at a site of its static subspace.
using GoursatData = std::function<void(int component, std::span<const int> site, std::span<double> out)>;

struct GoursatOptions {
  // Which predecessor direction feeds a non-static site: the lowest or the
  // highest admissible evolution direction. Both are valid for consistent
  // systems; the choice only moves rounding.
  bool prefer_highest_direction = false;
  // Visit sites of one level in reversed index order.
  bool reverse_within_level = false;
};

struct GoursatSolution {
  MeshSpec mesh;
  std::vector<LatticeField> fields;
};

GoursatSolution goursat_solve(const HyperbolicSystem& sys, const GoursatData& data,
                              const MeshSpec& mesh, const GoursatOptions& opts = {});

// Values of all components at one corner.
using CornerState = std::vector<std::vector<double>>;

// Apply all rules of direction i to a corner; components not evolving in i
// are copied unchanged.
CornerState apply_shift(const HyperbolicSystem& sys, const CornerState& u, int i, const MeshSpec& mesh);

// max over k and i < j in E(k) of |(delta_j delta_i - delta_i delta_j) u_k|
// on one elementary cube.
double consistency_residual(const HyperbolicSystem& sys, const CornerState& corner, const MeshSpec& mesh);

}  // namespace dlame
