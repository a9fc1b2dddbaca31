#include "commands.hpp"

#include <cstdio>
#include <memory>
#include <ostream>
#include <string>

#include "dlame/analysis.hpp"
#include "dlame/conjugate.hpp"
#include "dlame/export.hpp"
#include "dlame/geometry.hpp"
#include "dlame/orthogonal.hpp"

namespace dlame::cli {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExportMeta meta_for(const RunConfig& cfg) {
  ExportMeta m;
  m.command = cfg.command;
  m.eps = cfg.eps ? *cfg.eps : cfg.eps_list.front();
  m.r = cfg.r;
  m.config = config_echo(cfg);
  return m;
}

template <int N>
void with_origin(OrthogonalOracle<N>& F, const RunConfig& cfg) {
  if (cfg.offset.empty()) return;
  if (static_cast<int>(cfg.offset.size()) != F.m()) fail(ErrorKind::ConfigError, "offset has the wrong dimension");
  F.origin = cfg.offset;
}

std::shared_ptr<OrthogonalOracle<2>> planar_oracle(const RunConfig& cfg) {
  std::shared_ptr<OrthogonalOracle<2>> F;
  if (cfg.oracle == "elliptic") F = std::make_shared<EllipticOracle>();
  else F = std::make_shared<FlatOracle<2>>();
  with_origin(*F, cfg);
  return F;
}

std::shared_ptr<OrthogonalOracle<3>> spatial_oracle(const RunConfig& cfg) {
  std::shared_ptr<OrthogonalOracle<3>> F;
  if (cfg.oracle == "spherical") F = std::make_shared<SphericalOracle>();
  else F = std::make_shared<FlatOracle<3>>();
  with_origin(*F, cfg);
  return F;
}

// Writes CSV/JSON/SVG as requested. SVG only for planar nets.
void write_lattice(const RunConfig& cfg, const LatticeField& x, std::ostream& out) {
  if (!cfg.csv.empty()) {
    write_text_file(cfg.csv, lattice_csv(x));
    out << "wrote " << cfg.csv << "\n";
  }
  if (!cfg.json.empty()) {
    write_text_file(cfg.json, lattice_json(x, meta_for(cfg)));
    out << "wrote " << cfg.json << "\n";
  }
}

// Circle pattern; false when a record breaks the configured tolerance.
bool write_circles(const RunConfig& cfg, const LatticeField& x, std::ostream& out) {
  const auto circles = circle_records(x);
  int bad = 0;
  double worst = 0.0;
  for (const auto& c : circles) {
    worst = std::max(worst, c.deviation / c.radius);
    if (!(c.deviation <= cfg.circle_tol * c.radius)) ++bad;
  }
  out << "circles " << circles.size() << ", worst vertex deviation / radius " << sci(worst) << ", failing "
      << bad << "\n";
  if (!cfg.svg.empty()) {
    write_text_file(cfg.svg, circles_svg(circles, *cfg.eps));
    out << "wrote " << cfg.svg << "\n";
  }
  return bad == 0;
}

bool check(const char* what, double value, double tol, std::ostream& out) {
  const bool ok = value <= tol;
  out << what << " " << sci(value) << (ok ? "" : "  (exceeds " + sci(tol) + ")") << "\n";
  return ok;
}

void grid_line(const MeshSpec& mesh, std::ostream& out) {
  out << "grid";
  for (std::size_t i = 0; i < mesh.steps.size(); ++i) out << (i ? " x " : " ") << mesh.steps[i] + 1;
  out << " sites, eps = " << g17(mesh.eps[0]) << "\n";
}

int run_csurface(const RunConfig& cfg, std::ostream& out) {
  const auto F = planar_oracle(cfg);
  const double eps = *cfg.eps;
  const auto net = csurface_solve<2>(oracle_csurface_data<2>(F, eps, cfg.stagger), eps, cfg.r);
  grid_line(net.mesh, out);
  const auto inv = lame_invariants(net);
  bool ok = check("max circularity", inv.circularity, cfg.circularity_tol, out);
  out << "sup error vs " << F->name() << " " << sci(cl_norm(oracle_error_field(*F, net.x), 0)) << "\n";
  ok = write_circles(cfg, net.x, out) && ok;
  write_lattice(cfg, net.x, out);
  return ok ? kOk : kCheckFailed;
}

template <int N>
int conjugate_impl(std::shared_ptr<OrthogonalOracle<N>> F, const RunConfig& cfg, std::ostream& out) {
  const double eps = *cfg.eps;
  const MeshSpec mesh = MeshSpec::uniform(F->m(), eps, cfg.r);
  std::vector<CurveFn> curves;
  for (int i = 0; i < F->m(); ++i)
    curves.push_back([F, i](double t) { return Vec(F->point(oracle_coords(*F, {{i, t}}))); });
  // c_ij = d_i h_j / h_j = beta_ij h_i / h_j.
  CoeffFn coeff = [F](int i, int j, std::span<const double> xi) {
    std::vector<double> p = F->origin;
    for (std::size_t a = 0; a < xi.size(); ++a) p[a] += xi[a];
    return F->beta(i, j, p) * F->h(i, p) / F->h(j, p);
  };
  const Vec origin = F->point(F->origin);
  const auto net = solve_conjugate_net(conjugate_data_from_curves(origin, curves, {}, coeff, mesh), mesh, N);
  grid_line(mesh, out);
  const auto res = conjugate_residuals(net);
  bool ok = check("max planarity", res.planarity, 1e-10, out);
  ok = check("max second-difference residual", res.dcn, 1e-10, out) && ok;
  out << "sup error vs " << F->name() << " " << sci(cl_norm(oracle_error_field(*F, net.x), 0)) << "\n";
  write_lattice(cfg, net.x, out);
  return ok ? kOk : kCheckFailed;
}

int run_conjugate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.oracle == "elliptic" || cfg.oracle == "flat2") return conjugate_impl<2>(planar_oracle(cfg), cfg, out);
  return conjugate_impl<3>(spatial_oracle(cfg), cfg, out);
}

int run_orthosys(const RunConfig& cfg, std::ostream& out) {
  const auto F = spatial_oracle(cfg);
  const auto sys = orthosys_assemble<3>(oracle_ortho_data<3>(F), *cfg.eps, cfg.r, cfg.stagger);
  grid_line(sys.mesh, out);
  bool ok = check("max circularity", net_circularity(sys.net), cfg.circularity_tol, out);
  ok = check("max miquel residual", net_miquel_residual(sys.net), cfg.circularity_tol, out) && ok;
  out << "sup error vs " << F->name() << " " << sci(cl_norm(oracle_error_field(*F, sys.net.x), 0)) << "\n";
  write_lattice(cfg, sys.net.x, out);
  return ok ? kOk : kCheckFailed;
}

int run_ribaucour(const RunConfig& cfg, std::ostream& out) {
  const double eps = *cfg.eps;
  if (cfg.oracle == "elliptic") {
    const auto P = elliptic_ribaucour_problem();
    const auto pair = ribaucour_solve<2>(P.data, eps, cfg.r, cfg.stagger);
    grid_line(pair.net.mesh, out);
    const auto res = ribaucour_residuals(pair, P.data.A);
    bool ok = check("max circularity", res.circularity, cfg.circularity_tol, out);
    out << "max enveloping residual " << sci(res.envelope) << "\n";
    out << "max |dX+| - |dX| - A|X+ - X| " << sci(res.alpha) << "\n";
    ok = write_circles(cfg, pair.net.x, out) && ok;
    write_lattice(cfg, pair.net.x, out);
    return ok ? kOk : kCheckFailed;
  }
  const auto P = spherical_ribaucour_family_problem(cfg.transforms);
  const auto fam = ribaucour_family<3>(P.data, P.transforms, P.corners, eps, cfg.r, cfg.stagger);
  grid_line(fam.net.mesh, out);
  bool ok = check("max circularity", net_circularity(fam.net), cfg.circularity_tol, out);
  ok = check("max miquel residual", net_miquel_residual(fam.net), cfg.circularity_tol, out) && ok;
  const int m = fam.net.mesh.continuous();
  for (int s = m; s < fam.net.mesh.dims(); ++s)
    for (int t = s + 1; t < fam.net.mesh.dims(); ++t) {
      const std::string tag = " (" + std::to_string(s - m + 1) + "," + std::to_string(t - m + 1) + ")";
      ok = check(("transform concircularity" + tag).c_str(), transform_concircularity(fam.net, s, t),
                 cfg.circularity_tol, out) && ok;
      ok = check(("transform coplanarity" + tag).c_str(), jonas_permutability_check(fam.net, s, t),
                 cfg.circularity_tol, out) && ok;
    }
  write_lattice(cfg, fam.net.x, out);
  return ok ? kOk : kCheckFailed;
}

ProblemKind problem_kind(const std::string& p) {
  if (p == "curve") return ProblemKind::Curve;
  if (p == "orthosys") return ProblemKind::OrthoSystem;
  if (p == "ribaucour") return ProblemKind::Ribaucour;
  return ProblemKind::CSurface;
}

int run_sweep(const RunConfig& cfg, std::ostream& out) {
  SweepOptions o;
  o.problem = problem_kind(cfg.problem);
  o.oracle = cfg.oracle;
  o.eps = cfg.eps_list;
  o.r = cfg.r;
  o.lmax = cfg.lmax;
  o.stagger = cfg.stagger;
  o.offset = cfg.offset;
  const SweepReport rep = convergence_sweep(o);
  out << "sweep " << to_string(o.problem) << " oracle " << o.oracle << (o.stagger ? " (staggered)" : "") << "\n";
  out << "eps                     steps";
  for (std::size_t l = 0; l < rep.errors.size(); ++l) out << "  error_l" << l << "  ";
  out << "\n";
  for (std::size_t k = 0; k < o.eps.size(); ++k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-22.17g  %5d", o.eps[k], rep.steps[k]);
    out << buf;
    for (const auto& e : rep.errors) out << "  " << sci(e[k]);
    out << "\n";
  }
  for (std::size_t l = 0; l < rep.errors.size(); ++l) {
    out << "l" << l << ": ";
    if (rep.exact[l]) {
      out << "exact to rounding\n";
      continue;
    }
    out << "slope " << (std::isnan(rep.fits[l].slope) ? std::string("n/a") : sci(rep.fits[l].slope)) << ", ratios";
    for (double q : rep.ratios[l]) out << " " << sci(q);
    out << "\n";
  }
  if (!cfg.report.empty()) {
    write_text_file(cfg.report, sweep_report_json(rep, meta_for(cfg)));
    out << "wrote " << cfg.report << "\n";
  }
  if (!cfg.json.empty()) {
    write_text_file(cfg.json, sweep_report_json(rep, meta_for(cfg)));
    out << "wrote " << cfg.json << "\n";
  }
  if (!cfg.csv.empty()) {
    std::string s = "eps,steps";
    for (std::size_t l = 0; l < rep.errors.size(); ++l) s += ",error_l" + std::to_string(l);
    s += "\n";
    for (std::size_t k = 0; k < o.eps.size(); ++k) {
      s += g17(o.eps[k]) + "," + std::to_string(rep.steps[k]);
      for (const auto& e : rep.errors) s += "," + g17(e[k]);
      s += "\n";
    }
    write_text_file(cfg.csv, s);
    out << "wrote " << cfg.csv << "\n";
  }
  return kOk;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out) {
  if (cfg.command == "csurface") return run_csurface(cfg, out);
  if (cfg.command == "conjugate") return run_conjugate(cfg, out);
  if (cfg.command == "orthosys") return run_orthosys(cfg, out);
  if (cfg.command == "ribaucour") return run_ribaucour(cfg, out);
  if (cfg.command == "sweep") return run_sweep(cfg, out);
  fail(ErrorKind::ConfigError, "unknown command '" + cfg.command + "'");
}

int report_error(const std::exception& e, std::ostream& err, const RunConfig* cfg) {
  // Error::what() already carries the kind and, for DomainViolation, the site.
  err << "error";
  if (cfg && cfg->eps) err << " (eps = " << g17(*cfg->eps) << ")";
  err << ": " << e.what() << "\n";
  const auto* de = dynamic_cast<const Error*>(&e);
  if (!de) return kSolverError;
  switch (de->kind()) {
    case ErrorKind::ConfigError:
    case ErrorKind::NonPlanarExport: return kConfigError;
    case ErrorKind::IoError: return kIoError;
    default: return kSolverError;
  }
}

}  // namespace dlame::cli
