// dlame: solve discrete orthogonal systems and conjugate nets from built-in
// oracles, export lattices and circle patterns, run convergence sweeps.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "dlame/error.hpp"
#include "dlame/export.hpp"

namespace {

struct Flags {
  std::vector<std::string> config_files;
  std::vector<std::string> assignments;
  std::optional<std::string> oracle, eps, eps_list, r, problem, lmax, transforms, offset;
  std::optional<std::string> svg, csv, json, report;
  bool stagger = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config-file", f.config_files, "File of key=value lines");
  sub->add_option("--config", f.assignments, "Setting as key=value (repeatable)");
  sub->add_option("--oracle", f.oracle, "elliptic | flat | spherical | circle:R | line");
  sub->add_option("--eps", f.eps, "Mesh size: decimal or pi/<int>");
  sub->add_option("--r", f.r, "Extent of every continuous direction");
  sub->add_flag("--stagger", f.stagger, "Sample Goursat data at half-grid points");
  sub->add_option("--csv", f.csv, "Write the lattice (or sweep table) as CSV");
  sub->add_option("--json", f.json, "Write the lattice (or sweep report) as JSON");
  sub->add_option("--offset", f.offset, "Oracle origin, comma separated");
  if (sub->get_name() != "sweep") sub->add_option("--svg", f.svg, "Write the circle pattern (planar nets only)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Lame systems: C-surfaces, orthogonal systems, Ribaucour pairs, conjugate nets"};
  app.set_version_flag("--version", dlame::library_version());
  app.require_subcommand(1);
  Flags f;

  auto* cs = app.add_subcommand("csurface", "Solve a discrete C-surface from closed-form Goursat data");
  add_common(cs, f);

  auto* cj = app.add_subcommand("conjugate", "Solve a discrete conjugate net from oracle curves and coefficients");
  add_common(cj, f);

  auto* os = app.add_subcommand("orthosys", "Assemble a 3D discrete orthogonal system from coordinate C-surfaces");
  add_common(os, f);

  auto* rb = app.add_subcommand("ribaucour", "Ribaucour pair of curves (elliptic) or transform family (spherical)");
  add_common(rb, f);
  rb->add_option("--transforms", f.transforms, "Number of transforms m' (spherical family)");

  auto* sw = app.add_subcommand("sweep", "Convergence sweep against an oracle");
  add_common(sw, f);
  sw->add_option("--eps-list", f.eps_list, "Comma-separated mesh sizes, decreasing");
  sw->add_option("--problem", f.problem, "csurface | curve | orthosys | ribaucour");
  sw->add_option("--lmax", f.lmax, "Highest difference-quotient order (0..2)");
  sw->add_option("--report", f.report, "Write the sweep report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dlame::cli::kConfigError;
  }

  dlame::cli::RunConfig cfg;
  for (auto* sub : {cs, cj, os, rb, sw})
    if (sub->parsed()) cfg.command = sub->get_name();
  try {
    for (const auto& path : f.config_files) dlame::cli::apply_config_text(cfg, dlame::read_text_file(path));
    dlame::cli::apply_environment(cfg, [](const char* name) { return std::getenv(name); });
    for (const auto& a : f.assignments) dlame::cli::apply_assignment(cfg, a);
    const auto set = [&](const char* key, const std::optional<std::string>& v) {
      if (v) dlame::cli::apply_setting(cfg, key, *v);
    };
    set("oracle", f.oracle);
    set("eps", f.eps);
    set("eps_list", f.eps_list);
    set("r", f.r);
    set("problem", f.problem);
    set("lmax", f.lmax);
    set("transforms", f.transforms);
    set("offset", f.offset);
    set("svg", f.svg);
    set("csv", f.csv);
    set("json", f.json);
    set("report", f.report);
    if (f.stagger) cfg.stagger = true;
    dlame::cli::validate(cfg);
    return dlame::cli::run(cfg, std::cout);
  } catch (const std::exception& e) {
    return dlame::cli::report_error(e, std::cerr, &cfg);
  }
}
