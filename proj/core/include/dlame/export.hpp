#pragma once

// Artifacts: CSV/JSON lattices, sweep reports and SVG circle patterns.
// All writers are deterministic: fixed row order, 17 significant digits, no
// timestamps.

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

#include "dlame/analysis.hpp"
#include "dlame/lattice.hpp"

namespace dlame {

// Echoed into JSON artifacts next to eps and r.
struct ExportMeta {
  std::string command;
  double eps = 0.0;
  double r = 0.0;
  std::map<std::string, std::string> config;
};

std::string library_version();

// Columns xi1..xiM (lattice coordinates k * eps_i), then x1..xN. Rows in
// lexicographic index order.
std::string lattice_csv(const LatticeField& x);
// Inverse of lattice_csv on a known mesh. Sites are located by rounding
// xi / eps; every site must appear exactly once.
LatticeField lattice_from_csv(const std::string& text, const MeshSpec& mesh);

std::string lattice_json(const LatticeField& x, const ExportMeta& meta);
std::string sweep_report_json(const SweepReport& report, const ExportMeta& meta);

struct CircleRecord {
  Eigen::Vector2d center;
  double radius = 0.0;
  int i = 0, j = 0;        // lattice cell (xi_1, xi_2) / eps
  double deviation = 0.0;  // max over the four vertices of ||v - center| - radius|
  bool valid() const { return deviation <= kCircleRecordTol * radius; }

  static constexpr double kCircleRecordTol = 1e-8;
};

// One record per cell of a 2D net in the plane: circumcircle of
// (x, tau_1 x, tau_2 x), the fourth vertex kept as the witness.
// NonPlanarExport unless the field has dim 2 on a 2-direction grid.
std::vector<CircleRecord> circle_records(const LatticeField& x);

// Circles with stroke width eps / 10 in a viewport fitted to their union.
std::string circles_svg(const std::vector<CircleRecord>& circles, double eps);

// IoError on failure.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace dlame
