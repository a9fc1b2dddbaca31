#include "dlame/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dlame/geometry.hpp"
#include "json.hpp"

namespace dlame {

namespace {

using nlohmann::ordered_json;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail(ErrorKind::IoError, "bad number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> column_names(const LatticeField& x) {
  std::vector<std::string> cols;
  for (int i = 0; i < x.mesh().dims(); ++i) cols.push_back("xi" + std::to_string(i + 1));
  for (int d = 0; d < x.dim(); ++d) cols.push_back("x" + std::to_string(d + 1));
  return cols;
}

double xi_of(const MeshSpec& mesh, int i, int k) { return k * mesh.eps[static_cast<std::size_t>(i)]; }

ordered_json meta_json(const ExportMeta& meta) {
  ordered_json j;
  j["version"] = library_version();
  j["command"] = meta.command;
  j["eps"] = meta.eps;
  j["r"] = meta.r;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : meta.config) cfg[k] = v;  // std::map: sorted keys
  j["config"] = cfg;
  return j;
}

// NaN and inf are not JSON numbers.
ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

std::string library_version() { return DLAME_VERSION_STRING; }

std::string lattice_csv(const LatticeField& x) {
  const auto cols = column_names(x);
  std::string out;
  for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + cols[c];
  out += '\n';
  const Grid& g = x.grid();
  MultiIndex idx(static_cast<std::size_t>(g.dims()));
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    g.unravel(lin, idx);
    for (int i = 0; i < g.dims(); ++i) {
      if (i) out += ',';
      out += g17(xi_of(x.mesh(), i, idx[static_cast<std::size_t>(i)]));
    }
    for (double v : x.at(lin)) out += ',' + g17(v);
    out += '\n';
  }
  return out;
}

LatticeField lattice_from_csv(const std::string& text, const MeshSpec& mesh) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::IoError, "empty CSV");
  const auto header = split_commas(line);
  const int M = mesh.dims();
  int n_xi = 0;
  while (n_xi < static_cast<int>(header.size()) && header[static_cast<std::size_t>(n_xi)].starts_with("xi")) ++n_xi;
  if (n_xi != M) fail(ErrorKind::IoError, "CSV has " + std::to_string(n_xi) + " coordinate columns, mesh has " + std::to_string(M));
  const int dim = static_cast<int>(header.size()) - M;
  if (dim <= 0) fail(ErrorKind::IoError, "CSV has no value columns");

  LatticeField f(mesh, dim);
  std::vector<char> seen(f.size(), 0);
  MultiIndex idx(static_cast<std::size_t>(M));
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) fail(ErrorKind::IoError, "CSV row " + std::to_string(rows + 1) + " has the wrong width");
    for (int i = 0; i < M; ++i)
      idx[static_cast<std::size_t>(i)] = static_cast<int>(
          std::lround(parse_double(cells[static_cast<std::size_t>(i)]) / mesh.eps[static_cast<std::size_t>(i)]));
    if (!f.grid().contains(idx)) fail(ErrorKind::IoError, "CSV site outside the mesh");
    const std::size_t lin = f.grid().linear(idx);
    if (seen[lin]++) fail(ErrorKind::IoError, "CSV site listed twice");
    auto v = f.at(lin);
    for (int d = 0; d < dim; ++d) v[static_cast<std::size_t>(d)] = parse_double(cells[static_cast<std::size_t>(M + d)]);
    ++rows;
  }
  if (rows != f.size()) fail(ErrorKind::IoError, "CSV covers " + std::to_string(rows) + " of " + std::to_string(f.size()) + " sites");
  return f;
}

std::string lattice_json(const LatticeField& x, const ExportMeta& meta) {
  ordered_json j = meta_json(meta);
  j["steps"] = x.mesh().steps;
  j["mesh_eps"] = x.mesh().eps;
  j["columns"] = column_names(x);
  ordered_json rows = ordered_json::array();
  const Grid& g = x.grid();
  MultiIndex idx(static_cast<std::size_t>(g.dims()));
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    g.unravel(lin, idx);
    ordered_json row = ordered_json::array();
    for (int i = 0; i < g.dims(); ++i) row.push_back(xi_of(x.mesh(), i, idx[static_cast<std::size_t>(i)]));
    for (double v : x.at(lin)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(1) + "\n";
}

std::string sweep_report_json(const SweepReport& rep, const ExportMeta& meta) {
  ordered_json j = meta_json(meta);
  j["problem"] = to_string(rep.options.problem);
  j["oracle"] = rep.options.oracle;
  j["stagger"] = rep.options.stagger;
  j["eps_list"] = rep.options.eps;
  j["steps"] = rep.steps;
  ordered_json norms = ordered_json::array();
  for (std::size_t l = 0; l < rep.errors.size(); ++l) {
    ordered_json n;
    n["order"] = l;
    n["errors"] = rep.errors[l];
    n["ratios"] = rep.ratios[l];
    n["exact"] = static_cast<bool>(rep.exact[l]);
    n["slope"] = number_or_null(rep.fits[l].slope);
    n["intercept"] = number_or_null(rep.fits[l].intercept);
    n["fit_residual"] = number_or_null(rep.fits[l].residual);
    norms.push_back(std::move(n));
  }
  j["norms"] = std::move(norms);
  return j.dump(1) + "\n";
}

std::vector<CircleRecord> circle_records(const LatticeField& x) {
  if (x.dim() != 2 || x.mesh().dims() != 2) fail(ErrorKind::NonPlanarExport, "circle patterns need a 2D net in the plane");
  const auto& steps = x.mesh().steps;
  const auto pt = [&](int i, int j) {
    const int idx[2] = {i, j};
    const auto v = x.at(std::span<const int>(idx, 2));
    return Eigen::VectorXd(Eigen::Vector2d(v[0], v[1]));
  };
  std::vector<CircleRecord> out;
  out.reserve(static_cast<std::size_t>(steps[0]) * static_cast<std::size_t>(steps[1]));
  for (int i = 0; i < steps[0]; ++i)
    for (int j = 0; j < steps[1]; ++j) {
      const Eigen::VectorXd v[4] = {pt(i, j), pt(i + 1, j), pt(i, j + 1), pt(i + 1, j + 1)};
      const Circle c = circumcircle(v[0], v[1], v[2]);
      CircleRecord rec;
      rec.center = c.center;
      rec.radius = c.radius;
      rec.i = i;
      rec.j = j;
      for (const auto& p : v) rec.deviation = std::max(rec.deviation, std::abs((p - c.center).norm() - c.radius));
      out.push_back(rec);
    }
  return out;
}

std::string circles_svg(const std::vector<CircleRecord>& circles, double eps) {
  const double stroke = eps / 10.0;
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const auto& c : circles) {
    x0 = std::min(x0, c.center.x() - c.radius);
    x1 = std::max(x1, c.center.x() + c.radius);
    // SVG y grows downward.
    y0 = std::min(y0, -c.center.y() - c.radius);
    y1 = std::max(y1, -c.center.y() + c.radius);
  }
  if (circles.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
  x0 -= stroke, y0 -= stroke, x1 += stroke, y1 += stroke;

  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + g17(x0) + " " + g17(y0) + " " + g17(x1 - x0) + " " +
       g17(y1 - y0) + "\" width=\"800\" height=\"" + g17(800.0 * (y1 - y0) / (x1 - x0)) + "\">\n";
  s += "<g fill=\"none\" stroke=\"black\" stroke-width=\"" + g17(stroke) + "\">\n";
  for (const auto& c : circles)
    s += "<circle data-cell=\"" + std::to_string(c.i) + "," + std::to_string(c.j) + "\" cx=\"" + g17(c.center.x()) +
         "\" cy=\"" + g17(-c.center.y()) + "\" r=\"" + g17(c.radius) + "\"/>\n";
  s += "</g>\n</svg>\n";
  return s;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  f << content;
  f.flush();
  if (!f) fail(ErrorKind::IoError, "write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace dlame
