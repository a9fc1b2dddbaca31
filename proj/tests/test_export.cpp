#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "dlame/analysis.hpp"
#include "dlame/export.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace dlame;

namespace {

LatticeField random_field(const MeshSpec& mesh, int dim) {
  LatticeField x(mesh, dim);
  for (auto& v : x.data()) v = test::uniform(-10.0, 10.0) * std::pow(10.0, test::uniform(-6.0, 6.0));
  return x;
}

LatticeField grid_field(double eps, int steps) {
  LatticeField x(MeshSpec::uniform(2, eps, eps * steps), 2);
  int idx[2];
  for (std::size_t lin = 0; lin < x.size(); ++lin) {
    x.grid().unravel(lin, idx);
    x.at(lin)[0] = eps * idx[0];
    x.at(lin)[1] = eps * idx[1];
  }
  return x;
}

}  // namespace

TEST_SUITE("export") {

TEST_CASE("CSV round trip is bitwise") {
  for (const auto& mesh : {MeshSpec::uniform(2, std::numbers::pi / 20, 0.3 * std::numbers::pi), MeshSpec::uniform(2, 0.1, 0.5, 2),
                           MeshSpec::uniform(3, 0.2, 0.6)}) {
    const auto x = random_field(mesh, 3);
    const auto y = lattice_from_csv(lattice_csv(x), mesh);
    CHECK(y.data() == x.data());
  }
}

TEST_CASE("CSV layout") {
  const auto x = grid_field(0.5, 1);
  const std::string csv = lattice_csv(x);
  CHECK(csv.rfind("xi1,xi2,x1,x2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.find("0.5,0,0.5,0\n") != std::string::npos);
}

TEST_CASE("CSV import rejects broken tables") {
  const auto mesh = MeshSpec::uniform(2, 0.5, 1.0);
  const std::string csv = lattice_csv(grid_field(0.5, 2));
  CHECK_THROWS_AS(lattice_from_csv("xi1,x1\n0,0\n", mesh), Error);
  // drop one row
  const auto cut = csv.substr(0, csv.rfind('\n', csv.size() - 2) + 1);
  CHECK_THROWS_AS(lattice_from_csv(cut, mesh), Error);
  // duplicate a row
  const auto line = csv.substr(csv.find('\n') + 1, csv.find('\n', csv.find('\n') + 1) - csv.find('\n'));
  CHECK_THROWS_AS(lattice_from_csv(csv + line, mesh), Error);
}

TEST_CASE("JSON lattice echoes the config") {
  const auto x = grid_field(0.25, 2);
  ExportMeta meta{"csurface", 0.25, 0.5, {{"oracle", "flat2"}}};
  const auto j = nlohmann::json::parse(lattice_json(x, meta));
  CHECK(j["command"] == "csurface");
  CHECK(j["eps"] == 0.25);
  CHECK(j["config"]["oracle"] == "flat2");
  CHECK(j["version"] == library_version());
  CHECK(j["rows"].size() == 9u);
  CHECK(j["columns"].size() == 4u);
  CHECK(lattice_json(x, meta) == lattice_json(x, meta));
}

TEST_CASE("sweep report JSON maps undefined slopes to null") {
  SweepOptions o;
  o.oracle = "flat";
  o.eps = {0.2, 0.1, 0.05};
  o.r = 0.6;
  const auto j = nlohmann::json::parse(sweep_report_json(convergence_sweep(o), {"sweep", 0.0, 0.6, {}}));
  CHECK(j["norms"][0]["exact"] == true);
  CHECK(j["norms"][0]["slope"].is_null());
  CHECK(j["eps_list"].size() == 3u);
}

TEST_CASE("flat 2x2 grid gives one circle at the cell midpoint") {
  const double eps = 0.3;
  const auto circles = circle_records(grid_field(eps, 1));
  REQUIRE(circles.size() == 1u);
  CHECK((circles[0].center - Eigen::Vector2d(0.15, 0.15)).norm() <= 1e-15);
  CHECK(circles[0].radius == doctest::Approx(eps / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(circles[0].valid());
}

TEST_CASE("circle records of a solved elliptic net") {
  auto F = std::make_shared<const EllipticOracle>();
  const double eps = std::numbers::pi / 20;
  const auto net = csurface_solve<2>(oracle_csurface_data<2>(F, eps, false), eps, 0.3 * std::numbers::pi);
  const auto circles = circle_records(net.x);
  CHECK(circles.size() == 36u);
  for (const auto& c : circles) CHECK(c.valid());
  const std::string svg = circles_svg(circles, eps);
  CHECK(svg.find("<svg xmlns") != std::string::npos);
  std::size_t n = 0;
  for (auto p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++n;
  CHECK(n == 36u);
}

TEST_CASE("non-planar nets have no circle export") {
  LatticeField x3(MeshSpec::uniform(2, 0.5, 1.0), 3);
  CHECK_THROWS_AS(circle_records(x3), Error);
  try {
    circle_records(x3);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPlanarExport);
  }
  LatticeField x1(MeshSpec::uniform(3, 0.5, 1.0), 2);
  CHECK_THROWS_AS(circle_records(x1), Error);
}

TEST_CASE("file helpers report I/O errors") {
  const auto dir = std::filesystem::temp_directory_path() / "dlame_export_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "a.txt").string();
  write_text_file(path, "hello\n");
  CHECK(read_text_file(path) == "hello\n");
  try {
    read_text_file((dir / "missing.txt").string());
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
  CHECK_THROWS_AS(write_text_file((dir / "no" / "such" / "dir.txt").string(), "x"), Error);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
