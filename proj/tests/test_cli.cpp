#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "dlame/error.hpp"
#include "dlame/export.hpp"

using namespace dlame;
using namespace dlame::cli;

namespace {

ErrorKind config_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

// Exit status of the dlame binary; stdout and stderr are discarded.
int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + DLAME_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto d = std::filesystem::current_path() / ("cli_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("eps literals") {
  CHECK(parse_eps("0.125") == 0.125);
  CHECK(parse_eps(" pi/20 ") == kPi / 20);
  CHECK(parse_eps_list("pi/10,pi/20, 0.05") == std::vector<double>{kPi / 10, kPi / 20, 0.05});
  for (const char* bad : {"", "pi/", "pi/0", "pi/x", "abc", "-0.1", "0", "1e", "pi/20x"})
    CHECK_MESSAGE(config_kind([&] { parse_eps(bad); }) == ErrorKind::ConfigError, bad);
}

TEST_CASE("settings") {
  RunConfig c;
  apply_assignment(c, "eps=pi/40");
  apply_assignment(c, "circle-tol = 1e-6");
  apply_assignment(c, "stagger=yes");
  apply_assignment(c, "offset=0.5, 0.25");
  CHECK(*c.eps == kPi / 40);
  CHECK(c.circle_tol == 1e-6);
  CHECK(c.stagger);
  CHECK(c.offset == std::vector<double>{0.5, 0.25});
  CHECK(config_kind([&] { apply_assignment(c, "no_equals"); }) == ErrorKind::ConfigError);
  CHECK(config_kind([&] { apply_assignment(c, "colour=red"); }) == ErrorKind::ConfigError);
  CHECK(config_kind([&] { apply_assignment(c, "r=-1"); }) == ErrorKind::ConfigError);
  CHECK(config_kind([&] { apply_assignment(c, "lmax=one"); }) == ErrorKind::ConfigError);
  CHECK(config_kind([&] { apply_assignment(c, "stagger=maybe"); }) == ErrorKind::ConfigError);
  CHECK(config_kind([&] { apply_assignment(c, "problem=torus"); }) == ErrorKind::ConfigError);
}

TEST_CASE("config text skips comments and blank lines") {
  RunConfig c;
  apply_config_text(c, "# elliptic run\n\noracle = elliptic\neps = pi/20  # mesh\nr=1.2\n");
  CHECK(c.oracle == "elliptic");
  CHECK(*c.eps == kPi / 20);
  CHECK(c.r == 1.2);
}

TEST_CASE("environment knobs and precedence") {
  const std::map<std::string, std::string> env = {{"LAME_EPS", "0.2"}, {"LAME_CIRCULARITY_TOL", "1e-7"}, {"LAME_R", "0.8"}};
  auto getenv_fn = [&](const char* k) -> const char* {
    const auto it = env.find(k);
    return it == env.end() ? nullptr : it->second.c_str();
  };
  RunConfig c;
  apply_config_text(c, "eps=0.3\nr=0.9\noracle=flat\n");
  apply_environment(c, getenv_fn);
  CHECK(*c.eps == 0.2);  // environment beats the file
  CHECK(c.r == 0.8);
  CHECK(c.circularity_tol == 1e-7);
  CHECK(c.oracle == "flat");  // file value survives where env is silent
  apply_assignment(c, "eps=0.1");
  CHECK(*c.eps == 0.1);  // --config beats the environment
}

TEST_CASE("validation") {
  auto base = [](const std::string& cmd) {
    RunConfig c;
    c.command = cmd;
    c.eps = 0.1;
    return c;
  };
  {
    auto c = base("csurface");
    validate(c);
    CHECK(c.oracle == "elliptic");
  }
  {
    auto c = base("orthosys");
    c.oracle = "flat";
    validate(c);
    CHECK(c.oracle == "flat3");
  }
  {
    auto c = base("orthosys");
    c.svg = "x.svg";
    CHECK(config_kind([&] { validate(c); }) == ErrorKind::NonPlanarExport);
  }
  {
    auto c = base("csurface");
    c.oracle = "spherical";
    CHECK(config_kind([&] { validate(c); }) == ErrorKind::ConfigError);
  }
  {
    auto c = base("csurface");
    c.eps = 5.0;
    CHECK(config_kind([&] { validate(c); }) == ErrorKind::ConfigError);
  }
  {
    auto c = base("ribaucour");
    c.transforms = 2;
    CHECK(config_kind([&] { validate(c); }) == ErrorKind::ConfigError);
    c.oracle = "spherical";
    CHECK_NOTHROW(validate(c));
  }
  {
    RunConfig c;
    c.command = "sweep";
    c.eps_list = {0.1};
    CHECK(config_kind([&] { validate(c); }) == ErrorKind::ConfigError);
    c.eps_list = {0.1, 0.05};
    c.problem = "curve";
    c.oracle.clear();
    validate(c);
    CHECK(c.oracle == "circle:1");
  }
}

TEST_CASE("config echo is canonical") {
  RunConfig a, b;
  apply_assignment(a, "eps=pi/20");
  apply_assignment(b, "eps=0.15707963267948966");
  a.command = b.command = "csurface";
  a.csv = "one.csv";
  b.csv = "two.csv";
  CHECK(config_echo(a) == config_echo(b));
}

TEST_CASE("run writes a summary and artifacts") {
  const auto dir = scratch_dir("run");
  RunConfig c;
  c.command = "csurface";
  c.eps = kPi / 20;
  c.csv = (dir / "x.csv").string();
  c.json = (dir / "x.json").string();
  c.svg = (dir / "x.svg").string();
  validate(c);
  std::ostringstream out;
  CHECK(run(c, out) == kOk);
  CHECK(std::filesystem::exists(c.csv));
  CHECK(std::filesystem::exists(c.json));
  CHECK(std::filesystem::exists(c.svg));
  CHECK_FALSE(out.str().empty());
}

TEST_CASE("error reporting") {
  std::ostringstream err;
  CHECK(report_error(Error(ErrorKind::ConfigError, "bad"), err) == kConfigError);
  CHECK(report_error(Error(ErrorKind::NonPlanarExport, "3d"), err) == kConfigError);
  CHECK(report_error(Error(ErrorKind::IoError, "disk"), err) == kIoError);
  CHECK(report_error(Error(ErrorKind::SqrtDomain, "n"), err) == kSolverError);
  CHECK(err.str().find("bad") != std::string::npos);
}

TEST_CASE("exit codes of the binary") {
  const auto dir = scratch_dir("exit");
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("") == kConfigError);
  CHECK(run_cli("csurface --eps pi/zero") == kConfigError);
  CHECK(run_cli("csurface --eps 0.1x") == kConfigError);
  CHECK(run_cli("orthosys --eps 0.1 --r 0.3 --svg " + (dir / "o.svg").string()) == kConfigError);
  CHECK(run_cli("csurface --eps pi/20 --csv " + (dir / "missing" / "x.csv").string()) == kIoError);
  CHECK(run_cli("csurface --eps pi/20 --offset 0,0") == kSolverError);
  CHECK(run_cli("csurface --eps pi/20") == kOk);
  CHECK(run_cli("sweep --eps-list pi/10,pi/20,pi/40 --lmax 0") == kOk);
}

TEST_CASE("environment reaches the binary") {
  CHECK(std::system(("LAME_EPS=pi/0 \"" + std::string(DLAME_CLI_PATH) + "\" csurface >/dev/null 2>&1").c_str()) != 0);
  const int st = std::system(("LAME_EPS=pi/10 \"" + std::string(DLAME_CLI_PATH) + "\" csurface >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(st) == 0);
}

TEST_CASE("identical runs write identical bytes") {
  const auto dir = scratch_dir("det");
  for (const char* tag : {"a", "b"}) {
    const auto p = dir / tag;
    CHECK(run_cli("csurface --eps pi/20 --csv " + (p.string() + ".csv") + " --json " + (p.string() + ".json") + " --svg " +
                  (p.string() + ".svg")) == kOk);
  }
  for (const char* ext : {".csv", ".json", ".svg"})
    CHECK(read_text_file((dir / "a").string() + ext) == read_text_file((dir / "b").string() + ext));
}

}  // TEST_SUITE
