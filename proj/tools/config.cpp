#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "dlame/error.hpp"

namespace dlame::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  fail(ErrorKind::ConfigError, std::string(key) + " = '" + std::string(value) + "': " + std::string(why));
}

double parse_number(std::string_view key, std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) bad(key, s, "not a number");
  return v;
}

int parse_int(std::string_view key, std::string_view s) {
  s = trim(s);
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) bad(key, s, "not an integer");
  return v;
}

bool parse_bool(std::string_view key, std::string_view s) {
  s = trim(s);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  bad(key, s, "not a boolean");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

// Shortest round-trip form.
std::string g17(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + g17(v[k]);
  return s;
}

}  // namespace

double parse_eps(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  if (s.starts_with("pi/")) {
    const std::string_view d = s.substr(3);
    int n = 0;
    const auto [p, ec] = std::from_chars(d.data(), d.data() + d.size(), n);
    if (d.empty() || ec != std::errc() || p != d.data() + d.size() || n <= 0) bad("eps", s, "expected pi/<positive int>");
    v = kPi / n;
  } else {
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) bad("eps", s, "expected a decimal or pi/<int>");
  }
  if (!(v > 0.0) || !std::isfinite(v)) bad("eps", s, "must be positive");
  return v;
}

std::vector<double> parse_eps_list(std::string_view s) {
  std::vector<double> out;
  for (auto part : split(s, ',')) out.push_back(parse_eps(part));
  return out;
}

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = {"oracle", "eps",    "eps_list", "r",    "stagger",
                                                "problem", "lmax",  "transforms", "offset", "svg",
                                                "csv",    "json",   "report",   "circle_tol", "circularity_tol"};
  return keys;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "oracle") {
    if (value.empty()) bad(key, value, "empty");
    cfg.oracle = value;
  } else if (key == "eps") {
    cfg.eps = parse_eps(value);
  } else if (key == "eps_list") {
    cfg.eps_list = parse_eps_list(value);
  } else if (key == "r") {
    cfg.r = parse_number(key, value);
    if (!(cfg.r > 0.0)) bad(key, value, "must be positive");
  } else if (key == "stagger") {
    cfg.stagger = parse_bool(key, value);
  } else if (key == "problem") {
    if (value != "csurface" && value != "curve" && value != "orthosys" && value != "ribaucour")
      bad(key, value, "expected csurface, curve, orthosys or ribaucour");
    cfg.problem = value;
  } else if (key == "lmax") {
    cfg.lmax = parse_int(key, value);
  } else if (key == "transforms") {
    cfg.transforms = parse_int(key, value);
  } else if (key == "offset") {
    cfg.offset.clear();
    for (auto part : split(value, ',')) cfg.offset.push_back(parse_number(key, part));
  } else if (key == "svg") {
    cfg.svg = value;
  } else if (key == "csv") {
    cfg.csv = value;
  } else if (key == "json") {
    cfg.json = value;
  } else if (key == "report") {
    cfg.report = value;
  } else if (key == "circle_tol") {
    cfg.circle_tol = parse_number(key, value);
    if (!(cfg.circle_tol > 0.0)) bad(key, value, "must be positive");
  } else if (key == "circularity_tol") {
    cfg.circularity_tol = parse_number(key, value);
    if (!(cfg.circularity_tol > 0.0)) bad(key, value, "must be positive");
  } else {
    fail(ErrorKind::ConfigError, "unknown setting '" + std::string(key) + "'");
  }
}

void apply_assignment(RunConfig& cfg, std::string_view a) {
  const auto eq = a.find('=');
  if (eq == std::string_view::npos) fail(ErrorKind::ConfigError, "expected key=value, got '" + std::string(a) + "'");
  std::string key(trim(a.substr(0, eq)));
  std::replace(key.begin(), key.end(), '-', '_');
  apply_setting(cfg, key, a.substr(eq + 1));
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    const std::string_view l = trim(std::string_view(line).substr(0, hash));
    if (!l.empty()) apply_assignment(cfg, l);
  }
}

void apply_environment(RunConfig& cfg, const std::function<const char*(const char*)>& getenv_fn) {
  for (const auto& key : setting_keys()) {
    std::string name = "LAME_" + key;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    if (const char* v = getenv_fn(name.c_str())) apply_setting(cfg, key, v);
  }
}

void validate(RunConfig& cfg) {
  const std::string& c = cfg.command;
  if (c == "sweep") {
    if (cfg.oracle.empty())
      cfg.oracle = cfg.problem == "curve" ? "circle:1" : cfg.problem == "orthosys" ? "spherical" : "elliptic";
    if (cfg.eps_list.size() < 2) fail(ErrorKind::ConfigError, "sweep needs --eps-list with at least two values");
    if (cfg.lmax < 0 || cfg.lmax > 2) fail(ErrorKind::ConfigError, "lmax must be 0, 1 or 2");
    if (cfg.problem == "ribaucour") cfg.lmax = 0;
    return;
  }
  if (c != "csurface" && c != "conjugate" && c != "orthosys" && c != "ribaucour")
    fail(ErrorKind::ConfigError, "unknown command '" + c + "'");
  if (!cfg.eps) fail(ErrorKind::ConfigError, c + " needs --eps");
  if (cfg.oracle.empty()) cfg.oracle = (c == "orthosys") ? "spherical" : "elliptic";
  if (*cfg.eps > cfg.r) fail(ErrorKind::ConfigError, "eps exceeds the extent r");

  const bool planar = cfg.oracle == "elliptic" || cfg.oracle == "flat2";
  const bool spatial = cfg.oracle == "spherical" || cfg.oracle == "flat3";
  if (!planar && !spatial) {
    if (cfg.oracle == "flat") cfg.oracle = (c == "orthosys") ? "flat3" : "flat2";
    else fail(ErrorKind::ConfigError, "unknown oracle '" + cfg.oracle + "'");
  }
  if (c == "csurface" && cfg.oracle != "elliptic" && cfg.oracle != "flat2")
    fail(ErrorKind::ConfigError, "csurface supports the elliptic and flat oracles");
  if (c == "orthosys" && cfg.oracle != "spherical" && cfg.oracle != "flat3")
    fail(ErrorKind::ConfigError, "orthosys supports the spherical and flat oracles");
  if (c == "ribaucour") {
    if (cfg.oracle != "elliptic" && cfg.oracle != "spherical")
      fail(ErrorKind::ConfigError, "ribaucour supports the elliptic (pair of curves) and spherical (3D family) oracles");
    if (cfg.oracle == "elliptic" && cfg.transforms != 1)
      fail(ErrorKind::ConfigError, "the elliptic ribaucour problem has exactly one transform");
    if (cfg.transforms < 1 || cfg.transforms > 3) fail(ErrorKind::ConfigError, "transforms must be 1, 2 or 3");
  }
  if (c == "conjugate" && !cfg.svg.empty())
    fail(ErrorKind::ConfigError, "conjugate nets are not circular; SVG circle export is for csurface and ribaucour");
  const bool is3d = cfg.oracle == "spherical" || cfg.oracle == "flat3";
  if (!cfg.svg.empty() && is3d) fail(ErrorKind::NonPlanarExport, "SVG export needs a planar (N = 2) net");
}

std::map<std::string, std::string> config_echo(const RunConfig& cfg) {
  std::map<std::string, std::string> m;
  m["command"] = cfg.command;
  m["oracle"] = cfg.oracle;
  if (cfg.eps) m["eps"] = g17(*cfg.eps);
  if (!cfg.eps_list.empty()) m["eps_list"] = join(cfg.eps_list);
  m["r"] = g17(cfg.r);
  m["stagger"] = cfg.stagger ? "true" : "false";
  if (cfg.command == "sweep") {
    m["problem"] = cfg.problem;
    m["lmax"] = std::to_string(cfg.lmax);
  }
  if (cfg.command == "ribaucour") m["transforms"] = std::to_string(cfg.transforms);
  if (!cfg.offset.empty()) m["offset"] = join(cfg.offset);
  m["circle_tol"] = g17(cfg.circle_tol);
  m["circularity_tol"] = g17(cfg.circularity_tol);
  return m;
}

}  // namespace dlame::cli
