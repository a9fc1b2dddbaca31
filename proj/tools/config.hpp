#pragma once

// Run configuration of the dlame tool. Every source (config file, LAME_*
// environment, --config key=value, dedicated flags) goes through
// apply_setting, in that order of increasing precedence.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dlame::cli {

inline constexpr double kPi = 3.14159265358979323846;

struct RunConfig {
  std::string command;  // csurface | conjugate | orthosys | ribaucour | sweep
  std::string oracle;   // empty: the command's default
  std::optional<double> eps;
  std::vector<double> eps_list;
  double r = 0.3 * kPi;
  bool stagger = false;
  std::string problem = "csurface";  // sweep only
  int lmax = 1;
  int transforms = 1;                // ribaucour m'
  std::vector<double> offset;        // oracle origin override

  std::string svg, csv, json, report;

  // Tolerance knobs.
  double circle_tol = 1e-8;        // CircleRecord: vertex distance vs radius
  double circularity_tol = 1e-9;   // solved nets: worst circularity residual
};

// Decimal literal or pi/<int>.
double parse_eps(std::string_view s);
std::vector<double> parse_eps_list(std::string_view s);

// Keys: oracle eps eps_list r stagger problem lmax transforms offset svg csv
// json report circle_tol circularity_tol. ConfigError on unknown keys or bad
// values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);
// "key=value".
void apply_assignment(RunConfig& cfg, std::string_view assignment);
// key=value lines; blank lines and '#' comments are skipped.
void apply_config_text(RunConfig& cfg, const std::string& text);
// LAME_<KEY> for every key, upper case (LAME_EPS_LIST, LAME_CIRCLE_TOL, ...).
void apply_environment(RunConfig& cfg, const std::function<const char*(const char*)>& getenv_fn);

const std::vector<std::string>& setting_keys();

// Fills command defaults and checks the combination.
void validate(RunConfig& cfg);

// Effective settings as canonical strings, output paths excluded.
std::map<std::string, std::string> config_echo(const RunConfig& cfg);

}  // namespace dlame::cli
