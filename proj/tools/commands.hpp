#pragma once

#include <iosfwd>

#include "config.hpp"

namespace dlame::cli {

enum ExitCode : int { kOk = 0, kSolverError = 1, kConfigError = 2, kIoError = 3, kCheckFailed = 4 };

// Runs a validated config, writes the requested artifacts and a summary to
// `out`. Throws dlame::Error on solver, config and I/O failures. Returns
// kCheckFailed when a solved net violates the configured tolerances.
int run(const RunConfig& cfg, std::ostream& out);

// Exit status for an error, with a one-line diagnostic (site and eps where
// known) on `err`. `cfg` may be null when parsing failed.
int report_error(const std::exception& e, std::ostream& err, const RunConfig* cfg = nullptr);

}  // namespace dlame::cli
