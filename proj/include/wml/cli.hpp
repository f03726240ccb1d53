#pragma once

#include <ostream>
#include <string>

#include "wml/config.hpp"

namespace wml {

enum ExitCode : int { exit_ok = 0, exit_checks_failed = 1, exit_config = 2, exit_numerical = 3 };

/// One-line JSON error record for a configuration failure.
std::string config_error_record(const ConfigError& e);

/// Validates `cfg`, runs the named pipeline and writes its files plus
/// manifest.json into cfg.out. Error records go to `err` as one JSON line.
int dispatch(const RunConfig& cfg, std::ostream& log, std::ostream& err, bool verbose = false);

} // namespace wml
