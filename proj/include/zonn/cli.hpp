#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zonn::cli {

/// Runs the command-line tool on `args` (without the program name).
/// Returns the process exit code: 0 success, 2 validation error, 3 I/O
/// error, 4 numeric error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses a radius list: either "start:stop:step" or comma-separated values.
std::vector<double> parse_radii(const std::string& spec);

}  // namespace zonn::cli
