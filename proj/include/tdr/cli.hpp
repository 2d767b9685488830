#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tdr/linalg.hpp"

namespace tdr::cli {

/// Shortest decimal string that reads back to the same double.
std::string format_number(double value);

/// "lo:hi:step" -> make_grid(lo, hi, step).
std::vector<double> parse_grid(std::string_view text);

/// "3,17,40" -> {3, 17, 40}. Indices are 0-based data rows.
std::vector<Index> parse_index_list(std::string_view text);

/// Entry point shared by the tdr binary and the tests. Returns the exit code:
/// 0 on success, 1 on a module error (error JSON on `err` and in the output
/// directory when it exists), 2 on a command-line usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tdr::cli
