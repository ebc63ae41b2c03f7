#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dpca::cli {

inline constexpr const char* kToolVersion = "dpca 0.1.0";

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericalFailure = 3,
};

/// Runs one subcommand; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

/// Expands "a:b" ranges and comma lists into integers.
std::vector<long> parse_int_list(const std::vector<std::string>& items);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace dpca::cli
