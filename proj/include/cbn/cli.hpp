#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cbn/errors.hpp"

namespace cbn {

/// Bad command-line input (exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitInput = 3, kExitContract = 4, kExitInternal = 5 };

/// "name=value,..." over exactly the given names, values in [0, alphabet).
/// Returns values in the order of `names`.
std::vector<int> parse_assignment(const std::string& text, const std::vector<std::string>& names, int alphabet);

/// Fixed-point decimal with 12 significant digits; zero prints with 12 decimals.
std::string format_probability(double p);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cbn
