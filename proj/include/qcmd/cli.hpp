#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcmd {

/// Bad flag value or unknown option; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses "0.04", "1e-5" or exact powers such as "2^-11" (also "-2^3").
double parse_real(const std::string& text);

/// Comma-separated parse_real values.
std::vector<double> parse_real_list(const std::string& text);

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line. Human summaries go to `out`; failures print a
/// single line "error=<usage|runtime> message=<text>" to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qcmd
