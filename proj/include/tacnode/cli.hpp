#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tacnode/core.hpp"

namespace tacnode::cli {

enum class Command { kernel_finite, kernel_tacnode, gap_finite, gap_tacnode, converge, tw2, selftest };

// Bad command line or config file contents (exit status 2).
class UsageError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct RunConfig {
  Command command = Command::selftest;
  // option name without the leading dashes -> value as given
  std::map<std::string, std::string> parameters;
  bool verify = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNonConvergence = 3;

Command parse_command(const std::string& name);
std::string command_name(Command command);

// Parses argv (flags override values read through --config). Throws
// UsageError on malformed input.
RunConfig parse_arguments(int argc, const char* const* argv);

// Runs one command, writing the table to `out` (or to the --out file) and
// diagnostics to `err`. Returns the exit status.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// parse + run with the exit-status mapping
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// 17 significant digits, '.' separator, independent of the locale
std::string format_number(double value);

}  // namespace tacnode::cli
