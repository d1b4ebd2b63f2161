#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cohstat::cli {

enum class Command {
  kCount,
  kOmega,
  kEnumerate,
  kBeCurve,
  kBoltzmannCurve,
  kMaxent,
  kQCompare,
};

enum class OutputFormat { kCsv, kJson };

/// A fully parsed invocation. `params` holds the command-specific flags as
/// raw strings; run() validates every value against the target operation's
/// preconditions before touching the library and rejects unknown keys.
struct RunConfig {
  Command command;
  std::map<std::string, std::string> params;
  OutputFormat output_format = OutputFormat::kCsv;
  std::optional<std::string> output_path;
  std::optional<std::uint64_t> seed;
};

/// Bad flags or parameter values; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output file could not be written; exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by parse_args when --help is requested; carries the help text.
struct HelpRequested {
  std::string text;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitIo = 4;

/// Relative --output paths are resolved against this directory when set.
inline constexpr const char* kOutputDirEnvVar = "COHSTAT_OUT_DIR";

const char* command_name(Command command);

/// Parses the argument list (without the program name). Throws UsageError on
/// unknown or missing flags and HelpRequested for --help.
RunConfig parse_args(const std::vector<std::string>& args);

/// Executes the configured command and writes the result table to the
/// resolved output (stdout when no path is given). Returns kExitOk; failures
/// are reported by exception (UsageError, IoError, or a library error).
int run(const RunConfig& config);

/// Full front end: parse, run, and map failures to exit codes 2/3/4 with a
/// machine-readable JSON error record on stderr.
int cli_main(int argc, const char* const* argv);

} // namespace cohstat::cli
