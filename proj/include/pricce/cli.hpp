#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pricce::cli {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr const char* kJobsEnv = "PRICCE_JOBS";

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

/// Runs the command line `args` (without the program name). Results go to
/// `out`, diagnostics and logs to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Jobs precedence: explicit flag, then $PRICCE_JOBS, then the CPU count.
int resolve_jobs(int flag_value, const char* env_value);

/// Shortest decimal that round-trips, always with a fractional part.
std::string format_score(double v);

}  // namespace pricce::cli
