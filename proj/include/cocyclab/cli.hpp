#pragma once

#include <ostream>

namespace cocyclab {

inline constexpr const char* kToolName = "cocyclab";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

/// Exit codes of run_cli.
enum ExitCode : int {
  exit_pass = 0,
  exit_fail = 1,           // some verdict is FAIL, or a replay did not reproduce
  exit_usage = 2,          // bad arguments or a config that does not validate
  exit_numerical = 3,      // a numerical diagnostic stopped the run
  exit_replay_refused = 4  // report digest does not match its embedded config
};

/// Entry point of the command-line tool; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cocyclab
