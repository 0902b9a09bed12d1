#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fbcom::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kSpecError = 2,
  kUnstable = 3,
  kNotConverged = 4,
  kQuasiPeriodic = 5,
};

/// Environment variable naming the default root for artifact directories.
inline constexpr const char* kOutRootEnv = "FBCOM_OUT_ROOT";
/// Optional external renderer invoked by `figure` as `<cmd> --manifest <path>`.
inline constexpr const char* kPlotterEnv = "FBCOM_PLOTTER";

/// Entry point shared by the executable and the tests; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fbcom::cli
