#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rulebench {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime error while working
inline constexpr int kExitConfig = 2;   // bad flags or config, nothing was done

// Entry point of the `rulebench` binary. `args` excludes the program name.
// Errors go to `err` as a one-line JSON report.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rulebench
