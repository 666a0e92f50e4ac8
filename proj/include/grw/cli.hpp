#pragma once

// Command-line front end: grw <command> [--config FILE] [--key value ...].
// Keys are the config-file keys with '_' spelled '-'; flags override the file.
// Outputs go to --out, resolved against $GRW_OUTPUT_DIR when that is set and
// the path is relative; without --out each command writes <command>.csv/json.

#include <ostream>
#include <string>
#include <vector>

namespace grw {

inline constexpr const char* kOutputDirEnv = "GRW_OUTPUT_DIR";

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace grw
