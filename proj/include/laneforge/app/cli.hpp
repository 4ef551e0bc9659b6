#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace laneforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

// Runs one `laneforge` invocation; args exclude the program name. Returns
// the process exit status.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace laneforge
