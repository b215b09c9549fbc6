#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace anoml {

// Exit codes: 0 success, 1 usage, 2 validation, 3 runtime. Failures print a
// single JSON object {"error", "kind", "message"} on the error stream.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

int run_cli(int argc, char** argv);
// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace anoml
