#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace specforge::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2, kCodec = 3 };

/// Entry point of the `specforge` binary. Data goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace specforge::cli
