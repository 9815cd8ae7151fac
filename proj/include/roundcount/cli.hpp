#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace roundcount::cli {

/// Environment variable overriding the default seed of mse-sim.
inline constexpr const char* kSeedEnv = "ROUNDCOUNT_SEED";

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

/// Runs one invocation; `args` excludes the program name. The table goes to
/// `out` unless --out names a file. Errors print one JSON line on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace roundcount::cli
