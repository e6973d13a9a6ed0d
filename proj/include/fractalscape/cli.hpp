#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fractalscape::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Subcommands: eval, mle, holder, grad, scan, sweep, repro. `args` excludes
/// the program name. JSON goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace fractalscape::cli
