#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace secforage::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point behind the `secforage` binary; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace secforage::cli
