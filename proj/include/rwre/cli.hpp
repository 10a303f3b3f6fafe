#pragma once

// Command-line front end: walk, regen, hypercube, criteria, paths, acceptance.

#include <iosfwd>
#include <string>
#include <vector>

namespace rwre::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // run completed but a check failed, or an unexpected error
inline constexpr int kExitUsage = 2;    // bad flag or parameter
inline constexpr int kExitInsufficient = 3;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rwre::cli
