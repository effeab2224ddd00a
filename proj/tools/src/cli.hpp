#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hom::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

// Parses `args` (without the program name), dispatches and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hom::cli
