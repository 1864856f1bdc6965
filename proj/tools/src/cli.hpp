#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace itm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumerical = 4;

/// Parses and runs one command line. Diagnostics go to `err`, tabular
/// results that are not written to files go to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace itm::cli
