#pragma once

// Command-line front end. Data goes to CSV files in the output directory,
// messages to `err`.

#include <ostream>
#include <string>
#include <vector>

namespace pmam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// `args` excludes the program name, e.g. {"solve", "example", "map-g1-neg", "--anchor", "0,1"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pmam::cli
