#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pqpf::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kDataOrFit = 3,
  kNumerical = 4,
};

// Runs one command line (args[0] is the program name). Progress and errors go
// to `log`; data only to files.
int run(const std::vector<std::string>& args, std::ostream& log);

}  // namespace pqpf::cli
