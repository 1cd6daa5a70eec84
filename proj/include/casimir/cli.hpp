#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace casimir::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,
  kNumericalError = 3,
  kIoError = 4,
};

// args excludes the program name. Results go to out (or --output), messages to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

}  // namespace casimir::cli
