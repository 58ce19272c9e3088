#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rampsched::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kNotConverged = 2,
  kVerificationGap = 3,
};

/// Runs the command line `args` (args[0] is the program name). Human-readable
/// output goes to `out`, errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace rampsched::cli
