#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qlab::cli {

enum ExitCode : int { kPass = 0, kVerificationFailure = 1, kInputError = 2, kNumericFailure = 3 };

int run(int argc, char** argv);
/// In-process entry point; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qlab::cli
