#pragma once

// Command-line front end. Exit codes: 0 pass, 1 verdict false, 2 input
// error, 3 numerical failure.

#include <iosfwd>

namespace liefam {

enum ExitCode : int { kExitPass = 0, kExitVerdictFalse = 1, kExitInputError = 2, kExitNumerical = 3 };

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace liefam
