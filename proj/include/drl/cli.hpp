#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace drl {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_unsat = 2, exit_numeric = 3 };

// Entry point of the command-line tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drl
