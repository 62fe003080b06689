#pragma once

// Command-line front end: one subcommand per pipeline stage.

#include <iosfwd>
#include <string>
#include <vector>

namespace advtext {

/// Runs the CLI with `args` (without the program name). Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace advtext
