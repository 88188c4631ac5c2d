#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace jpq::cli {

enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_not_converged = 2 };

/// Runs one invocation. `args` excludes the program name. Diagnostics go to
/// `err`, short summaries to `out`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex(std::string_view bytes);

}  // namespace jpq::cli
