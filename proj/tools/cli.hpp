#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace crnrd::cli {

enum ExitCode { ok = 0, usage = 1, validation = 2, quality = 3, solver = 4 };

/// Runs one command line (args[0] is the program name). JSON reports go to
/// `out` unless --quiet; files go to --out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crnrd::cli
