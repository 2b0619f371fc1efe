#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace piston::cli {

// Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error.
// Failures print one JSON line {"error": kind, ...} to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace piston::cli
