#pragma once

#include <iosfwd>

namespace irk::cli {

// Exit codes: 0 success, 1 domain error or validation violations, 2 usage,
// parse or IO error. Errors are printed to `err` with their code name.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace irk::cli
