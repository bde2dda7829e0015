#pragma once

#include <iosfwd>

namespace heatctl::cli {

// Exit codes: 0 success, 2 invalid input, 1 internal or assertion failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace heatctl::cli
