#pragma once

#include <iosfwd>

namespace vqseg::cli {

// Exit codes: 0 success, 1 contract violation or bad usage, 2 I/O or parse error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vqseg::cli
