#pragma once

#include <ostream>

namespace plearn::cli {

/// Entry point of the plearn tool. Exit codes: 0 success, 1 usage/IO/invalid
/// input, 2 a checked bound or acceptance condition failed.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace plearn::cli
