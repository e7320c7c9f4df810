#pragma once

#include <iosfwd>

namespace iceload::cli {

// Exit codes returned by run().
enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kInputError = 2 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace iceload::cli
