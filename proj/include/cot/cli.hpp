#pragma once

#include <ostream>

namespace cot {

// Entry point of the `cot` executable. Returns 0 on success, 1 on a usage
// error (usage text goes to `err`) and 2 when data or configuration is
// rejected.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cot
