#pragma once

#include <iosfwd>

namespace symalign::cli {

/// Entry point of the `symalign` tool. Returns 0 on success, 1 on runtime
/// failure (I/O, schema, alignment errors) and 2 on usage errors.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace symalign::cli
