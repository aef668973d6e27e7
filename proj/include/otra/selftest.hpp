#pragma once

#include <ostream>

namespace otra {

/// Runs the built-in oracle battery: every solver with an independent
/// reference implementation is cross-checked on small random instances.
/// Prints one line per check to `out` and returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace otra
