#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fadec::cli {

/// Runs one `fadec` invocation. args[0] is the program name. Returns the
/// process exit status: 0 success, 1 validation or usage, 2 I/O,
/// 3 internal invariant violation.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fadec::cli
