#pragma once

#include <iosfwd>

namespace eucgov::cli {

/// Runs one command. Machine output goes to `out`, diagnostics and
/// interactive prompts to `err`; `in` feeds the questionnaire.
///
/// Returns 0 on success, 1 on a domain error (the error token leads the
/// message on `err`), 2 on a usage error.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace eucgov::cli
