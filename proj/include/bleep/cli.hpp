#ifndef BLEEP_CLI_HPP
#define BLEEP_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace bleep::cli {

/**
 * Exit codes: 0 ok, 2 usage, 3 io/format (including hash mismatches), 4 validation, 5 numerical failure.
 * Failures print a single `error kind=<kind> code=<n> message="..."` line to `err`.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}

#endif
