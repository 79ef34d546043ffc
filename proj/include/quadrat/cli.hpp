#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace quadrat {

/// Entry point shared by the `quadrat` binary and the tests. `args` excludes
/// the program name. Returns the process exit code: 0 on success, 2 on any
/// usage, validation or I/O error (reported as one `error[<kind>]: ...` line).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace quadrat
