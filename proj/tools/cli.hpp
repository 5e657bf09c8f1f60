#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace optdesign::cli {

/// Runs one `optdesign` invocation. args[0] is the program name.
/// Returns 0 on success, 2 on usage or validation errors, 1 on runtime
/// failures.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace optdesign::cli
