#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shellcap::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one invocation (arguments exclude the program name). Tables go to
/// --output or `out`; diagnostics go to `err`. Returns 0 on success, 2 on
/// validation errors, 3 on resource limits, 1 on other failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Markdown description of every output schema (the content of SCHEMAS.md).
std::string schemas_markdown();

}  // namespace shellcap::cli
