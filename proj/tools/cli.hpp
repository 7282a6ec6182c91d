#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace anisokit::cli {

enum ExitCode { success = 0, operational_error = 1, verdict_failure = 2 };

// Runs one command. Reports go to `out` as JSON, error records to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace anisokit::cli
