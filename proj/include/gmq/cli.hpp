#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gmq::cli {

/// Exit codes: 0 success, 2 input error, 3 math error. Errors are written to
/// err as {"error": kind, "message": text}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace gmq::cli
