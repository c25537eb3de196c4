#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace latdiff::cli {

// Exit codes: 0 success, 1 failed validation or runtime error, 2 usage or
// configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latdiff::cli
