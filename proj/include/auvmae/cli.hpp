#pragma once

#include <string>
#include <vector>

namespace auvmae::cli {

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace auvmae::cli
