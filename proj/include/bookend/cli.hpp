#pragma once

#include <iosfwd>

namespace bookend::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 some inputs
/// failed (batch generation wrote the rest). Failures print one JSON object
/// {"error": {"code", "message", "detail"}} to `err`.
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitPartial = 3;

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace bookend::cli
