#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bookend {

/// Error categories shared by the library, the CLI and the HTTP service.
///
/// `invalid_argument` marks a contract violation by the caller (bad request,
/// malformed input), `transport` marks a backend that could not be reached or
/// answered with garbage, `generation_failed` marks a backend that answered but
/// produced nothing usable.
enum class ErrorCode {
    invalid_argument,
    not_found,
    conflict,
    parse,
    io,
    transport,
    generation_failed,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &message, std::string detail = {})
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string &detail() const noexcept { return detail_; }

  private:
    ErrorCode code_;
    std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &message, std::string detail = {}) {
    throw Error(code, message, std::move(detail));
}

/// Collects non-fatal warnings (zero-norm embeddings, dropped duplicates,
/// unparseable backend output) for the caller to surface.
struct Diagnostics {
    std::vector<std::string> warnings;
    void warn(std::string message) { warnings.push_back(std::move(message)); }
};

inline void warn(Diagnostics *diag, std::string message) {
    if (diag != nullptr)
        diag->warn(std::move(message));
}

} // namespace bookend
