#pragma once

#include "bookend/session.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace bookend {

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    /// Defaults for sessions whose create request leaves them out.
    SessionConfig defaults;
    /// Static files (the web UI) served under "/" when set.
    std::optional<std::filesystem::path> static_dir;
};

/// HTTP front end of a SessionStore:
///
///   GET  /healthz
///   POST /sessions                                   {"start", "scheme"?, "n"?, "seed"?, ...}
///   GET  /sessions/{id}
///   POST /sessions/{id}/phrase-list                  {"tokens": [...]}
///   POST /sessions/{id}/attempts/{k}/stop
///   POST /sessions/{id}/attempts/{k}/infill-step
///   POST /sessions/{id}/attempts/{k}/infill-complete
///   POST /sessions/{id}/attempts/{k}/score
///
/// Failures answer {"code", "message", "detail"} with a matching HTTP status.
class SessionService {
  public:
    SessionService(std::shared_ptr<SessionStore> store, ServiceOptions options);
    ~SessionService();
    SessionService(const SessionService &) = delete;
    SessionService &operator=(const SessionService &) = delete;

    /// Binds (port 0 picks a free one) and serves on a background thread.
    int start();
    /// Binds and serves on the calling thread until stop().
    void run();
    void stop();
    int port() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

int http_status(ErrorCode code) noexcept;

} // namespace bookend
