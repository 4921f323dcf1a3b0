#pragma once

#include "bookend/backends.hpp"
#include "bookend/endpoint.hpp"
#include "bookend/infiller.hpp"
#include "bookend/llm_pipeline.hpp"
#include "bookend/metrics.hpp"
#include "bookend/syntax.hpp"

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace bookend {

/// "lm" (phrase list -> stop -> classifier-guided infilling) or
/// "llm-method-k" (chat prompting with endpoint method k, one infill call).
struct SessionScheme {
    bool llm = false;
    PromptMethod method = PromptMethod::phrase_list;

    std::string to_string() const;
    static SessionScheme parse(std::string_view text);
    friend bool operator==(const SessionScheme &, const SessionScheme &) = default;
};

struct SessionConfig {
    std::size_t n = 5;
    double gamma = 0.7;
    Markers markers;
    GenerationParams params;
    std::uint64_t seed = 0;
    std::string system_prompt{kSystemPrompt7b};
    /// Filled in from the backend suite when the session is created.
    std::map<std::string, std::string> backend_ids;
};

struct Attempt {
    std::size_t index = 0;
    PhraseList phrase_list;
    PhraseListSource phrase_list_source = PhraseListSource::generated;
    std::optional<Sentence> stop;
    /// Infilling iterations so far (lm scheme).
    std::vector<TraceEntry> trace;
    std::optional<Story> final_story;
    std::optional<StoryScores> scores;
    std::vector<ChatTurn> turns;
    std::vector<std::string> warnings;
};

struct Session {
    std::string id;
    Sentence start;
    SessionScheme scheme;
    SessionConfig config;
    std::string created_at;
    std::string updated_at;
    std::vector<Attempt> attempts;
};

nlohmann::json to_json(const Session &session);
nlohmann::json to_json(const Attempt &attempt, const Session &session);

struct StepResult {
    TraceEntry entry;
    std::vector<Sentence> sentences;
    bool complete = false;
};

/// Sessions persisted as one append-only JSON-lines event log per session
/// under `data_dir`, with the current state held in memory. Calls on one
/// session are serialized; different sessions proceed independently, and
/// backend calls never hold the store-wide lock.
class SessionStore {
  public:
    using Clock = std::function<std::string()>;

    /// Loads every existing log in `data_dir` (created if missing).
    SessionStore(std::filesystem::path data_dir, BackendSuite backends, std::shared_ptr<SyntaxParser> syntax,
                 Clock clock = {});

    Session create_session(const std::string &start_text, const SessionScheme &scheme, SessionConfig config);
    Session get(const std::string &id) const;
    std::vector<std::string> ids() const;

    Attempt edit_phrase_list(const std::string &id, const std::vector<std::string> &tokens);
    Attempt generate_stop_for(const std::string &id, std::size_t attempt);
    StepResult infill_step(const std::string &id, std::size_t attempt);
    Story infill_complete(const std::string &id, std::size_t attempt);
    StoryScores score_attempt(const std::string &id, std::size_t attempt);

    /// Rebuilds a session from its event log alone.
    static Session replay(const std::filesystem::path &log_file);
    std::filesystem::path log_path(const std::string &id) const;

  private:
    struct Entry {
        explicit Entry(Session s) : session(std::move(s)) {}
        std::mutex mutex;
        Session session;
    };

    std::shared_ptr<Entry> find(const std::string &id) const;
    void append(Entry &entry, nlohmann::json event);
    template <typename F> auto with_backends(F &&f) -> decltype(f());
    Attempt &attempt_of(Session &session, std::size_t index);

    std::filesystem::path data_dir_;
    BackendSuite backends_;
    std::shared_ptr<SyntaxParser> syntax_;
    Clock clock_;
    mutable std::mutex store_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::size_t next_id_ = 1;
    std::mutex backend_mutex_;
    bool backends_concurrent_ = false;
};

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

} // namespace bookend
