#include "bookend/session.hpp"
#include "bookend/serialization.hpp"
#include "bookend/text.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

namespace bookend {

using nlohmann::json;

std::string SessionScheme::to_string() const {
    return llm ? "llm-method-" + std::to_string(static_cast<int>(method)) : "lm";
}

SessionScheme SessionScheme::parse(std::string_view text) {
    if (text == "lm")
        return {};
    constexpr std::string_view prefix = "llm-method-";
    if (text.starts_with(prefix) && text.size() == prefix.size() + 1) {
        const char digit = text.back();
        if (digit >= '1' && digit <= '6')
            return {true, prompt_method_from_int(digit - '0')};
    }
    fail(ErrorCode::invalid_argument, "unknown scheme (expected lm or llm-method-1..6)", std::string(text));
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

json config_json(const SessionConfig &c) {
    return {{"n", c.n},          {"gamma", c.gamma}, {"markers", c.markers},         {"params", c.params},
            {"seed", c.seed},    {"system_prompt", c.system_prompt}, {"backend_ids", c.backend_ids}};
}

SessionConfig config_from_json(const json &j) {
    SessionConfig c;
    j.at("n").get_to(c.n);
    j.at("gamma").get_to(c.gamma);
    j.at("markers").get_to(c.markers);
    j.at("params").get_to(c.params);
    j.at("seed").get_to(c.seed);
    j.at("system_prompt").get_to(c.system_prompt);
    j.at("backend_ids").get_to(c.backend_ids);
    return c;
}

json story_scores_json(const StoryScores &s) { return s; }

LlmConfig llm_config(const SessionConfig &c) { return {c.system_prompt, c.params}; }

InfillConfig infill_config(const SessionConfig &c) { return {c.markers, c.params}; }

EndpointConfig endpoint_config(const SessionConfig &c) { return {c.markers, c.params}; }

std::vector<Sentence> current_sentences(const Session &session, const Attempt &attempt) {
    if (attempt.final_story)
        return attempt.final_story->sentences();
    if (!attempt.stop)
        return {session.start};
    return InfillState::replay(session.start, *attempt.stop, session.config.n, attempt.trace).sentences();
}

void finish_if_complete(const Session &session, Attempt &attempt) {
    if (session.scheme.llm || !attempt.stop || attempt.final_story)
        return;
    if (attempt.trace.size() + 2 == session.config.n)
        attempt.final_story =
            InfillState::replay(session.start, *attempt.stop, session.config.n, attempt.trace).story();
}

void append_all(std::vector<std::string> &to, const json &event, const char *key) {
    if (auto it = event.find(key); it != event.end())
        for (const auto &w : *it)
            to.push_back(w.get<std::string>());
}

std::vector<ChatTurn> turns_of(const json &event) {
    if (auto it = event.find("turns"); it != event.end())
        return it->get<std::vector<ChatTurn>>();
    return {};
}

Attempt &attempt_at(Session &session, const json &event) {
    const auto index = event.at("attempt").get<std::size_t>();
    if (index >= session.attempts.size())
        fail(ErrorCode::parse, "event refers to a missing attempt", std::to_string(index));
    return session.attempts[index];
}

// The single place where events change state, shared by live calls and replay.
void apply_event(std::optional<Session> &state, const json &event) {
    const auto type = event.at("type").get<std::string>();
    const auto at = event.at("at").get<std::string>();
    if (type == "created") {
        if (state)
            fail(ErrorCode::parse, "duplicate created event");
        state = Session{event.at("id").get<std::string>(),
                        Sentence(event.at("start").get<std::string>()),
                        SessionScheme::parse(event.at("scheme").get<std::string>()),
                        config_from_json(event.at("config")),
                        at,
                        at,
                        {}};
        return;
    }
    if (!state)
        fail(ErrorCode::parse, "event before created", type);
    Session &session = *state;
    session.updated_at = at;
    if (type == "attempt") {
        Attempt attempt;
        attempt.index = session.attempts.size();
        attempt.phrase_list = event.at("phrase_list").get<PhraseList>();
        attempt.phrase_list_source = parse_phrase_list_source(event.at("source").get<std::string>());
        attempt.turns = turns_of(event);
        append_all(attempt.warnings, event, "warnings");
        session.attempts.push_back(std::move(attempt));
    } else if (type == "stop") {
        Attempt &attempt = attempt_at(session, event);
        attempt.stop = Sentence(event.at("stop").get<std::string>());
        for (auto &turn : turns_of(event))
            attempt.turns.push_back(std::move(turn));
        append_all(attempt.warnings, event, "warnings");
        finish_if_complete(session, attempt);
    } else if (type == "step") {
        Attempt &attempt = attempt_at(session, event);
        attempt.trace.push_back(event.at("entry").get<TraceEntry>());
        finish_if_complete(session, attempt);
    } else if (type == "llm_infill") {
        Attempt &attempt = attempt_at(session, event);
        std::vector<Sentence> sentences{session.start};
        for (const auto &m : event.at("middles"))
            sentences.emplace_back(m.get<std::string>());
        sentences.push_back(*attempt.stop);
        attempt.final_story = Story(std::move(sentences));
        for (auto &turn : turns_of(event))
            attempt.turns.push_back(std::move(turn));
    } else if (type == "scored") {
        Attempt &attempt = attempt_at(session, event);
        attempt.scores = event.at("scores").get<StoryScores>();
    } else {
        fail(ErrorCode::parse, "unknown event type", type);
    }
}

} // namespace

json to_json(const Attempt &attempt, const Session &session) {
    json j = {{"index", attempt.index},
              {"phrase_list", attempt.phrase_list},
              {"phrase_list_source", to_string(attempt.phrase_list_source)},
              {"stop", attempt.stop ? json(attempt.stop->text()) : json(nullptr)},
              {"infill_trace", attempt.trace},
              {"sentences", nullptr},
              {"complete", attempt.final_story.has_value()},
              {"final_story", attempt.final_story},
              {"scores", attempt.scores ? story_scores_json(*attempt.scores) : json(nullptr)},
              {"turns", attempt.turns},
              {"warnings", attempt.warnings}};
    json sentences = json::array();
    for (const auto &s : current_sentences(session, attempt))
        sentences.push_back(s.text());
    j["sentences"] = std::move(sentences);
    return j;
}

json to_json(const Session &session) {
    json attempts = json::array();
    for (const auto &a : session.attempts)
        attempts.push_back(to_json(a, session));
    return {{"id", session.id},
            {"start", session.start.text()},
            {"scheme", session.scheme.to_string()},
            {"config", config_json(session.config)},
            {"created_at", session.created_at},
            {"updated_at", session.updated_at},
            {"attempts", std::move(attempts)}};
}

SessionStore::SessionStore(std::filesystem::path data_dir, BackendSuite backends,
                           std::shared_ptr<SyntaxParser> syntax, Clock clock)
    : data_dir_(std::move(data_dir)), backends_(std::move(backends)), syntax_(std::move(syntax)),
      clock_(clock ? std::move(clock) : Clock(utc_timestamp)) {
    backends_concurrent_ = backends_.concurrency_safe() && syntax_->concurrency_safe();
    std::error_code ec;
    std::filesystem::create_directories(data_dir_, ec);
    if (ec)
        fail(ErrorCode::io, "cannot create data directory", data_dir_.string() + ": " + ec.message());
    for (const auto &file : std::filesystem::directory_iterator(data_dir_)) {
        if (file.path().extension() != ".jsonl")
            continue;
        auto entry = std::make_shared<Entry>(replay(file.path()));
        const auto &id = entry->session.id;
        if (id.size() > 1 && id[0] == 's') {
            try {
                next_id_ = std::max<std::size_t>(next_id_, std::stoull(id.substr(1)) + 1);
            } catch (const std::logic_error &) {
            }
        }
        sessions_.emplace(id, std::move(entry));
    }
}

std::filesystem::path SessionStore::log_path(const std::string &id) const { return data_dir_ / (id + ".jsonl"); }

Session SessionStore::replay(const std::filesystem::path &log_file) {
    std::ifstream in(log_file);
    if (!in)
        fail(ErrorCode::io, "cannot open session log", log_file.string());
    std::optional<Session> state;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        try {
            apply_event(state, json::parse(line));
        } catch (const json::exception &e) {
            fail(ErrorCode::parse, "corrupt session log", log_file.string() + " line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error &e) {
            fail(ErrorCode::parse, "corrupt session log: " + std::string(e.what()),
                 log_file.string() + " line " + std::to_string(line_no) + ": " + e.detail());
        }
    }
    if (!state)
        fail(ErrorCode::parse, "empty session log", log_file.string());
    return std::move(*state);
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string &id) const {
    std::lock_guard lock(store_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end())
        fail(ErrorCode::not_found, "no such session", id);
    return it->second;
}

void SessionStore::append(Entry &entry, json event) {
    event["at"] = clock_();
    std::optional<Session> state = entry.session;
    apply_event(state, event);
    std::ofstream out(log_path(state->id), std::ios::app | std::ios::binary);
    out << event.dump() << '\n';
    out.flush();
    if (!out)
        fail(ErrorCode::io, "cannot write session log", log_path(state->id).string());
    entry.session = std::move(*state);
}

template <typename F> auto SessionStore::with_backends(F &&f) -> decltype(f()) {
    if (backends_concurrent_)
        return f();
    std::lock_guard lock(backend_mutex_);
    return f();
}

Attempt &SessionStore::attempt_of(Session &session, std::size_t index) {
    if (index >= session.attempts.size())
        fail(ErrorCode::not_found, "no such attempt",
             session.id + " has " + std::to_string(session.attempts.size()) + " attempts");
    return session.attempts[index];
}

Session SessionStore::create_session(const std::string &start_text, const SessionScheme &scheme,
                                     SessionConfig config) {
    const auto pieces = split_sentences(start_text);
    if (pieces.size() != 1)
        fail(ErrorCode::invalid_argument, "start must be exactly one sentence",
             "found " + std::to_string(pieces.size()));
    const Sentence start(pieces.front());
    if (config.n < 2)
        fail(ErrorCode::invalid_argument, "story length n must be at least 2");
    if (!(config.gamma > 0.0 && config.gamma < 1.0))
        fail(ErrorCode::invalid_argument, "gamma must lie strictly between 0 and 1");
    config.params.validate();
    if (!config.params.seed)
        config.params.seed = config.seed;
    auto id_of = [](const auto &handle) { return handle ? handle->id() : std::string("none"); };
    config.backend_ids = {{"phrase_generator", id_of(backends_.phrase_generator)},
                          {"stop_generator", id_of(backends_.stop_generator)},
                          {"infill_generator", id_of(backends_.infill_generator)},
                          {"chat", id_of(backends_.chat)},
                          {"token_embedder", id_of(backends_.token_embedder)},
                          {"sentence_embedder", id_of(backends_.sentence_embedder)},
                          {"position_scorer", id_of(backends_.position_scorer)},
                          {"syntax_parser", id_of(syntax_)}};

    // Backend work happens before the session is registered.
    Diagnostics diag;
    PhraseList phrase_list;
    std::vector<ChatTurn> turns;
    try {
        if (!scheme.llm) {
            phrase_list = with_backends([&] {
                return generate_phrase_list(start, *backends_.phrase_generator, endpoint_config(config), &diag);
            });
        } else if (scheme.method == PromptMethod::phrase_list) {
            const auto prompt = endpoint_prompt(scheme.method, 1, start);
            const auto reply =
                with_backends([&] { return backends_.chat->chat(config.system_prompt, prompt, config.params); });
            turns.push_back({config.system_prompt, prompt, reply});
            phrase_list = parse_llm_phrase_list(reply);
        }
    } catch (const Error &e) {
        if (e.code() == ErrorCode::invalid_argument)
            throw;
        diag.warn(std::string("phrase list generation failed: ") + e.what());
        phrase_list = PhraseList();
    }

    std::string id;
    {
        std::lock_guard lock(store_mutex_);
        do {
            char buf[32];
            std::snprintf(buf, sizeof buf, "s%06zu", next_id_++);
            id = buf;
        } while (sessions_.count(id) || std::filesystem::exists(log_path(id)));
    }
    const json created = {{"type", "created"},           {"id", id},
                          {"start", start.text()},       {"scheme", scheme.to_string()},
                          {"config", config_json(config)}, {"at", clock_()}};
    std::optional<Session> state;
    apply_event(state, created);
    auto entry = std::make_shared<Entry>(std::move(*state));
    std::lock_guard entry_lock(entry->mutex);
    {
        std::ofstream out(log_path(id), std::ios::binary);
        out << created.dump() << '\n';
        if (!out)
            fail(ErrorCode::io, "cannot write session log", log_path(id).string());
    }
    append(*entry, {{"type", "attempt"},
                    {"phrase_list", phrase_list},
                    {"source", to_string(PhraseListSource::generated)},
                    {"turns", turns},
                    {"warnings", diag.warnings}});
    {
        std::lock_guard lock(store_mutex_);
        sessions_.emplace(id, entry);
    }
    return entry->session;
}

Session SessionStore::get(const std::string &id) const {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    return entry->session;
}

std::vector<std::string> SessionStore::ids() const {
    std::lock_guard lock(store_mutex_);
    std::vector<std::string> out;
    for (const auto &[id, entry] : sessions_)
        out.push_back(id);
    return out;
}

Attempt SessionStore::edit_phrase_list(const std::string &id, const std::vector<std::string> &tokens) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    Diagnostics diag;
    const PhraseList phrase_list(tokens, &diag);
    append(*entry, {{"type", "attempt"},
                    {"phrase_list", phrase_list},
                    {"source", to_string(PhraseListSource::user_edited)},
                    {"warnings", diag.warnings}});
    return entry->session.attempts.back();
}

Attempt SessionStore::generate_stop_for(const std::string &id, std::size_t index) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    Session &session = entry->session;
    const Attempt &attempt = attempt_of(session, index);
    if (attempt.stop)
        fail(ErrorCode::conflict, "attempt already has a stop; edit the phrase list to start a new attempt",
             id + "/" + std::to_string(index));
    json event = {{"type", "stop"}, {"attempt", index}};
    if (!session.scheme.llm) {
        const auto stop = with_backends([&] {
            return generate_stop(session.start, attempt.phrase_list, *backends_.stop_generator,
                                 endpoint_config(session.config));
        });
        event["stop"] = stop.text();
    } else {
        std::optional<PhraseList> override_list;
        if (session.scheme.method == PromptMethod::phrase_list)
            override_list = attempt.phrase_list;
        const auto result = with_backends([&] {
            return generate_stop_llm(session.scheme.method, session.start, *backends_.chat,
                                     llm_config(session.config), override_list);
        });
        event["stop"] = result.stop.text();
        event["turns"] = result.turns;
    }
    append(*entry, std::move(event));
    return entry->session.attempts[index];
}

StepResult SessionStore::infill_step(const std::string &id, std::size_t index) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    Session &session = entry->session;
    const Attempt &attempt = attempt_of(session, index);
    if (session.scheme.llm)
        fail(ErrorCode::invalid_argument, "stepwise infilling needs the lm scheme; use infill-complete",
             session.scheme.to_string());
    if (!attempt.stop)
        fail(ErrorCode::conflict, "attempt has no stop yet", id + "/" + std::to_string(index));
    if (attempt.final_story)
        fail(ErrorCode::conflict, "story is already complete", id + "/" + std::to_string(index));
    auto state = InfillState::replay(session.start, *attempt.stop, session.config.n, attempt.trace);
    const auto step = with_backends([&] {
        return bookend::infill_step(state, *backends_.position_scorer, *backends_.infill_generator,
                                    infill_config(session.config));
    });
    append(*entry, {{"type", "step"}, {"attempt", index}, {"entry", step}});
    return {step, state.sentences(), state.complete()};
}

Story SessionStore::infill_complete(const std::string &id, std::size_t index) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    Session &session = entry->session;
    {
        const Attempt &attempt = attempt_of(session, index);
        if (!attempt.stop)
            fail(ErrorCode::conflict, "attempt has no stop yet", id + "/" + std::to_string(index));
        if (attempt.final_story)
            fail(ErrorCode::conflict, "story is already complete", id + "/" + std::to_string(index));
    }
    if (session.scheme.llm) {
        const Attempt &attempt = session.attempts[index];
        const auto result = with_backends([&] {
            return infill_all_llm(session.start, *attempt.stop, session.config.n - 2, *backends_.chat,
                                  llm_config(session.config));
        });
        json middles = json::array();
        for (const auto &m : result.middles)
            middles.push_back(m.text());
        append(*entry, {{"type", "llm_infill"}, {"attempt", index}, {"middles", middles}, {"turns", result.turns}});
    } else {
        // Same iterations as repeated infill_step calls, each persisted as it lands.
        while (!session.attempts[index].final_story) {
            const Attempt &attempt = session.attempts[index];
            auto state = InfillState::replay(session.start, *attempt.stop, session.config.n, attempt.trace);
            const auto step = with_backends([&] {
                return bookend::infill_step(state, *backends_.position_scorer, *backends_.infill_generator,
                                            infill_config(session.config));
            });
            append(*entry, {{"type", "step"}, {"attempt", index}, {"entry", step}});
        }
    }
    return *entry->session.attempts[index].final_story;
}

StoryScores SessionStore::score_attempt(const std::string &id, std::size_t index) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    Session &session = entry->session;
    const Attempt &attempt = attempt_of(session, index);
    if (!attempt.final_story)
        fail(ErrorCode::conflict, "attempt is not finished", id + "/" + std::to_string(index));
    const auto report = with_backends([&] {
        return evaluate_corpus({*attempt.final_story}, nullptr, *backends_.sentence_embedder, *syntax_);
    });
    append(*entry, {{"type", "scored"}, {"attempt", index}, {"scores", report.per_story.front()}});
    return *entry->session.attempts[index].scores;
}

} // namespace bookend
