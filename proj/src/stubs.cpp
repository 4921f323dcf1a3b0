#include "bookend/stubs.hpp"
#include "bookend/error.hpp"
#include "bookend/text.hpp"

#include <algorithm>
#include <cctype>

namespace bookend {

namespace {

std::string strip_markers(const std::string &text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '<') {
            auto close = text.find('>', i);
            if (close != std::string::npos && text.find_first_of(" \t\n", i) > close) {
                i = close;
                out += ' ';
                continue;
            }
        }
        out += text[i];
    }
    return out;
}

std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

} // namespace

std::string echo_sentence(const std::string &text, std::uint64_t seed, std::uint64_t salt) {
    const auto words = tokenize(strip_markers(text));
    if (words.empty())
        return "Echo.";
    std::uint64_t h = mix(stable_hash(text, seed) + salt);
    const std::size_t length = 4 + h % 5;
    std::string out;
    for (std::size_t i = 0; i < length; ++i) {
        h = mix(h + i + 1);
        if (!out.empty())
            out += ' ';
        out += words[h % words.size()];
    }
    out.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(out.front())));
    out += '.';
    return out;
}

std::string EchoGenerator::do_generate(const GenerationRequest &request) {
    return echo_sentence(request.prompt, request.params.seed.value_or(0), 0);
}

std::string EchoChatGenerator::do_chat(const std::string &, const std::string &user,
                                       const GenerationParams &params) {
    std::string out;
    for (int i = 0; i < sentences_per_reply_; ++i) {
        if (i > 0)
            out += ' ';
        out += echo_sentence(user, params.seed.value_or(0), static_cast<std::uint64_t>(i));
    }
    return out;
}

std::string ScriptedTextGenerator::do_generate(const GenerationRequest &request) {
    auto it = script_.find(request.prompt);
    if (it == script_.end())
        fail(ErrorCode::invalid_argument, "unscripted prompt", request.prompt);
    return it->second;
}

std::string QueueTextGenerator::do_generate(const GenerationRequest &request) {
    if (queue_.empty())
        fail(ErrorCode::invalid_argument, "scripted completions exhausted", request.prompt);
    std::string next = std::move(queue_.front());
    queue_.pop_front();
    return next;
}

std::vector<GenerationRequest> RecordingTextGenerator::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

std::string RecordingTextGenerator::do_generate(const GenerationRequest &request) {
    {
        std::lock_guard lock(mutex_);
        requests_.push_back(request);
    }
    return inner_->generate(request);
}

ScriptedChatGenerator::ScriptedChatGenerator(const std::vector<ChatTurn> &transcript) {
    for (const auto &turn : transcript)
        add(turn.system, turn.user, turn.response);
}

void ScriptedChatGenerator::add(std::string system, std::string user, std::string response) {
    script_.insert_or_assign({std::move(system), std::move(user)}, std::move(response));
}

std::vector<ChatTurn> ScriptedChatGenerator::log() const {
    std::lock_guard lock(mutex_);
    return log_;
}

std::string ScriptedChatGenerator::do_chat(const std::string &system, const std::string &user,
                                           const GenerationParams &) {
    auto it = script_.find({system, user});
    if (it == script_.end())
        fail(ErrorCode::invalid_argument, "unscripted prompt", user);
    std::lock_guard lock(mutex_);
    log_.push_back({system, user, it->second});
    return it->second;
}

std::size_t HashTokenEmbedder::bucket(const std::string &token) const {
    return stable_hash(token) % dimension_;
}

std::vector<TokenEmbedding> HashTokenEmbedder::do_embed_tokens(const Sentence &sentence) {
    std::vector<TokenEmbedding> out;
    out.reserve(sentence.tokens().size());
    for (const auto &token : sentence.tokens()) {
        TokenEmbedding e{token, std::vector<double>(dimension_, 0.0)};
        e.vector[bucket(token)] = 1.0;
        out.push_back(std::move(e));
    }
    return out;
}

SentenceEmbedding HashSentenceEmbedder::do_embed_sentence(const Sentence &sentence) {
    SentenceEmbedding out{std::vector<double>(tokens_.dimension(), 0.0)};
    const double weight = 1.0 / static_cast<double>(sentence.tokens().size());
    for (const auto &token : sentence.tokens())
        out.vector[tokens_.bucket(token)] += weight;
    return out;
}

std::size_t mask_index(const std::string &masked_story_text, const std::string &mask_marker) {
    auto pos = masked_story_text.find(mask_marker);
    if (pos == std::string::npos)
        fail(ErrorCode::invalid_argument, "text has no mask marker");
    return split_sentences(std::string_view(masked_story_text).substr(0, pos)).size();
}

double ScriptedScorer::do_score_position(const std::string &masked_story_text) {
    const auto index = mask_index(masked_story_text, mask_marker());
    if (auto it = by_index_.find(index); it != by_index_.end())
        return it->second;
    if (fallback_)
        return *fallback_;
    fail(ErrorCode::invalid_argument, "unscripted mask index", std::to_string(index));
}

double MonotoneScorer::do_score_position(const std::string &masked_story_text) {
    const auto index = mask_index(masked_story_text, mask_marker());
    std::string unmasked = masked_story_text;
    unmasked.erase(unmasked.find(mask_marker()), mask_marker().size());
    const auto sentences = split_sentences(unmasked).size();
    return static_cast<double>(index) / static_cast<double>(std::max<std::size_t>(10, sentences));
}

double RandomScorer::do_score_position(const std::string &masked_story_text) {
    const std::uint64_t h = mix(stable_hash(masked_story_text, seed_));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

BackendSuite make_stub_suite(const std::string &mask_marker) {
    auto echo = std::make_shared<EchoGenerator>();
    BackendSuite suite;
    suite.phrase_generator = echo;
    suite.stop_generator = echo;
    suite.infill_generator = echo;
    suite.chat = std::make_shared<EchoChatGenerator>();
    suite.token_embedder = std::make_shared<HashTokenEmbedder>();
    suite.sentence_embedder = std::make_shared<HashSentenceEmbedder>();
    suite.position_scorer = std::make_shared<MonotoneScorer>(mask_marker);
    return suite;
}

} // namespace bookend
