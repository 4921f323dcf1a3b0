#include "bookend/backends.hpp"
#include "bookend/error.hpp"
#include "bookend/text.hpp"

#include <cmath>

namespace bookend {

void GenerationParams::validate() const {
    if (max_new_tokens < 1)
        fail(ErrorCode::invalid_argument, "max_new_tokens must be at least 1");
    if (!(temperature >= 0.0) || !std::isfinite(temperature))
        fail(ErrorCode::invalid_argument, "temperature must be a non-negative number");
}

std::string truncate_at_stop_markers(std::string_view text, const std::vector<std::string> &markers) {
    std::size_t cut = text.size();
    for (const auto &m : markers) {
        if (m.empty())
            continue;
        if (auto pos = text.find(m); pos != std::string_view::npos && pos < cut)
            cut = pos;
    }
    return std::string(text.substr(0, cut));
}

std::string TextGenerator::generate(const GenerationRequest &request) {
    request.params.validate();
    return truncate_at_stop_markers(do_generate(request), request.params.stop_markers);
}

std::string ChatGenerator::chat(const std::string &system, const std::string &user,
                                const GenerationParams &params) {
    params.validate();
    return truncate_at_stop_markers(do_chat(system, user, params), params.stop_markers);
}

namespace {

void check_finite(const std::vector<double> &v, const std::string &who) {
    for (double x : v)
        if (!std::isfinite(x))
            fail(ErrorCode::generation_failed, who + " returned a non-finite embedding");
}

} // namespace

std::vector<TokenEmbedding> TokenEmbedder::embed_tokens(const Sentence &sentence) {
    auto out = do_embed_tokens(sentence);
    if (out.size() != sentence.tokens().size())
        fail(ErrorCode::generation_failed, "token embedder returned the wrong number of embeddings",
             "expected " + std::to_string(sentence.tokens().size()) + ", got " +
                 std::to_string(out.size()));
    for (const auto &e : out) {
        if (e.vector.size() != out.front().vector.size())
            fail(ErrorCode::generation_failed, "token embeddings disagree on dimension");
        check_finite(e.vector, id());
    }
    return out;
}

SentenceEmbedding SentenceEmbedder::embed_sentence(const Sentence &sentence) {
    auto out = do_embed_sentence(sentence);
    if (out.vector.empty())
        fail(ErrorCode::generation_failed, "sentence embedder returned an empty vector");
    check_finite(out.vector, id());
    return out;
}

double PositionScorer::score_position(const std::string &masked_story_text) {
    const auto markers = count_occurrences(masked_story_text, mask_marker_);
    if (markers != 1)
        fail(ErrorCode::invalid_argument,
             "masked story text must contain exactly one mask marker",
             "found " + std::to_string(markers) + " occurrences of " + mask_marker_);
    const double p = do_score_position(masked_story_text);
    if (!(p >= 0.0 && p <= 1.0))
        fail(ErrorCode::generation_failed, "position scorer returned a value outside [0, 1]",
             std::to_string(p));
    return p;
}

bool BackendSuite::concurrency_safe() const {
    auto ok = [](const auto &handle) { return !handle || handle->concurrency_safe(); };
    return ok(phrase_generator) && ok(stop_generator) && ok(infill_generator) && ok(chat) &&
           ok(token_embedder) && ok(sentence_embedder) && ok(position_scorer);
}

double cosine(const std::vector<double> &a, const std::vector<double> &b) {
    if (a.size() != b.size())
        fail(ErrorCode::invalid_argument, "cosine of vectors with different dimensions");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0)
        return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace bookend
