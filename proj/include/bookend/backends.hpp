#pragma once

#include "bookend/corpus.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bookend {

/// Decoding parameters shared by text and chat generation. Greedy decoding
/// (temperature 0) is the default.
struct GenerationParams {
    int max_new_tokens = 64;
    double temperature = 0.0;
    std::vector<std::string> stop_markers;
    std::optional<std::uint64_t> seed;

    void validate() const;
    friend bool operator==(const GenerationParams &, const GenerationParams &) = default;
};

struct GenerationRequest {
    std::string prompt;
    GenerationParams params;
};

/// Cuts `text` at the earliest occurrence of any stop marker.
std::string truncate_at_stop_markers(std::string_view text, const std::vector<std::string> &markers);

// The five model contracts. Each public entry point validates its inputs and
// the backend's answer, so plugins only implement the protected hook.
// Invalid requests raise ErrorCode::invalid_argument; unreachable backends
// raise ErrorCode::transport.

class TextGenerator {
  public:
    virtual ~TextGenerator() = default;

    /// Completion text only, truncated at the first stop marker.
    std::string generate(const GenerationRequest &request);

    virtual std::string id() const = 0;
    virtual bool concurrency_safe() const { return false; }

  protected:
    virtual std::string do_generate(const GenerationRequest &request) = 0;
};

class ChatGenerator {
  public:
    virtual ~ChatGenerator() = default;

    std::string chat(const std::string &system, const std::string &user,
                     const GenerationParams &params);

    virtual std::string id() const = 0;
    virtual bool concurrency_safe() const { return false; }

  protected:
    virtual std::string do_chat(const std::string &system, const std::string &user,
                                const GenerationParams &params) = 0;
};

struct TokenEmbedding {
    std::string token;
    std::vector<double> vector;
};

struct SentenceEmbedding {
    std::vector<double> vector;
};

class TokenEmbedder {
  public:
    virtual ~TokenEmbedder() = default;

    /// One embedding per token of `sentence`, in token order, all of one
    /// dimension and finite.
    std::vector<TokenEmbedding> embed_tokens(const Sentence &sentence);

    virtual std::string id() const = 0;
    virtual bool concurrency_safe() const { return false; }

  protected:
    virtual std::vector<TokenEmbedding> do_embed_tokens(const Sentence &sentence) = 0;
};

class SentenceEmbedder {
  public:
    virtual ~SentenceEmbedder() = default;

    SentenceEmbedding embed_sentence(const Sentence &sentence);

    virtual std::string id() const = 0;
    virtual bool concurrency_safe() const { return false; }

  protected:
    virtual SentenceEmbedding do_embed_sentence(const Sentence &sentence) = 0;
};

/// Probability that a sentence is missing where the mask marker sits.
class PositionScorer {
  public:
    explicit PositionScorer(std::string mask_marker = "<mask>") : mask_marker_(std::move(mask_marker)) {}
    virtual ~PositionScorer() = default;

    /// Requires exactly one mask marker in `masked_story_text`; the answer is
    /// checked to lie in [0, 1].
    double score_position(const std::string &masked_story_text);

    const std::string &mask_marker() const noexcept { return mask_marker_; }
    virtual std::string id() const = 0;
    virtual bool concurrency_safe() const { return false; }

  protected:
    virtual double do_score_position(const std::string &masked_story_text) = 0;

  private:
    std::string mask_marker_;
};

/// The handles a pipeline run needs. The phrase, stop and infill generators
/// may all point at one model.
struct BackendSuite {
    std::shared_ptr<TextGenerator> phrase_generator;
    std::shared_ptr<TextGenerator> stop_generator;
    std::shared_ptr<TextGenerator> infill_generator;
    std::shared_ptr<ChatGenerator> chat;
    std::shared_ptr<TokenEmbedder> token_embedder;
    std::shared_ptr<SentenceEmbedder> sentence_embedder;
    std::shared_ptr<PositionScorer> position_scorer;

    /// True when every populated handle declares concurrent calls safe.
    bool concurrency_safe() const;
};

double cosine(const std::vector<double> &a, const std::vector<double> &b);

} // namespace bookend
