#pragma once

#include "bookend/backends.hpp"

#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bookend {

// Deterministic backends for tests, demos and GPU-free runs. The echo, hash
// and scorer stubs are pure functions of their inputs (and seed) and declare
// themselves safe for concurrent use; the scripted ones hold state and do not.

/// Builds a short sentence out of words drawn from the prompt, chosen by a
/// stable hash of (prompt, seed). Angle-bracket markers such as <mask> are
/// ignored when collecting words.
class EchoGenerator final : public TextGenerator {
  public:
    std::string id() const override { return "echo"; }
    bool concurrency_safe() const override { return true; }

  protected:
    std::string do_generate(const GenerationRequest &request) override;
};

/// Echo stub for the chat contract: every reply holds `sentences_per_reply`
/// echo sentences built from the user prompt.
class EchoChatGenerator final : public ChatGenerator {
  public:
    explicit EchoChatGenerator(int sentences_per_reply = 30) : sentences_per_reply_(sentences_per_reply) {}
    std::string id() const override { return "echo-chat"; }
    bool concurrency_safe() const override { return true; }

  protected:
    std::string do_chat(const std::string &system, const std::string &user,
                        const GenerationParams &params) override;

  private:
    int sentences_per_reply_;
};

/// The echo sentence for (text, seed, salt); shared by both echo stubs.
std::string echo_sentence(const std::string &text, std::uint64_t seed, std::uint64_t salt);

/// Answers from a prompt -> completion table; unknown prompts are an
/// invalid_argument error ("unscripted prompt").
class ScriptedTextGenerator final : public TextGenerator {
  public:
    ScriptedTextGenerator() = default;
    explicit ScriptedTextGenerator(std::unordered_map<std::string, std::string> script)
        : script_(std::move(script)) {}

    void add(std::string prompt, std::string completion) {
        script_.insert_or_assign(std::move(prompt), std::move(completion));
    }
    std::string id() const override { return "scripted"; }

  protected:
    std::string do_generate(const GenerationRequest &request) override;

  private:
    std::unordered_map<std::string, std::string> script_;
};

/// Hands out canned completions in order, whatever the prompt.
class QueueTextGenerator final : public TextGenerator {
  public:
    explicit QueueTextGenerator(std::vector<std::string> completions)
        : queue_(completions.begin(), completions.end()) {}
    std::string id() const override { return "queue"; }

  protected:
    std::string do_generate(const GenerationRequest &request) override;

  private:
    std::deque<std::string> queue_;
};

/// Forwards to another generator and keeps every request it saw.
class RecordingTextGenerator final : public TextGenerator {
  public:
    explicit RecordingTextGenerator(std::shared_ptr<TextGenerator> inner) : inner_(std::move(inner)) {}

    std::vector<GenerationRequest> requests() const;
    std::string id() const override { return "recording(" + inner_->id() + ")"; }

  protected:
    std::string do_generate(const GenerationRequest &request) override;

  private:
    std::shared_ptr<TextGenerator> inner_;
    mutable std::mutex mutex_;
    std::vector<GenerationRequest> requests_;
};

struct ChatTurn {
    std::string system;
    std::string user;
    std::string response;
    friend bool operator==(const ChatTurn &, const ChatTurn &) = default;
};

/// Answers from a (system, user) -> reply table and logs every call, so a
/// stored transcript can be replayed through it.
class ScriptedChatGenerator final : public ChatGenerator {
  public:
    ScriptedChatGenerator() = default;
    explicit ScriptedChatGenerator(const std::vector<ChatTurn> &transcript);

    void add(std::string system, std::string user, std::string response);
    std::vector<ChatTurn> log() const;
    std::string id() const override { return "scripted-chat"; }

  protected:
    std::string do_chat(const std::string &system, const std::string &user,
                        const GenerationParams &params) override;

  private:
    std::map<std::pair<std::string, std::string>, std::string> script_;
    mutable std::mutex mutex_;
    std::vector<ChatTurn> log_;
};

/// One-hot vector at stable_hash(token) mod dimension, so cosine is 1 for
/// equal tokens and 0 otherwise (barring hash collisions in the vocabulary).
class HashTokenEmbedder final : public TokenEmbedder {
  public:
    explicit HashTokenEmbedder(std::size_t dimension = 4096) : dimension_(dimension) {}
    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t bucket(const std::string &token) const;
    std::string id() const override { return "hash-token-" + std::to_string(dimension_); }
    bool concurrency_safe() const override { return true; }

  protected:
    std::vector<TokenEmbedding> do_embed_tokens(const Sentence &sentence) override;

  private:
    std::size_t dimension_;
};

/// Mean of the hash one-hots of a sentence's tokens.
class HashSentenceEmbedder final : public SentenceEmbedder {
  public:
    explicit HashSentenceEmbedder(std::size_t dimension = 4096) : tokens_(dimension) {}
    std::string id() const override { return "hash-sentence-" + std::to_string(tokens_.dimension()); }
    bool concurrency_safe() const override { return true; }

  protected:
    SentenceEmbedding do_embed_sentence(const Sentence &sentence) override;

  private:
    HashTokenEmbedder tokens_;
};

/// Index of the mask in a masked story text: how many sentences precede it.
std::size_t mask_index(const std::string &masked_story_text, const std::string &mask_marker);

/// Scores keyed by mask index. Unscripted indices fall back to
/// `fallback` when set and are an error otherwise.
class ScriptedScorer final : public PositionScorer {
  public:
    explicit ScriptedScorer(std::map<std::size_t, double> by_index,
                            std::optional<double> fallback = std::nullopt,
                            std::string mask_marker = "<mask>")
        : PositionScorer(std::move(mask_marker)), by_index_(std::move(by_index)), fallback_(fallback) {}
    std::string id() const override { return "scripted-scorer"; }
    bool concurrency_safe() const override { return true; }

  protected:
    double do_score_position(const std::string &masked_story_text) override;

  private:
    std::map<std::size_t, double> by_index_;
    std::optional<double> fallback_;
};

/// index / max(10, sentence count): strictly increasing in the mask index, so
/// the last gap always wins.
class MonotoneScorer final : public PositionScorer {
  public:
    using PositionScorer::PositionScorer;
    std::string id() const override { return "monotone-scorer"; }
    bool concurrency_safe() const override { return true; }

  protected:
    double do_score_position(const std::string &masked_story_text) override;
};

class ConstantScorer final : public PositionScorer {
  public:
    explicit ConstantScorer(double probability = 0.5, std::string mask_marker = "<mask>")
        : PositionScorer(std::move(mask_marker)), probability_(probability) {}
    std::string id() const override { return "constant-scorer"; }
    bool concurrency_safe() const override { return true; }

  protected:
    double do_score_position(const std::string &) override { return probability_; }

  private:
    double probability_;
};

/// Hash-derived pseudo-random probabilities. Stands in for a missing
/// position classifier (insert at a random gap).
class RandomScorer final : public PositionScorer {
  public:
    explicit RandomScorer(std::uint64_t seed, std::string mask_marker = "<mask>")
        : PositionScorer(std::move(mask_marker)), seed_(seed) {}
    std::string id() const override { return "random-scorer"; }
    bool concurrency_safe() const override { return true; }

  protected:
    double do_score_position(const std::string &masked_story_text) override;

  private:
    std::uint64_t seed_;
};

/// Echo generators, echo chat, hash embedders and the monotone scorer.
BackendSuite make_stub_suite(const std::string &mask_marker = "<mask>");

} // namespace bookend
