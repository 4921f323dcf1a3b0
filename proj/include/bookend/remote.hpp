#pragma once

#include "bookend/backends.hpp"
#include "bookend/syntax.hpp"

#include <chrono>
#include <memory>
#include <string>

namespace bookend {

// JSON-over-HTTP adapters for model servers. Every contract is one POST:
//
//   /generate        {"prompt", "params"}            -> {"text"}
//   /chat            {"system", "user", "params"}    -> {"text"}
//   /embed_tokens    {"sentence"}                    -> {"embeddings": [{"token", "vector"}]}
//   /embed_sentence  {"sentence"}                    -> {"vector"}
//   /score_position  {"text", "mask"}                -> {"probability"}
//   /parse           {"sentence"}                    -> {"tree": "(S (NP ...))"}
//
// paths are appended to the base URL ("http://host:port/prefix"). Connection
// failures, non-2xx answers and malformed bodies raise ErrorCode::transport.

struct RemoteOptions {
    std::chrono::milliseconds timeout{60000};
};

class RemoteTextGenerator final : public TextGenerator {
  public:
    explicit RemoteTextGenerator(std::string base_url, RemoteOptions options = {});
    std::string id() const override { return "http:" + base_url_; }
    bool concurrency_safe() const override { return true; }

  protected:
    std::string do_generate(const GenerationRequest &request) override;

  private:
    std::string base_url_;
    RemoteOptions options_;
};

class RemoteChatGenerator final : public ChatGenerator {
  public:
    explicit RemoteChatGenerator(std::string base_url, RemoteOptions options = {});
    std::string id() const override { return "http:" + base_url_; }
    bool concurrency_safe() const override { return true; }

  protected:
    std::string do_chat(const std::string &system, const std::string &user,
                        const GenerationParams &params) override;

  private:
    std::string base_url_;
    RemoteOptions options_;
};

class RemoteTokenEmbedder final : public TokenEmbedder {
  public:
    explicit RemoteTokenEmbedder(std::string base_url, RemoteOptions options = {});
    std::string id() const override { return "http:" + base_url_; }
    bool concurrency_safe() const override { return true; }

  protected:
    std::vector<TokenEmbedding> do_embed_tokens(const Sentence &sentence) override;

  private:
    std::string base_url_;
    RemoteOptions options_;
};

class RemoteSentenceEmbedder final : public SentenceEmbedder {
  public:
    explicit RemoteSentenceEmbedder(std::string base_url, RemoteOptions options = {});
    std::string id() const override { return "http:" + base_url_; }
    bool concurrency_safe() const override { return true; }

  protected:
    SentenceEmbedding do_embed_sentence(const Sentence &sentence) override;

  private:
    std::string base_url_;
    RemoteOptions options_;
};

class RemotePositionScorer final : public PositionScorer {
  public:
    RemotePositionScorer(std::string base_url, std::string mask_marker = "<mask>", RemoteOptions options = {});
    std::string id() const override { return "http:" + base_url_; }
    bool concurrency_safe() const override { return true; }

  protected:
    double do_score_position(const std::string &masked_story_text) override;

  private:
    std::string base_url_;
    RemoteOptions options_;
};

class RemoteSyntaxParser final : public SyntaxParser {
  public:
    explicit RemoteSyntaxParser(std::string base_url, RemoteOptions options = {});
    SyntaxTree parse(const Sentence &sentence) override;
    std::string id() const override { return "http:" + base_url_; }
    bool concurrency_safe() const override { return true; }

  private:
    std::string base_url_;
    RemoteOptions options_;
};

/// Which implementation backs each contract. A spec is either a stub name
/// or an http:// base URL:
///   generators:  "echo" (default) or URL
///   chat:        "echo" (default) or URL
///   embedders:   "hash" (default) or URL
///   scorer:      "monotone" (default), "constant[:p]", "random[:seed]" or URL
///   syntax:      "shallow" (default) or URL
struct BackendConfig {
    std::string phrase_generator = "echo";
    std::string stop_generator = "echo";
    std::string infill_generator = "echo";
    std::string chat = "echo";
    std::string token_embedder = "hash";
    std::string sentence_embedder = "hash";
    std::string position_scorer = "monotone";
    std::string syntax_parser = "shallow";
    int timeout_ms = 60000;

    friend bool operator==(const BackendConfig &, const BackendConfig &) = default;
};

BackendSuite make_backend_suite(const BackendConfig &config, const std::string &mask_marker = "<mask>");
std::shared_ptr<SyntaxParser> make_syntax_parser(const BackendConfig &config);

/// Serves a backend suite (and syntax parser) over the protocol above, on a
/// background thread. Used to test the adapters and to expose the stubs.
class BackendServer {
  public:
    BackendServer(BackendSuite suite, std::shared_ptr<SyntaxParser> parser);
    ~BackendServer();
    BackendServer(const BackendServer &) = delete;
    BackendServer &operator=(const BackendServer &) = delete;

    /// Binds to host:port (0 picks a free port) and starts serving. Returns the port.
    int start(const std::string &host = "127.0.0.1", int port = 0);
    void stop();
    std::string base_url() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace bookend
