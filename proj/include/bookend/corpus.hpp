#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bookend {

/// One sentence of prose with its cached word tokens.
///
/// The text is trimmed on construction and must contain at least one word
/// token under `tokenize`; otherwise construction throws
/// `Error(ErrorCode::invalid_argument)`.
class Sentence {
  public:
    explicit Sentence(std::string_view text);

    const std::string &text() const noexcept { return text_; }
    const std::vector<std::string> &tokens() const noexcept { return tokens_; }

    friend bool operator==(const Sentence &a, const Sentence &b) { return a.text_ == b.text_; }

  private:
    std::string text_;
    std::vector<std::string> tokens_;
};

/// An ordered story of at least two sentences. The first sentence is the
/// start and the last the stop.
class Story {
  public:
    explicit Story(std::vector<Sentence> sentences, std::optional<std::string> id = std::nullopt,
                   std::optional<std::string> title = std::nullopt);

    const std::vector<Sentence> &sentences() const noexcept { return sentences_; }
    std::size_t size() const noexcept { return sentences_.size(); }
    const Sentence &start() const noexcept { return sentences_.front(); }
    const Sentence &stop() const noexcept { return sentences_.back(); }
    const std::optional<std::string> &id() const noexcept { return id_; }
    const std::optional<std::string> &title() const noexcept { return title_; }

    /// Sentence texts joined by single spaces.
    std::string text() const;
    /// Concatenated token stream of all sentences.
    std::vector<std::string> tokens() const;

    friend bool operator==(const Story &, const Story &) = default;

  private:
    std::vector<Sentence> sentences_;
    std::optional<std::string> id_;
    std::optional<std::string> title_;
};

Story make_story(const std::vector<std::string> &sentence_texts,
                 std::optional<std::string> id = std::nullopt,
                 std::optional<std::string> title = std::nullopt);

enum class CorpusFormat { five_sentence_csv, jsonl };

CorpusFormat parse_corpus_format(std::string_view name);
std::string_view to_string(CorpusFormat format) noexcept;

struct CorpusSplit {
    std::vector<Story> train;
    std::vector<Story> validation;
    std::uint64_t seed = 0;
};

/// Parses a corpus from memory. CSV needs a header row naming
/// sentence1..sentence5 (id/storyid and title/storytitle are optional);
/// JSON-lines records are {"id", "title", "sentences": [...]}; records whose
/// "kind" is anything other than "story" are skipped so run headers can live
/// in the same file. Row numbers in errors are 1-based data rows.
std::vector<Story> parse_corpus(std::string_view content, CorpusFormat format);
std::vector<Story> load_corpus(const std::filesystem::path &path, CorpusFormat format);

std::string format_corpus(const std::vector<Story> &stories, CorpusFormat format);
void write_stories(const std::vector<Story> &stories, const std::filesystem::path &path,
                   CorpusFormat format);

/// Seeded shuffle, then floor(|stories| * ratio) stories to train (clamped so
/// both sides keep at least one story) and the remainder to validation.
CorpusSplit split_train_val(const std::vector<Story> &stories, double ratio, std::uint64_t seed);

} // namespace bookend
