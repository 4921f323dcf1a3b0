#pragma once

#include "bookend/backends.hpp"
#include "bookend/corpus.hpp"
#include "bookend/error.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bookend {

/// Marker literals shared by training samples and inference prompts.
struct Markers {
    std::string mask = "<mask>";
    std::string sep = "<sep>";
    std::string plist = "<plist>";
    std::string stop = "<stop>";
    friend bool operator==(const Markers &, const Markers &) = default;
};

/// Ordered, duplicate-free list of non-empty tokens relating a start to its stop.
class PhraseList {
  public:
    PhraseList() = default;
    /// Trims every token, drops empty ones and keeps the first occurrence of
    /// duplicates (with a warning on `diag`).
    explicit PhraseList(const std::vector<std::string> &tokens, Diagnostics *diag = nullptr);

    const std::vector<std::string> &tokens() const noexcept { return tokens_; }
    bool empty() const noexcept { return tokens_.empty(); }
    std::size_t size() const noexcept { return tokens_.size(); }
    /// "t1, t2, t3"
    std::string joined() const;

    friend bool operator==(const PhraseList &, const PhraseList &) = default;

  private:
    std::vector<std::string> tokens_;
};

struct PhraseListSample {
    Sentence start;
    PhraseList phrase_list;
};

struct StopSample {
    Sentence start;
    PhraseList phrase_list;
    Sentence stop;
};

/// A story with one mask marker. Positives have `removed` sentences cut out
/// at the marker; negatives have the marker inserted into the intact story.
struct PositionSample {
    std::string text;
    bool missing = false;
    std::size_t site = 0;
    std::vector<std::string> removed;
};

/// "s_1 .. s_{i-1} <mask> s_{i+1} .. s_n <sep>" -> s_i
struct InfillSample {
    std::string context;
    Sentence target;
    std::size_t index = 0;
};

// Text layouts, identical at training and inference time.

/// "{start} <plist>"
std::string phrase_prompt(const Sentence &start, const Markers &markers);
/// "{start} <plist> {t1, t2} <stop>"
std::string stop_prompt(const Sentence &start, const PhraseList &phrase_list, const Markers &markers);
/// Sentences joined by spaces with `marker` inserted before sentence `insert_before`.
std::string render_masked(const std::vector<Sentence> &sentences, std::size_t insert_before,
                          const std::string &marker);
/// render_masked(..., mask) followed by " <sep>".
std::string render_infill_context(const std::vector<Sentence> &sentences, std::size_t insert_before,
                                  const Markers &markers);

/// Stop tokens whose best cosine against any start token exceeds `gamma`,
/// in stop order, first occurrence kept. Zero-norm embeddings count as
/// cosine 0 and are reported on `diag`.
PhraseList extract_phrase_list(const Sentence &start, const Sentence &stop, TokenEmbedder &embedder,
                               double gamma, Diagnostics *diag = nullptr);

std::vector<StopSample> build_stop_samples(const std::vector<Story> &corpus, TokenEmbedder &embedder,
                                           double gamma, Diagnostics *diag = nullptr);

std::vector<PhraseListSample> to_phrase_list_samples(const std::vector<StopSample> &stop_samples);

/// One positive (k in {1,2,3} consecutive interior sentences removed at one
/// site, k capped at length-2) followed by `negatives` negatives (marker at a
/// uniformly drawn interior boundary). Requires at least 4 sentences.
std::vector<PositionSample> build_position_samples(const Story &story, std::uint64_t seed,
                                                   const std::string &mask_marker,
                                                   std::size_t negatives = 1);

/// One sample per interior sentence; requires at least 3 sentences.
std::vector<InfillSample> build_infill_samples(const Story &story, const Markers &markers);

} // namespace bookend
