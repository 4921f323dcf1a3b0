#pragma once

#include "bookend/backends.hpp"
#include "bookend/corpus.hpp"
#include "bookend/syntax.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bookend {

struct EndpointRelatedness {
    double lexical_overlap = 0.0;
    double cosine_similarity = 0.0;
    std::optional<double> syntax_similarity;
};

struct QualityScores {
    double distinct_ngrams = 0.0;
    std::optional<double> bleu;
};

/// 2|A n B| / (|A| + |B|) over the two sentences' token sets.
double dice_overlap(const Sentence &a, const Sentence &b);

/// Cosine of the two sentence embeddings; 0 (with a warning) for a
/// zero-norm embedding.
double cosine_relatedness(const Sentence &a, const Sentence &b, SentenceEmbedder &embedder,
                          Diagnostics *diag = nullptr);

/// Mean over n = 1..max_n of distinct/total n-grams; orders with no n-grams
/// are left out of the mean.
double distinct_ngrams(const std::vector<std::string> &tokens, int max_n = 5);
double distinct_ngrams(const Story &story);
/// Pooled over a corpus: n-grams never span two stories.
double corpus_distinct_ngrams(const std::vector<Story> &stories, int max_n = 5);

enum class BleuSmoothing { none, add_one };

/// Corpus BLEU (0..100) of index-aligned candidate/reference stories:
/// clipped n-gram precisions for n = 1..4 pooled over the corpus, geometric
/// mean, brevity penalty exp(1 - r/c) when c < r. Orders for which the
/// candidates hold no n-grams at all are left out of the mean. Without
/// smoothing any zero precision gives 0; add_one smooths orders 2..4.
double bleu(const std::vector<Story> &candidates, const std::vector<Story> &references,
            BleuSmoothing smoothing = BleuSmoothing::none);
double sentence_bleu(const Story &candidate, const Story &reference,
                     BleuSmoothing smoothing = BleuSmoothing::none);

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0; // population
    std::size_t count = 0;
};

MetricSummary summarize(const std::vector<double> &values);

struct StoryScores {
    EndpointRelatedness relatedness;
    QualityScores quality;
};

struct AggregateReport {
    std::size_t story_count = 0;
    MetricSummary lexical_overlap;
    MetricSummary cosine_similarity;
    MetricSummary syntax_similarity;
    MetricSummary distinct_ngrams;
    double distinct_ngrams_corpus = 0.0;
    std::optional<double> bleu_corpus;
    std::optional<MetricSummary> bleu_per_story;
    std::size_t syntax_failures = 0;
    std::string embedder_id;
    std::string syntax_backend_id;
    std::vector<StoryScores> per_story;
    std::vector<std::string> warnings;
};

/// Scores every story's endpoints and quality and aggregates mean and
/// population std per metric. BLEU is only computed when references are
/// given (aligned by index).
AggregateReport evaluate_corpus(const std::vector<Story> &stories,
                                const std::vector<Story> *references, SentenceEmbedder &embedder,
                                SyntaxParser &syntax_parser,
                                BleuSmoothing smoothing = BleuSmoothing::none);

/// Aligned text table in the layout of the usual endpoint-relatedness /
/// quality table: one row, "mean±std" cells.
std::string format_report_table(const AggregateReport &report, const std::string &row_label);

} // namespace bookend
