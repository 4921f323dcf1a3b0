#include "bookend/metrics.hpp"
#include "bookend/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace bookend {

double dice_overlap(const Sentence &a, const Sentence &b) {
    const std::set<std::string> ta(a.tokens().begin(), a.tokens().end());
    const std::set<std::string> tb(b.tokens().begin(), b.tokens().end());
    std::size_t shared = 0;
    for (const auto &t : ta)
        shared += tb.count(t);
    return 2.0 * static_cast<double>(shared) / static_cast<double>(ta.size() + tb.size());
}

double cosine_relatedness(const Sentence &a, const Sentence &b, SentenceEmbedder &embedder,
                          Diagnostics *diag) {
    const auto va = embedder.embed_sentence(a).vector;
    const auto vb = embedder.embed_sentence(b).vector;
    auto zero = [](const std::vector<double> &v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    };
    if (zero(va) || zero(vb)) {
        warn(diag, "zero-norm sentence embedding; cosine taken as 0");
        return 0.0;
    }
    return cosine(va, vb);
}

namespace {

using NGram = std::vector<std::string>;

std::map<NGram, std::size_t> ngram_counts(const std::vector<std::string> &tokens, std::size_t n) {
    std::map<NGram, std::size_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                       tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    return counts;
}

} // namespace

double distinct_ngrams(const std::vector<std::string> &tokens, int max_n) {
    double sum = 0.0;
    int orders = 0;
    for (int n = 1; n <= max_n; ++n) {
        if (tokens.size() < static_cast<std::size_t>(n))
            break;
        const auto total = tokens.size() - static_cast<std::size_t>(n) + 1;
        sum += static_cast<double>(ngram_counts(tokens, static_cast<std::size_t>(n)).size()) /
               static_cast<double>(total);
        ++orders;
    }
    return orders == 0 ? 0.0 : sum / orders;
}

double distinct_ngrams(const Story &story) { return distinct_ngrams(story.tokens()); }

double corpus_distinct_ngrams(const std::vector<Story> &stories, int max_n) {
    double sum = 0.0;
    int orders = 0;
    for (int n = 1; n <= max_n; ++n) {
        std::set<NGram> distinct;
        std::size_t total = 0;
        for (const auto &story : stories) {
            const auto tokens = story.tokens();
            for (auto &[gram, count] : ngram_counts(tokens, static_cast<std::size_t>(n))) {
                distinct.insert(gram);
                total += count;
            }
        }
        if (total == 0)
            continue;
        sum += static_cast<double>(distinct.size()) / static_cast<double>(total);
        ++orders;
    }
    return orders == 0 ? 0.0 : sum / orders;
}

double bleu(const std::vector<Story> &candidates, const std::vector<Story> &references,
            BleuSmoothing smoothing) {
    if (candidates.size() != references.size())
        fail(ErrorCode::invalid_argument, "BLEU needs as many references as candidates",
             std::to_string(candidates.size()) + " vs " + std::to_string(references.size()));
    if (candidates.empty())
        fail(ErrorCode::invalid_argument, "BLEU of an empty corpus");
    constexpr std::size_t kMaxOrder = 4;
    std::size_t matches[kMaxOrder] = {};
    std::size_t totals[kMaxOrder] = {};
    std::size_t cand_len = 0;
    std::size_t ref_len = 0;
    for (std::size_t s = 0; s < candidates.size(); ++s) {
        const auto cand = candidates[s].tokens();
        const auto ref = references[s].tokens();
        cand_len += cand.size();
        ref_len += ref.size();
        for (std::size_t n = 1; n <= kMaxOrder; ++n) {
            const auto cand_counts = ngram_counts(cand, n);
            const auto ref_counts = ngram_counts(ref, n);
            for (const auto &[gram, count] : cand_counts) {
                totals[n - 1] += count;
                if (auto it = ref_counts.find(gram); it != ref_counts.end())
                    matches[n - 1] += std::min(count, it->second);
            }
        }
    }
    double log_sum = 0.0;
    int orders = 0;
    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
        if (totals[n - 1] == 0)
            continue;
        double m = static_cast<double>(matches[n - 1]);
        double t = static_cast<double>(totals[n - 1]);
        if (smoothing == BleuSmoothing::add_one && n > 1) {
            m += 1.0;
            t += 1.0;
        }
        if (m == 0.0)
            return 0.0;
        log_sum += std::log(m / t);
        ++orders;
    }
    const double brevity =
        cand_len < ref_len ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len))
                           : 1.0;
    return 100.0 * brevity * std::exp(log_sum / orders);
}

double sentence_bleu(const Story &candidate, const Story &reference, BleuSmoothing smoothing) {
    return bleu({candidate}, {reference}, smoothing);
}

MetricSummary summarize(const std::vector<double> &values) {
    MetricSummary out;
    out.count = values.size();
    if (values.empty())
        return out;
    double sum = 0.0;
    for (double v : values)
        sum += v;
    out.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values)
        sq += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(values.size()));
    return out;
}

AggregateReport evaluate_corpus(const std::vector<Story> &stories, const std::vector<Story> *references,
                                SentenceEmbedder &embedder, SyntaxParser &syntax_parser,
                                BleuSmoothing smoothing) {
    if (stories.empty())
        fail(ErrorCode::invalid_argument, "cannot evaluate an empty story set");
    if (references != nullptr && references->size() != stories.size())
        fail(ErrorCode::invalid_argument, "reference count differs from story count",
             std::to_string(references->size()) + " vs " + std::to_string(stories.size()));
    AggregateReport report;
    report.story_count = stories.size();
    report.embedder_id = embedder.id();
    report.syntax_backend_id = syntax_parser.id();
    Diagnostics diag;
    std::vector<double> lexical;
    std::vector<double> cosines;
    std::vector<double> syntax;
    std::vector<double> distinct;
    std::vector<double> bleus;
    for (std::size_t i = 0; i < stories.size(); ++i) {
        const auto &story = stories[i];
        StoryScores scores;
        scores.relatedness.lexical_overlap = dice_overlap(story.start(), story.stop());
        scores.relatedness.cosine_similarity = cosine_relatedness(story.start(), story.stop(), embedder, &diag);
        scores.relatedness.syntax_similarity =
            syntax_similarity(story.start(), story.stop(), syntax_parser, &diag);
        scores.quality.distinct_ngrams = distinct_ngrams(story);
        if (references != nullptr) {
            scores.quality.bleu = sentence_bleu(story, (*references)[i], smoothing);
            bleus.push_back(*scores.quality.bleu);
        }
        lexical.push_back(scores.relatedness.lexical_overlap);
        cosines.push_back(scores.relatedness.cosine_similarity);
        if (scores.relatedness.syntax_similarity)
            syntax.push_back(*scores.relatedness.syntax_similarity);
        else
            ++report.syntax_failures;
        distinct.push_back(scores.quality.distinct_ngrams);
        report.per_story.push_back(std::move(scores));
    }
    report.lexical_overlap = summarize(lexical);
    report.cosine_similarity = summarize(cosines);
    report.syntax_similarity = summarize(syntax);
    report.distinct_ngrams = summarize(distinct);
    report.distinct_ngrams_corpus = corpus_distinct_ngrams(stories);
    if (references != nullptr) {
        report.bleu_corpus = bleu(stories, *references, smoothing);
        report.bleu_per_story = summarize(bleus);
    }
    report.warnings = std::move(diag.warnings);
    return report;
}

namespace {

std::string cell(double mean, std::optional<double> spread, int precision) {
    char buf[64];
    if (spread)
        std::snprintf(buf, sizeof buf, "%.*f\xC2\xB1%.*f", precision, mean, precision, *spread);
    else
        std::snprintf(buf, sizeof buf, "%.*f", precision, mean);
    return buf;
}

// Display width, counting each UTF-8 code point once.
std::size_t width(const std::string &s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

} // namespace

std::string format_report_table(const AggregateReport &report, const std::string &row_label) {
    const std::vector<std::string> header{"Model", "Lexical Overlap", "Cosine Sim.", "Syntax Sim.",
                                          "Distinct n-grams", "BLEU"};
    const std::vector<std::string> row{
        row_label,
        cell(report.lexical_overlap.mean, report.lexical_overlap.std, 3),
        cell(report.cosine_similarity.mean, report.cosine_similarity.std, 3),
        report.syntax_similarity.count > 0
            ? cell(report.syntax_similarity.mean, report.syntax_similarity.std, 3)
            : "--",
        cell(report.distinct_ngrams.mean, std::nullopt, 3),
        report.bleu_corpus ? cell(*report.bleu_corpus, std::nullopt, 2) : "--"};
    std::string out;
    for (const std::vector<std::string> *line : {&header, &row}) {
        for (std::size_t c = 0; c < line->size(); ++c) {
            const auto w = std::max(width(header[c]), width(row[c]));
            if (c > 0)
                out += " | ";
            out += (*line)[c];
            out.append(w - width((*line)[c]), ' ');
        }
        while (!out.empty() && out.back() == ' ')
            out.pop_back();
        out += '\n';
    }
    return out;
}

} // namespace bookend
