#include "bookend/preprocessing.hpp"
#include "bookend/rng.hpp"
#include "bookend/text.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace bookend {

PhraseList::PhraseList(const std::vector<std::string> &tokens, Diagnostics *diag) {
    std::unordered_set<std::string> seen;
    for (const auto &raw : tokens) {
        std::string token = trim(raw);
        if (token.empty())
            continue;
        if (!seen.insert(token).second) {
            warn(diag, "dropped duplicate phrase-list token '" + token + "'");
            continue;
        }
        tokens_.push_back(std::move(token));
    }
}

std::string PhraseList::joined() const { return join(tokens_, ", "); }

std::string phrase_prompt(const Sentence &start, const Markers &markers) {
    return start.text() + " " + markers.plist;
}

std::string stop_prompt(const Sentence &start, const PhraseList &phrase_list, const Markers &markers) {
    std::string out = start.text() + " " + markers.plist + " ";
    if (!phrase_list.empty())
        out += phrase_list.joined() + " ";
    out += markers.stop;
    return out;
}

std::string render_masked(const std::vector<Sentence> &sentences, std::size_t insert_before,
                          const std::string &marker) {
    if (insert_before > sentences.size())
        fail(ErrorCode::invalid_argument, "mask position past the end of the story");
    std::string out;
    for (std::size_t i = 0; i <= sentences.size(); ++i) {
        if (i == insert_before) {
            if (!out.empty())
                out += ' ';
            out += marker;
        }
        if (i < sentences.size()) {
            if (!out.empty())
                out += ' ';
            out += sentences[i].text();
        }
    }
    return out;
}

std::string render_infill_context(const std::vector<Sentence> &sentences, std::size_t insert_before,
                                  const Markers &markers) {
    return render_masked(sentences, insert_before, markers.mask) + " " + markers.sep;
}

PhraseList extract_phrase_list(const Sentence &start, const Sentence &stop, TokenEmbedder &embedder,
                               double gamma, Diagnostics *diag) {
    if (!(gamma > 0.0 && gamma < 1.0))
        fail(ErrorCode::invalid_argument, "gamma must lie in (0, 1)", std::to_string(gamma));
    const auto start_embeddings = embedder.embed_tokens(start);
    const auto stop_embeddings = embedder.embed_tokens(stop);
    if (!start_embeddings.empty() && !stop_embeddings.empty() &&
        start_embeddings.front().vector.size() != stop_embeddings.front().vector.size())
        fail(ErrorCode::generation_failed, "token embedder changed dimension between sentences");

    auto is_zero = [](const std::vector<double> &v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    };
    bool warned = false;
    auto note_zero = [&](const std::vector<double> &v) {
        if (!warned && is_zero(v)) {
            warn(diag, "zero-norm token embedding treated as cosine 0");
            warned = true;
        }
    };
    for (const auto &e : start_embeddings)
        note_zero(e.vector);

    std::vector<std::string> selected;
    for (const auto &t : stop_embeddings) {
        note_zero(t.vector);
        double best = -1.0;
        for (const auto &u : start_embeddings)
            best = std::max(best, cosine(t.vector, u.vector));
        if (best > gamma)
            selected.push_back(t.token);
    }
    return PhraseList(selected);
}

std::vector<StopSample> build_stop_samples(const std::vector<Story> &corpus, TokenEmbedder &embedder,
                                           double gamma, Diagnostics *diag) {
    std::vector<StopSample> out;
    out.reserve(corpus.size());
    for (const auto &story : corpus)
        out.push_back({story.start(),
                       extract_phrase_list(story.start(), story.stop(), embedder, gamma, diag),
                       story.stop()});
    return out;
}

std::vector<PhraseListSample> to_phrase_list_samples(const std::vector<StopSample> &stop_samples) {
    std::vector<PhraseListSample> out;
    out.reserve(stop_samples.size());
    for (const auto &s : stop_samples)
        out.push_back({s.start, s.phrase_list});
    return out;
}

std::vector<PositionSample> build_position_samples(const Story &story, std::uint64_t seed,
                                                   const std::string &mask_marker,
                                                   std::size_t negatives) {
    const std::size_t n = story.size();
    if (n < 4)
        fail(ErrorCode::invalid_argument, "position samples need a story of at least 4 sentences",
             "story has " + std::to_string(n));
    const auto &sentences = story.sentences();
    Rng rng(seed);
    std::vector<PositionSample> out;

    const std::size_t k = std::min<std::size_t>(rng.between(1, 3), n - 2);
    const std::size_t site = rng.between(1, n - 1 - k);
    std::vector<Sentence> kept;
    PositionSample positive;
    positive.missing = true;
    positive.site = site;
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= site && i < site + k)
            positive.removed.push_back(sentences[i].text());
        else
            kept.push_back(sentences[i]);
    }
    positive.text = render_masked(kept, site, mask_marker);
    out.push_back(std::move(positive));

    for (std::size_t j = 0; j < negatives; ++j) {
        PositionSample negative;
        negative.site = rng.between(1, n - 1);
        negative.text = render_masked(sentences, negative.site, mask_marker);
        out.push_back(std::move(negative));
    }
    return out;
}

std::vector<InfillSample> build_infill_samples(const Story &story, const Markers &markers) {
    const std::size_t n = story.size();
    if (n < 3)
        fail(ErrorCode::invalid_argument, "infill samples need a story of at least 3 sentences",
             "story has " + std::to_string(n));
    std::vector<InfillSample> out;
    out.reserve(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        std::vector<Sentence> others;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                others.push_back(story.sentences()[j]);
        out.push_back({render_infill_context(others, i, markers), story.sentences()[i], i});
    }
    return out;
}

} // namespace bookend
