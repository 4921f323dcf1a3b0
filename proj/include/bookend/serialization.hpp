#pragma once

// nlohmann::json bindings for the library's value types.

#include "bookend/backends.hpp"
#include "bookend/corpus.hpp"
#include "bookend/endpoint.hpp"
#include "bookend/infiller.hpp"
#include "bookend/llm_pipeline.hpp"
#include "bookend/metrics.hpp"
#include "bookend/preprocessing.hpp"
#include "bookend/stubs.hpp"
#include "bookend/syntax.hpp"

#include "json.hpp"

namespace nlohmann {

template <typename T> struct adl_serializer<std::optional<T>> {
    static void to_json(json &j, const std::optional<T> &value) {
        if (value)
            j = *value;
        else
            j = nullptr;
    }
    static void from_json(const json &j, std::optional<T> &value) {
        if (j.is_null())
            value.reset();
        else
            value = j.get<T>();
    }
};

template <> struct adl_serializer<bookend::Sentence> {
    static void to_json(json &j, const bookend::Sentence &s) { j = s.text(); }
    static bookend::Sentence from_json(const json &j) { return bookend::Sentence(j.get<std::string>()); }
};

template <> struct adl_serializer<bookend::Story> {
    static void to_json(json &j, const bookend::Story &story) {
        j = json::object();
        if (story.id())
            j["id"] = *story.id();
        if (story.title())
            j["title"] = *story.title();
        json sentences = json::array();
        for (const auto &s : story.sentences())
            sentences.push_back(s.text());
        j["sentences"] = std::move(sentences);
    }
    static bookend::Story from_json(const json &j) {
        std::optional<std::string> id;
        std::optional<std::string> title;
        if (auto it = j.find("id"); it != j.end() && !it->is_null())
            id = it->is_string() ? it->get<std::string>() : it->dump();
        if (auto it = j.find("title"); it != j.end() && !it->is_null())
            title = it->get<std::string>();
        std::vector<bookend::Sentence> sentences;
        for (const auto &s : j.at("sentences"))
            sentences.emplace_back(s.get<std::string>());
        return bookend::Story(std::move(sentences), std::move(id), std::move(title));
    }
};

template <> struct adl_serializer<bookend::PhraseList> {
    static void to_json(json &j, const bookend::PhraseList &list) { j = list.tokens(); }
    static bookend::PhraseList from_json(const json &j) {
        return bookend::PhraseList(j.get<std::vector<std::string>>());
    }
};

template <> struct adl_serializer<bookend::TraceEntry> {
    static void to_json(json &j, const bookend::TraceEntry &e) {
        j = {{"insert_before", e.gap.insert_before}, {"sentence", e.sentence.text()}, {"scores", e.scores}};
    }
    static bookend::TraceEntry from_json(const json &j) {
        return bookend::TraceEntry{{j.at("insert_before").get<std::size_t>()},
                                   bookend::Sentence(j.at("sentence").get<std::string>()),
                                   j.at("scores").get<std::vector<double>>()};
    }
};

} // namespace nlohmann

namespace bookend {

inline void to_json(nlohmann::json &j, const GenerationParams &p) {
    j = {{"max_new_tokens", p.max_new_tokens},
         {"temperature", p.temperature},
         {"stop_markers", p.stop_markers},
         {"seed", p.seed}};
}

inline void from_json(const nlohmann::json &j, GenerationParams &p) {
    p = GenerationParams{};
    p.max_new_tokens = j.value("max_new_tokens", p.max_new_tokens);
    p.temperature = j.value("temperature", p.temperature);
    p.stop_markers = j.value("stop_markers", p.stop_markers);
    if (auto it = j.find("seed"); it != j.end() && !it->is_null())
        p.seed = it->get<std::uint64_t>();
}

inline void to_json(nlohmann::json &j, const Markers &m) {
    j = {{"mask", m.mask}, {"sep", m.sep}, {"plist", m.plist}, {"stop", m.stop}};
}

inline void from_json(const nlohmann::json &j, Markers &m) {
    m = Markers{};
    m.mask = j.value("mask", m.mask);
    m.sep = j.value("sep", m.sep);
    m.plist = j.value("plist", m.plist);
    m.stop = j.value("stop", m.stop);
}

inline void to_json(nlohmann::json &j, const ChatTurn &t) {
    j = {{"system", t.system}, {"user", t.user}, {"response", t.response}};
}

inline void from_json(const nlohmann::json &j, ChatTurn &t) {
    j.at("system").get_to(t.system);
    j.at("user").get_to(t.user);
    j.at("response").get_to(t.response);
}

inline void to_json(nlohmann::json &j, const PositionSample &s) {
    j = {{"text", s.text}, {"missing", s.missing}, {"site", s.site}, {"removed", s.removed}};
}

inline void from_json(const nlohmann::json &j, PositionSample &s) {
    j.at("text").get_to(s.text);
    j.at("missing").get_to(s.missing);
    j.at("site").get_to(s.site);
    j.at("removed").get_to(s.removed);
}

inline void to_json(nlohmann::json &j, const InfillSample &s) {
    j = {{"context", s.context}, {"target", s.target.text()}, {"index", s.index}};
}

inline void to_json(nlohmann::json &j, const StopSample &s) {
    j = {{"start", s.start.text()}, {"phrase_list", s.phrase_list}, {"stop", s.stop.text()}};
}

inline void to_json(nlohmann::json &j, const PhraseListSample &s) {
    j = {{"start", s.start.text()}, {"phrase_list", s.phrase_list}};
}

inline void to_json(nlohmann::json &j, const EndpointIntermediates &i) {
    j = nlohmann::json::object();
    if (i.phrase_list)
        j["phrase_list"] = *i.phrase_list;
    if (i.question)
        j["question"] = *i.question;
}

inline void to_json(nlohmann::json &j, const PromptTranscript &t) {
    j = {{"variant", to_string(t.variant)}, {"turns", t.turns}};
    if (t.method)
        j["method"] = static_cast<int>(*t.method);
    if (t.intermediates)
        j["intermediates"] = *t.intermediates;
}

inline void to_json(nlohmann::json &j, const MetricSummary &s) {
    j = {{"mean", s.mean}, {"std", s.std}, {"count", s.count}};
}

inline void from_json(const nlohmann::json &j, MetricSummary &s) {
    j.at("mean").get_to(s.mean);
    j.at("std").get_to(s.std);
    j.at("count").get_to(s.count);
}

inline void to_json(nlohmann::json &j, const EndpointRelatedness &r) {
    j = {{"lexical_overlap", r.lexical_overlap},
         {"cosine_similarity", r.cosine_similarity},
         {"syntax_similarity", r.syntax_similarity}};
}

inline void from_json(const nlohmann::json &j, EndpointRelatedness &r) {
    j.at("lexical_overlap").get_to(r.lexical_overlap);
    j.at("cosine_similarity").get_to(r.cosine_similarity);
    r.syntax_similarity = j.at("syntax_similarity").get<std::optional<double>>();
}

inline void to_json(nlohmann::json &j, const QualityScores &q) {
    j = {{"distinct_ngrams", q.distinct_ngrams}, {"bleu", q.bleu}};
}

inline void from_json(const nlohmann::json &j, QualityScores &q) {
    j.at("distinct_ngrams").get_to(q.distinct_ngrams);
    q.bleu = j.at("bleu").get<std::optional<double>>();
}

inline void to_json(nlohmann::json &j, const StoryScores &s) {
    j = {{"relatedness", s.relatedness}, {"quality", s.quality}};
}

inline void from_json(const nlohmann::json &j, StoryScores &s) {
    j.at("relatedness").get_to(s.relatedness);
    j.at("quality").get_to(s.quality);
}

inline void to_json(nlohmann::json &j, const AggregateReport &r) {
    j = {{"story_count", r.story_count},
         {"lexical_overlap", r.lexical_overlap},
         {"cosine_similarity", r.cosine_similarity},
         {"syntax_similarity", r.syntax_similarity},
         {"distinct_ngrams", r.distinct_ngrams},
         {"distinct_ngrams_corpus", r.distinct_ngrams_corpus},
         {"bleu_corpus", r.bleu_corpus},
         {"syntax_failures", r.syntax_failures},
         {"embedder", r.embedder_id},
         {"syntax_backend", r.syntax_backend_id},
         {"per_story", r.per_story},
         {"warnings", r.warnings}};
    if (r.bleu_per_story)
        j["bleu_per_story"] = *r.bleu_per_story;
    else
        j["bleu_per_story"] = nullptr;
}

} // namespace bookend
