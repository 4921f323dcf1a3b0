#include "bookend/corpus.hpp"
#include "bookend/error.hpp"
#include "bookend/infiller.hpp"
#include "bookend/metrics.hpp"
#include "bookend/preprocessing.hpp"
#include "bookend/serialization.hpp"
#include "bookend/stubs.hpp"
#include "bookend/syntax.hpp"
#include "bookend/text.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace bookend;

namespace {

Story to_story(const std::vector<std::string> &sentences) { return make_story(sentences); }

std::vector<Story> to_stories(const std::vector<std::vector<std::string>> &stories) {
    std::vector<Story> out;
    out.reserve(stories.size());
    for (const auto &s : stories)
        out.push_back(to_story(s));
    return out;
}

std::vector<std::string> texts(const std::vector<Sentence> &sentences) {
    std::vector<std::string> out;
    for (const auto &s : sentences)
        out.push_back(s.text());
    return out;
}

} // namespace

PYBIND11_MODULE(_bookend, m) {
    m.doc() = "Native core of the bookend story generator.";

    static py::exception<Error> error_type(m, "BookendError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error &e) {
            py::object exc = py::handle(error_type.ptr())(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            exc.attr("detail") = e.detail();
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    m.def("tokenize", [](const std::string &text) { return tokenize(text); });
    m.def("split_sentences", [](const std::string &text) { return split_sentences(text); });

    m.def("dice_overlap", [](const std::string &a, const std::string &b) {
        return dice_overlap(Sentence(a), Sentence(b));
    });
    m.def("distinct_ngrams",
          [](const std::vector<std::string> &tokens, int max_n) { return distinct_ngrams(tokens, max_n); },
          py::arg("tokens"), py::arg("max_n") = 5);
    m.def(
        "bleu",
        [](const std::vector<std::vector<std::string>> &candidates,
           const std::vector<std::vector<std::string>> &references, bool add_one) {
            return bleu(to_stories(candidates), to_stories(references),
                        add_one ? BleuSmoothing::add_one : BleuSmoothing::none);
        },
        py::arg("candidates"), py::arg("references"), py::arg("add_one") = false);
    m.def("normalized_tree_kernel", [](const std::string &a, const std::string &b) {
        return normalized_tree_kernel(parse_bracketed(a), parse_bracketed(b));
    });

    m.def(
        "extract_phrase_list",
        [](const std::string &start, const std::string &stop, double gamma) {
            HashTokenEmbedder embedder;
            return extract_phrase_list(Sentence(start), Sentence(stop), embedder, gamma).tokens();
        },
        py::arg("start"), py::arg("stop"), py::arg("gamma") = 0.7);

    m.def("infill_samples", [](const std::vector<std::string> &sentences) {
        py::list out;
        for (const auto &s : build_infill_samples(to_story(sentences), Markers{}))
            out.append(py::make_tuple(s.context, s.target.text(), s.index));
        return out;
    });
    m.def(
        "position_samples",
        [](const std::vector<std::string> &sentences, std::uint64_t seed, std::size_t negatives) {
            py::list out;
            for (const auto &s : build_position_samples(to_story(sentences), seed, Markers{}.mask, negatives)) {
                py::dict d;
                d["text"] = s.text;
                d["missing"] = s.missing;
                d["site"] = s.site;
                d["removed"] = s.removed;
                out.append(d);
            }
            return out;
        },
        py::arg("sentences"), py::arg("seed") = 0, py::arg("negatives") = 1);

    m.def(
        "infill_story",
        [](const std::string &start, const std::string &stop, std::size_t n, std::uint64_t seed) {
            auto suite = make_stub_suite();
            InfillConfig cfg;
            cfg.params.seed = seed;
            const auto r = infill_story(Sentence(start), Sentence(stop), n, *suite.position_scorer,
                                        *suite.infill_generator, cfg);
            py::list trace;
            for (const auto &e : r.trace)
                trace.append(py::make_tuple(e.gap.insert_before, e.sentence.text(), e.scores));
            py::dict d;
            d["sentences"] = texts(r.story.sentences());
            d["trace"] = trace;
            return d;
        },
        py::arg("start"), py::arg("stop"), py::arg("n") = 5, py::arg("seed") = 0);

    m.def(
        "evaluate_json",
        [](const std::vector<std::vector<std::string>> &stories,
           std::optional<std::vector<std::vector<std::string>>> references) {
            HashSentenceEmbedder embedder;
            ShallowSyntaxParser parser;
            const auto cands = to_stories(stories);
            std::optional<std::vector<Story>> refs;
            if (references)
                refs = to_stories(*references);
            nlohmann::json j = evaluate_corpus(cands, refs ? &*refs : nullptr, embedder, parser);
            return j.dump();
        },
        py::arg("stories"), py::arg("references") = py::none());
}
