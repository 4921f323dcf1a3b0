#include "doctest.h"

#include "bookend/error.hpp"
#include "bookend/metrics.hpp"
#include "bookend/stubs.hpp"
#include "bookend/syntax.hpp"

#include "../oracles/oracles.hpp"
#include "../support/fixtures.hpp"

#include <cmath>

using namespace bookend;

namespace {

template <typename F> ErrorCode code_of(F &&f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::io;
}

oracle::Tree to_oracle(const SyntaxTree &t) {
    oracle::Tree out{t.label, {}};
    for (const auto &c : t.children)
        out.children.push_back(to_oracle(c));
    return out;
}

SyntaxTree random_tree(Rng &rng, int depth) {
    static const char *labels[] = {"S", "NP", "VP", "PP"};
    SyntaxTree t;
    t.label = labels[rng.below(4)];
    if (depth > 0) {
        const auto kids = rng.below(3);
        for (std::uint64_t i = 0; i < kids; ++i)
            t.children.push_back(random_tree(rng, depth - 1));
    }
    return t;
}

std::string small_vocab_sentence(Rng &rng, std::size_t vocab) {
    std::string out;
    for (std::size_t i = 0, n = rng.between(1, 6); i < n; ++i)
        out += (i ? " " : "") + std::string(1, static_cast<char>('a' + rng.below(vocab)));
    return out + ".";
}

Story small_vocab_story(Rng &rng, std::size_t vocab) {
    std::vector<std::string> s;
    for (std::size_t i = 0, n = rng.between(2, 4); i < n; ++i)
        s.push_back(small_vocab_sentence(rng, vocab));
    return make_story(s);
}

// Candidate stories whose token count is at least 4 each.
Story long_enough(Rng &rng, std::size_t vocab) {
    for (;;) {
        auto s = small_vocab_story(rng, vocab);
        if (s.tokens().size() >= 4)
            return s;
    }
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("dice examples") {
    CHECK(dice_overlap(Sentence("a b c"), Sentence("a b c")) == 1.0);
    CHECK(dice_overlap(Sentence("a b c"), Sentence("d e f")) == 0.0);
    CHECK(std::abs(dice_overlap(Sentence("a b c"), Sentence("b c d")) - 4.0 / 6.0) < 1e-12);
}

TEST_CASE("dice matches the set oracle") {
    Rng rng(1);
    for (int i = 0; i < 300; ++i) {
        const Sentence a(small_vocab_sentence(rng, 6));
        const Sentence b(small_vocab_sentence(rng, 6));
        const double got = dice_overlap(a, b);
        CHECK(std::abs(got - oracle::dice(oracle::tokens_of(a.text()), oracle::tokens_of(b.text()))) <= 1e-12);
        CHECK(got == dice_overlap(b, a));
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
    }
}

TEST_CASE("cosine relatedness") {
    HashSentenceEmbedder embedder;
    const Sentence a("the dog ran");
    CHECK(std::abs(cosine_relatedness(a, a, embedder) - 1.0) <= 1e-9);
    CHECK(cosine_relatedness(a, Sentence("cats sleep"), embedder) == 0.0);

    class FixedEmbedder final : public SentenceEmbedder {
      public:
        std::string id() const override { return "fixed"; }

      protected:
        SentenceEmbedding do_embed_sentence(const Sentence &s) override {
            if (s.text() == "one")
                return {{1, 2, 2}};
            if (s.text() == "two")
                return {{2, 2, 1}};
            return {{0, 0, 0}};
        }
    } fixed;
    CHECK(std::abs(cosine_relatedness(Sentence("one"), Sentence("two"), fixed) - 8.0 / 9.0) < 1e-12);
    Diagnostics diag;
    CHECK(cosine_relatedness(Sentence("one"), Sentence("zero"), fixed, &diag) == 0.0);
    CHECK(diag.warnings.size() == 1);
}

TEST_CASE("distinct n-gram examples") {
    CHECK(distinct_ngrams({"a", "b", "c", "d", "e", "f"}) == 1.0);
    const double repeated = (1.0 / 6 + 1.0 / 5 + 1.0 / 4 + 1.0 / 3 + 1.0 / 2) / 5;
    CHECK(std::abs(distinct_ngrams({"a", "a", "a", "a", "a", "a"}) - repeated) < 1e-12);
    CHECK(std::abs(repeated - 0.29) < 1e-12);
    CHECK(distinct_ngrams(make_story({"a.", "a."})) == (0.5 + 1.0) / 2);
    CHECK(distinct_ngrams(std::vector<std::string>{}) == 0.0);
}

TEST_CASE("distinct n-grams match the enumeration oracle") {
    Rng rng(2);
    for (int i = 0; i < 300; ++i) {
        std::vector<std::string> stream;
        for (std::size_t k = 0, n = rng.between(1, 14); k < n; ++k)
            stream.push_back(std::string(1, static_cast<char>('a' + rng.below(3))));
        CHECK(std::abs(distinct_ngrams(stream) - oracle::distinct_ngrams(stream)) <= 1e-12);
    }
}

TEST_CASE("tree kernel examples") {
    const auto t = strip_terminals(parse_bracketed("(S (NP (DT the) (NN dog)) (VP (VBD ran)))"));
    CHECK(normalized_tree_kernel(t, t) == 1.0);
    const auto u = parse_bracketed("(X (Y) (Z))");
    CHECK(normalized_tree_kernel(t, u) == 0.0);
    // Shared production A -> B; C differs.
    const auto a = parse_bracketed("(A (B) (C))");
    const auto b = parse_bracketed("(A (B) (D))");
    const double expected = oracle::normalized_fragment_kernel(to_oracle(a), to_oracle(b));
    CHECK(std::abs(normalized_tree_kernel(a, b) - expected) <= 1e-12);
    CHECK(tree_kernel(a, b) == oracle::fragment_kernel(to_oracle(a), to_oracle(b)));
}

TEST_CASE("tree kernel matches fragment enumeration") {
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
        const auto a = random_tree(rng, 3);
        const auto b = random_tree(rng, 3);
        CHECK(tree_kernel(a, b) == oracle::fragment_kernel(to_oracle(a), to_oracle(b)));
        CHECK(std::abs(normalized_tree_kernel(a, b) -
                       oracle::normalized_fragment_kernel(to_oracle(a), to_oracle(b))) <= 1e-12);
    }
}

TEST_CASE("bracketed trees") {
    const auto t = parse_bracketed("(S (NP (DT the) (NN dog)) (VP (VBD ran)))");
    CHECK(to_bracketed(t) == "(S (NP (DT the) (NN dog)) (VP (VBD ran)))");
    CHECK(node_count(strip_terminals(t)) == 6);
    CHECK(code_of([] { parse_bracketed("(S (NP"); }) == ErrorCode::parse);
    CHECK(code_of([] { parse_bracketed("(S) x"); }) == ErrorCode::parse);
    ShallowSyntaxParser parser;
    const Sentence s("The old dog ran to the park.");
    CHECK(syntax_similarity(s, s, parser) == 1.0);
    const auto other = syntax_similarity(s, Sentence("Alice found a cat."), parser);
    REQUIRE(other.has_value());
    CHECK(*other >= 0.0);
    CHECK(*other <= 1.0);
}

TEST_CASE("failing syntax backends leave the score out") {
    class Broken final : public SyntaxParser {
      public:
        SyntaxTree parse(const Sentence &) override { fail(ErrorCode::parse, "no parse"); }
        std::string id() const override { return "broken"; }
    } broken;
    Diagnostics diag;
    CHECK_FALSE(syntax_similarity(Sentence("a."), Sentence("b."), broken, &diag).has_value());
    CHECK(diag.warnings.size() == 1);
    HashSentenceEmbedder embedder;
    const auto report = evaluate_corpus({make_story({"a b.", "a c."})}, nullptr, embedder, broken);
    CHECK(report.syntax_failures == 1);
    CHECK(report.syntax_similarity.count == 0);
}

TEST_CASE("BLEU examples") {
    Rng rng(4);
    std::vector<Story> corpus;
    for (int i = 0; i < 5; ++i)
        corpus.push_back(fixtures::random_story(rng, 5));
    CHECK(bleu(corpus, corpus) == 100.0);
    const auto disjoint = make_story({"q r s t.", "u v w x."});
    const auto reference = make_story({"a b c d.", "e f g h."});
    CHECK(bleu({disjoint}, {reference}) == 0.0);
    // Unigram and bigram overlap but no shared 4-gram.
    const auto partial = make_story({"a b c x.", "e f y h."});
    CHECK(bleu({partial}, {reference}) == 0.0);
    CHECK(bleu({partial}, {reference}, BleuSmoothing::add_one) > 0.0);
    CHECK(code_of([&] { bleu(corpus, {corpus[0]}); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { bleu({}, {}); }) == ErrorCode::invalid_argument);
}

TEST_CASE("BLEU matches the reference implementation") {
    Rng rng(5);
    int nonzero = 0;
    for (int i = 0; i < 50; ++i) {
        std::vector<Story> cands;
        std::vector<Story> refs;
        std::vector<oracle::Tokens> oc;
        std::vector<oracle::Tokens> orf;
        for (std::size_t k = 0, n = rng.between(1, 4); k < n; ++k) {
            cands.push_back(long_enough(rng, 3));
            refs.push_back(small_vocab_story(rng, 3));
            oc.push_back(oracle::tokens_of(cands.back().text()));
            orf.push_back(oracle::tokens_of(refs.back().text()));
        }
        const double got = bleu(cands, refs);
        const double want = oracle::corpus_bleu(oc, orf);
        CHECK(std::abs(got - want) <= 1e-6);
        nonzero += want > 0.0 ? 1 : 0;
    }
    CHECK(nonzero > 10);
}

TEST_CASE("summaries use the population std") {
    const auto s = summarize({1, 2, 3, 4});
    const auto o = oracle::moments({1, 2, 3, 4});
    CHECK(std::abs(s.mean - o.mean) < 1e-12);
    CHECK(std::abs(s.std - o.std) < 1e-12);
    CHECK(s.count == 4);
    CHECK(summarize({}).count == 0);
}

TEST_CASE("corpus evaluation") {
    HashSentenceEmbedder embedder;
    ShallowSyntaxParser parser;
    CHECK(code_of([&] { evaluate_corpus({}, nullptr, embedder, parser); }) == ErrorCode::invalid_argument);

    const auto one = make_story({"Alice went home.", "It rained.", "Alice stayed home."});
    const auto single = evaluate_corpus({one}, nullptr, embedder, parser);
    CHECK(single.story_count == 1);
    CHECK(single.lexical_overlap.mean == dice_overlap(one.start(), one.stop()));
    CHECK(single.lexical_overlap.std == 0.0);
    CHECK(single.distinct_ngrams.mean == distinct_ngrams(one));

    const auto twice = evaluate_corpus({one, one}, nullptr, embedder, parser);
    CHECK(twice.lexical_overlap.std == 0.0);
    CHECK(twice.cosine_similarity.std == 0.0);
    CHECK(twice.distinct_ngrams.std == 0.0);

    Rng rng(6);
    std::vector<Story> stories;
    for (int i = 0; i < 10; ++i)
        stories.push_back(fixtures::random_story(rng, 5));
    const auto report = evaluate_corpus(stories, &stories, embedder, parser);
    std::vector<double> dice;
    std::vector<double> cos;
    std::vector<double> dist;
    for (const auto &s : stories) {
        dice.push_back(oracle::dice(oracle::tokens_of(s.start().text()), oracle::tokens_of(s.stop().text())));
        const auto va = embedder.embed_sentence(s.start()).vector;
        const auto vb = embedder.embed_sentence(s.stop()).vector;
        double dot = 0, na = 0, nb = 0;
        for (std::size_t k = 0; k < va.size(); ++k) {
            dot += va[k] * vb[k];
            na += va[k] * va[k];
            nb += vb[k] * vb[k];
        }
        cos.push_back(dot / std::sqrt(na * nb));
        dist.push_back(oracle::distinct_ngrams(oracle::tokens_of(s.text())));
    }
    CHECK(std::abs(report.lexical_overlap.mean - oracle::moments(dice).mean) < 1e-12);
    CHECK(std::abs(report.lexical_overlap.std - oracle::moments(dice).std) < 1e-12);
    CHECK(std::abs(report.cosine_similarity.mean - oracle::moments(cos).mean) < 1e-12);
    CHECK(std::abs(report.cosine_similarity.std - oracle::moments(cos).std) < 1e-12);
    CHECK(std::abs(report.distinct_ngrams.mean - oracle::moments(dist).mean) < 1e-12);
    CHECK(std::abs(report.distinct_ngrams.std - oracle::moments(dist).std) < 1e-12);
    REQUIRE(report.bleu_corpus.has_value());
    CHECK(*report.bleu_corpus == 100.0);
    CHECK(report.per_story.size() == 10);

    const auto table = format_report_table(report, "stub");
    CHECK(table.find("Lexical Overlap") != std::string::npos);
    CHECK(table.find("100.00") != std::string::npos);
    CHECK(table.find("stub") != std::string::npos);
}

}
