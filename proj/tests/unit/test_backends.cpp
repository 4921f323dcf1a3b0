#include "doctest.h"

#include "bookend/backends.hpp"
#include "bookend/error.hpp"
#include "bookend/stubs.hpp"

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

GenerationRequest request(std::string prompt, std::uint64_t seed = 1) {
    GenerationRequest r;
    r.prompt = std::move(prompt);
    r.params.seed = seed;
    return r;
}

} // namespace

TEST_SUITE("backends") {

TEST_CASE("echo stub is a function of prompt and seed") {
    EchoGenerator echo;
    const auto a = echo.generate(request("A"));
    CHECK(!a.empty());
    CHECK(echo.generate(request("A")) == a);
    CHECK(EchoGenerator().generate(request("A")) == a);
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        auto r = request(fixtures::random_sentence(rng), rng.below(1000));
        r.params.temperature = static_cast<double>(rng.below(3));
        CHECK(echo.generate(r) == echo.generate(r));
    }
}

TEST_CASE("stop markers truncate the completion") {
    ScriptedTextGenerator gen(std::unordered_map<std::string, std::string>{{"p", "first line\nsecond line"}});
    auto r = request("p");
    r.params.stop_markers = {"\n"};
    const auto out = gen.generate(r);
    CHECK(out == "first line");
    CHECK(out.find('\n') == std::string::npos);
    CHECK(truncate_at_stop_markers("a <sep> b <stop> c", {"<stop>", "<sep>"}) == "a ");
}

TEST_CASE("parameter validation") {
    EchoGenerator echo;
    auto r = request("x");
    r.params.max_new_tokens = 0;
    CHECK(code_of([&] { echo.generate(r); }) == ErrorCode::invalid_argument);
    r = request("x");
    r.params.temperature = -1;
    CHECK(code_of([&] { echo.generate(r); }) == ErrorCode::invalid_argument);
}

TEST_CASE("scripted chat answers from its table and rejects the rest") {
    ScriptedChatGenerator chat;
    chat.add("sys", "hello", "Hi there.");
    GenerationParams params;
    CHECK(chat.chat("sys", "hello", params) == "Hi there.");
    try {
        chat.chat("sys", "other", params);
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(std::string(e.what()).find("unscripted prompt") != std::string::npos);
    }
    ScriptedChatGenerator replayed(chat.log());
    CHECK(replayed.chat("sys", "hello", params) == "Hi there.");
    CHECK(replayed.log() == std::vector<ChatTurn>{{"sys", "hello", "Hi there."}});
}

TEST_CASE("scripted text generator names unscripted prompts") {
    ScriptedTextGenerator gen;
    CHECK(code_of([&] { gen.generate(request("nothing")); }) == ErrorCode::invalid_argument);
}

TEST_CASE("hash token embedder") {
    HashTokenEmbedder embedder;
    const auto two = embedder.embed_tokens(Sentence("a b"));
    CHECK(two.size() == 2);
    const auto same = embedder.embed_tokens(Sentence("dog dog"));
    CHECK(same[0].vector == same[1].vector);
    const auto three = embedder.embed_tokens(Sentence("The cat sat."));
    REQUIRE(three.size() == 3);
    CHECK(three[0].token == "the");
    CHECK(three[1].token == "cat");
    CHECK(three[2].token == "sat");
    for (const auto &e : three)
        CHECK(e.vector[embedder.bucket(e.token)] == 1.0);
}

TEST_CASE("hash sentence embedder") {
    HashSentenceEmbedder embedder;
    const Sentence a("alice went home");
    const auto va = embedder.embed_sentence(a).vector;
    CHECK(cosine(va, va) == doctest::Approx(1.0).epsilon(1e-12));
    const auto vb = embedder.embed_sentence(Sentence("bob ran far")).vector;
    CHECK(cosine(va, vb) == 0.0);
    // {the, cat} vs {the, dog}: one shared token out of two each -> 0.5.
    const auto vc = embedder.embed_sentence(Sentence("the cat")).vector;
    const auto vd = embedder.embed_sentence(Sentence("the dog")).vector;
    CHECK(std::abs(cosine(vc, vd) - 0.5) < 1e-12);
}

TEST_CASE("cosine by hand") {
    CHECK(std::abs(cosine({1, 2, 2}, {2, 2, 1}) - 8.0 / 9.0) < 1e-12);
    CHECK(cosine({0, 0}, {1, 0}) == 0.0);
}

TEST_CASE("position scorers") {
    ScriptedScorer scripted({{1, 0.2}, {2, 0.9}});
    CHECK(scripted.score_position("One. <mask> Two. Three.") == 0.2);
    CHECK(scripted.score_position("One. Two. <mask> Three.") == 0.9);
    CHECK(code_of([&] { scripted.score_position("One. Two."); }) == ErrorCode::invalid_argument);
    CHECK(code_of([&] { scripted.score_position("One. <mask> Two. <mask> Three."); }) ==
          ErrorCode::invalid_argument);

    MonotoneScorer monotone;
    const std::vector<Sentence> story{Sentence("A."), Sentence("B."), Sentence("C."), Sentence("D.")};
    std::size_t best = 0;
    double best_p = -1;
    for (std::size_t gap = 1; gap < story.size(); ++gap) {
        std::string text;
        for (std::size_t i = 0; i < story.size(); ++i)
            text += (i == gap ? "<mask> " : "") + story[i].text() + " ";
        const double p = monotone.score_position(text);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        if (p > best_p) {
            best_p = p;
            best = gap;
        }
    }
    CHECK(best == story.size() - 1);

    RandomScorer random(4);
    const double p = random.score_position("A. <mask> B.");
    CHECK(p == RandomScorer(4).score_position("A. <mask> B."));
    CHECK(p >= 0.0);
    CHECK(p < 1.0);
}

TEST_CASE("scorer output outside [0, 1] is rejected") {
    ConstantScorer bad(1.5);
    CHECK(code_of([&] { bad.score_position("A. <mask> B."); }) == ErrorCode::generation_failed);
}

TEST_CASE("stub suite is concurrency safe") {
    auto suite = make_stub_suite();
    CHECK(suite.concurrency_safe());
    suite.infill_generator = std::make_shared<QueueTextGenerator>(std::vector<std::string>{"x"});
    CHECK_FALSE(suite.concurrency_safe());
}

}
