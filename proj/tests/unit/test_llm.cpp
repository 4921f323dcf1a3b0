#include "doctest.h"

#include "bookend/error.hpp"
#include "bookend/llm_pipeline.hpp"
#include "bookend/text.hpp"

#include "../support/fixtures.hpp"

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

std::string golden(const std::string &name) {
    auto text = fixtures::read_file(fixtures::kSourceDir / "tests" / "golden" / "prompts" / (name + ".txt"));
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
        text.pop_back();
    return text;
}

std::vector<std::string> texts(const std::vector<Sentence> &sentences) {
    std::vector<std::string> out;
    for (const auto &s : sentences)
        out.push_back(s.text());
    return out;
}

std::string joined(const std::vector<Sentence> &sentences) { return join(texts(sentences), "\n"); }

const Sentence kStartS(fixtures::kStart);
const Sentence kStopS(fixtures::kStop);
const std::string kQuestion = "Will they find a home they love?";

// Wraps clean sentences in the kinds of chatter chat models add.
std::string noisy(Rng &rng) {
    static const std::vector<std::string> lead_ins = {
        "", "Sure! Here are the sentences:\n", "Assistant: ", "Here is the story:\n", "Sure, here is one:\n",
        "Of course!\n"};
    static const std::vector<std::string> bullets = {"", "1. ", "- ", "* ", "**", "\"", "## "};
    std::string out = lead_ins[rng.below(lead_ins.size())];
    for (std::size_t i = 0, count = rng.between(0, 4); i < count; ++i) {
        auto bullet = bullets[rng.below(bullets.size())];
        if (bullet == "1. ")
            bullet = std::to_string(i + 1) + ". ";
        auto sentence = fixtures::random_sentence(rng);
        if (bullet == "**")
            sentence = "**" + sentence + "**";
        else if (bullet == "\"")
            sentence = "\"" + sentence + "\"";
        else
            sentence = bullet + sentence;
        out += sentence;
        out += rng.below(2) == 0 ? "\n" : " ";
    }
    if (rng.below(4) == 0)
        out += "  \n";
    return out;
}

} // namespace

TEST_SUITE("llm") {

TEST_CASE("endpoint prompts match the golden templates") {
    EndpointIntermediates plist;
    plist.phrase_list = PhraseList({"husband", "wife", "new home"});
    EndpointIntermediates question;
    question.question = kQuestion;

    CHECK(endpoint_prompt(PromptMethod::phrase_list, 1, kStartS) == golden("method_1_1"));
    CHECK(endpoint_prompt(PromptMethod::phrase_list, 2, kStartS, plist) == golden("method_1_2"));
    CHECK(endpoint_prompt(PromptMethod::related, 1, kStartS) == golden("method_2"));
    CHECK(endpoint_prompt(PromptMethod::salient_question, 1, kStartS) == golden("method_3_1"));
    CHECK(endpoint_prompt(PromptMethod::salient_question, 2, kStartS, question) == golden("method_3_2"));
    CHECK(endpoint_prompt(PromptMethod::matching_ending, 1, kStartS) == golden("method_4"));
    CHECK(endpoint_prompt(PromptMethod::stop_entails_start, 1, kStartS) == golden("method_5"));
    CHECK(endpoint_prompt(PromptMethod::start_entails_stop, 1, kStartS) == golden("method_6"));
    CHECK(infill_prompt(kStartS, kStopS, 3) == golden("infill"));
    CHECK(long_generation_prompt(kStartS, kStopS) == golden("long_generation"));
    CHECK(baseline_prompt(kStartS, 4) == golden("baseline"));
    CHECK(ablation_prompt(kStartS, 4) == golden("ablation"));
}

TEST_CASE("stage rules") {
    CHECK(code_of([] { endpoint_prompt(PromptMethod::phrase_list, 2, kStartS); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { endpoint_prompt(PromptMethod::related, 2, kStartS); }) == ErrorCode::invalid_argument);
    CHECK(build_endpoint_prompts(PromptMethod::related, kStartS).size() == 1);
    EndpointIntermediates q;
    q.question = kQuestion;
    const auto two = build_endpoint_prompts(PromptMethod::salient_question, kStartS, q);
    REQUIRE(two.size() == 2);
    CHECK(two[1].find(kQuestion) != std::string::npos);
    CHECK(code_of([] { prompt_method_from_int(7); }) == ErrorCode::invalid_argument);
    CHECK(count_word(3) == "THREE");
    CHECK(count_word(10) == "TEN");
    CHECK(count_word(23) == "23");
}

TEST_CASE("clean_response fixtures") {
    CHECK(texts(clean_response("Sure! Here are the sentences:\n1. A.\n2. B.")) ==
          std::vector<std::string>{"A.", "B."});
    CHECK(texts(clean_response("The dog ran home.")) == std::vector<std::string>{"The dog ran home."});
    CHECK(clean_response("").empty());
    CHECK(texts(clean_response("Assistant: \"They finally moved in.\"")) ==
          std::vector<std::string>{"They finally moved in."});
    CHECK(texts(clean_response("Here is a closing sentence:\n\n**They found it.**")) ==
          std::vector<std::string>{"They found it."});
    CHECK(texts(clean_response("- One thing.\n- Two things.\n* Three things.")) ==
          std::vector<std::string>{"One thing.", "Two things.", "Three things."});
    CHECK(texts(clean_response("Sure!")) == std::vector<std::string>{});
    CHECK(texts(clean_response("First line\nSecond line.")) ==
          std::vector<std::string>{"First line", "Second line."});
}

TEST_CASE("clean_response is idempotent on noisy replies") {
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        const auto raw = noisy(rng);
        const auto once = joined(clean_response(raw));
        CHECK_MESSAGE(joined(clean_response(once)) == once, raw);
    }
}

TEST_CASE("phrase list replies") {
    CHECK(parse_llm_phrase_list("home, family").tokens() == std::vector<std::string>{"home", "family"});
    CHECK(parse_llm_phrase_list("Sure! Here is the list:\nhusband, wife, new home.").tokens() ==
          std::vector<std::string>{"husband", "wife", "new home"});
}

TEST_CASE("stop generation through chat") {
    LlmConfig cfg;
    ScriptedChatGenerator chat;
    chat.add(cfg.system_prompt, endpoint_prompt(PromptMethod::related, 1, kStartS),
             "Here is a closing sentence:\n\"" + fixtures::kStop + "\"");
    const auto result = generate_stop_llm(PromptMethod::related, kStartS, chat, cfg);
    CHECK(result.stop.text() == fixtures::kStop);
    CHECK(result.turns.size() == 1);

    ScriptedChatGenerator replay(result.turns);
    CHECK(generate_stop_llm(PromptMethod::related, kStartS, replay, cfg).stop == result.stop);

    EndpointIntermediates plist;
    plist.phrase_list = PhraseList({"home", "family"});
    ScriptedChatGenerator two;
    two.add(cfg.system_prompt, endpoint_prompt(PromptMethod::phrase_list, 1, kStartS), "home, family");
    two.add(cfg.system_prompt, endpoint_prompt(PromptMethod::phrase_list, 2, kStartS, plist), fixtures::kStop);
    const auto r1 = generate_stop_llm(PromptMethod::phrase_list, kStartS, two, cfg);
    REQUIRE(r1.intermediates.phrase_list.has_value());
    CHECK(r1.intermediates.phrase_list->tokens() == std::vector<std::string>{"home", "family"});
    CHECK(r1.turns.size() == 2);

    ScriptedChatGenerator empty;
    empty.add(cfg.system_prompt, endpoint_prompt(PromptMethod::related, 1, kStartS), "Sure!");
    try {
        generate_stop_llm(PromptMethod::related, kStartS, empty, cfg);
        FAIL("expected an error");
    } catch (const TranscriptError &e) {
        CHECK(e.code() == ErrorCode::generation_failed);
        CHECK(e.turns().size() == 1);
    }
}

TEST_CASE("infill through chat") {
    LlmConfig cfg;
    ScriptedChatGenerator chat;
    chat.add(cfg.system_prompt, infill_prompt(kStartS, kStopS, 3),
             "1. " + fixtures::kIter1 + "\n2. " + fixtures::kIter3 + "\n3. " + fixtures::kIter2);
    const auto result = infill_all_llm(kStartS, kStopS, 3, chat, cfg);
    CHECK(texts(result.middles) == std::vector<std::string>{fixtures::kIter1, fixtures::kIter3, fixtures::kIter2});

    ScriptedChatGenerator none;
    CHECK(infill_all_llm(kStartS, kStopS, 0, none, cfg).middles.empty());
    CHECK(none.log().empty());

    ScriptedChatGenerator short_reply;
    short_reply.add(cfg.system_prompt, infill_prompt(kStartS, kStopS, 3), fixtures::kIter1);
    try {
        infill_all_llm(kStartS, kStopS, 3, short_reply, cfg);
        FAIL("expected an error");
    } catch (const TranscriptError &e) {
        CHECK(std::string(e.what()) == "incomplete infill");
        CHECK(e.turns().size() == 1);
    }
}

TEST_CASE("whole stories through chat") {
    LlmConfig cfg;
    ScriptedChatGenerator chat;
    chat.add(cfg.system_prompt, endpoint_prompt(PromptMethod::matching_ending, 1, kStartS), fixtures::kStop);
    chat.add(cfg.system_prompt, infill_prompt(kStartS, kStopS, 3),
             fixtures::kIter1 + " " + fixtures::kIter3 + " " + fixtures::kIter2);
    const auto story = generate_story_llm(PromptMethod::matching_ending, kStartS, 5, chat, cfg);
    CHECK(story.story.text() == fixtures::kGoldenOutput);
    CHECK(story.transcript.turns.size() == 2);

    const auto two = generate_story_llm(PromptMethod::matching_ending, kStartS, 2, chat, cfg);
    CHECK(two.story.size() == 2);
    CHECK(two.transcript.turns.size() == 1);

    chat.add(cfg.system_prompt, long_generation_prompt(kStartS, kStopS),
             "A. B. C. D. E. F. G.");
    const auto longer =
        generate_story_llm(PromptMethod::matching_ending, kStartS, 5, chat, cfg, LlmVariant::long_generation);
    CHECK(longer.story.size() == 9);
    CHECK(longer.story.stop() == kStopS);
}

TEST_CASE("baseline and ablation") {
    LlmConfig cfg;
    ScriptedChatGenerator chat;
    chat.add(cfg.system_prompt, baseline_prompt(kStartS, 4), "One. Two. Three. Four.");
    const auto base = baseline_story_llm(kStartS, 5, chat, cfg);
    CHECK(base.story.size() == 5);
    CHECK(base.story.start() == kStartS);
    chat.add(cfg.system_prompt, baseline_prompt(kStartS, 4), "One. Two. Three. Four. Five. Six.");
    CHECK(baseline_story_llm(kStartS, 5, chat, cfg).story.stop().text() == "Four.");
    chat.add(cfg.system_prompt, ablation_prompt(kStartS, 4), "One. Two. Three. A home at last.");
    const auto abl = baseline_story_llm(kStartS, 5, chat, cfg, LlmVariant::ablation);
    CHECK(abl.story.stop().text() == "A home at last.");
    CHECK(abl.transcript.turns.size() == 1);
    CHECK(abl.transcript.turns[0].user == golden("ablation"));
}

TEST_CASE("variant names") {
    for (auto v : {LlmVariant::standard, LlmVariant::long_generation, LlmVariant::baseline, LlmVariant::ablation})
        CHECK(parse_llm_variant(to_string(v)) == v);
    CHECK(code_of([] { parse_llm_variant("other"); }) == ErrorCode::invalid_argument);
}

}
