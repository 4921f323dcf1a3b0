#include "bookend/llm_pipeline.hpp"
#include "bookend/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

namespace bookend {

PromptMethod prompt_method_from_int(int id) {
    if (id < 1 || id > 6)
        fail(ErrorCode::invalid_argument, "prompt method must be 1..6", std::to_string(id));
    return static_cast<PromptMethod>(id);
}

bool is_two_stage(PromptMethod method) noexcept {
    return method == PromptMethod::phrase_list || method == PromptMethod::salient_question;
}

std::string count_word(std::size_t count) {
    static constexpr std::array<std::string_view, 11> words = {
        "ZERO", "ONE", "TWO", "THREE", "FOUR", "FIVE", "SIX", "SEVEN", "EIGHT", "NINE", "TEN"};
    if (count < words.size())
        return std::string(words[count]);
    return std::to_string(count);
}

namespace {

constexpr std::string_view kNarrativeStart = "Here is the first sentence of a narrative: {start}.";

// Substitutes {name} placeholders. When a value already ends in sentence
// punctuation, a '.' directly after its placeholder is dropped.
std::string render(std::string_view tmpl, const std::map<std::string, std::string, std::less<>> &values) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i);
            auto it = values.find(tmpl.substr(i + 1, close - i - 1));
            if (close == std::string_view::npos || it == values.end())
                fail(ErrorCode::invalid_argument, "template placeholder without a value",
                     std::string(tmpl.substr(i)));
            out += it->second;
            i = close + 1;
            if (i < tmpl.size() && tmpl[i] == '.' && !it->second.empty() && is_terminator(it->second.back()))
                ++i;
            continue;
        }
        out += tmpl[i++];
    }
    return out;
}

std::string with_narrative_start(std::string_view rest, const Sentence &start) {
    return render(std::string(kNarrativeStart) + " " + std::string(rest), {{"start", start.text()}});
}

} // namespace

std::string endpoint_prompt(PromptMethod method, int stage, const Sentence &start,
                            const EndpointIntermediates &intermediates) {
    if (stage != 1 && !(stage == 2 && is_two_stage(method)))
        fail(ErrorCode::invalid_argument, "method has no such stage", std::to_string(stage));
    switch (method) {
    case PromptMethod::phrase_list:
        if (stage == 1)
            return with_narrative_start("What are the most salient words or phrases? Give me a list, "
                                        "where each item is separated by a comma.",
                                        start);
        if (!intermediates.phrase_list)
            fail(ErrorCode::invalid_argument, "method 1 stage 2 needs a phrase list");
        return render("Here is the first sentence and its salient words/phrases: {start} [{list}]. "
                      "Using this first sentence and the list of salient words/phrases, give one "
                      "related closing sentence",
                      {{"start", start.text()}, {"list", intermediates.phrase_list->joined()}});
    case PromptMethod::related:
        return with_narrative_start(
            "Please give me a closing sentence which is related to the first sentence.", start);
    case PromptMethod::salient_question:
        if (stage == 1)
            return with_narrative_start(
                "What is the most salient question to propel the narrative forward?", start);
        if (!intermediates.question)
            fail(ErrorCode::invalid_argument, "method 3 stage 2 needs the salient question");
        return render("Here is the first sentence and relevant question for a narrative: {start} "
                      "{question}. Give me ONE closing sentence that answers the most salient "
                      "question without introducing new questions.",
                      {{"start", start.text()}, {"question", trim(*intermediates.question)}});
    case PromptMethod::matching_ending:
        return with_narrative_start("Please give me a closing sentence that has the same character "
                                    "and/or same related action and/or location.",
                                    start);
    case PromptMethod::stop_entails_start:
        return with_narrative_start(
            "Please give me a closing sentence that entails the first sentence.", start);
    case PromptMethod::start_entails_stop:
        return with_narrative_start(
            "Please give me a closing sentence that is the entailment of the first sentence.", start);
    }
    fail(ErrorCode::invalid_argument, "unknown prompt method");
}

std::vector<std::string> build_endpoint_prompts(PromptMethod method, const Sentence &start,
                                                const EndpointIntermediates &intermediates) {
    std::vector<std::string> prompts{endpoint_prompt(method, 1, start, intermediates)};
    if (is_two_stage(method))
        prompts.push_back(endpoint_prompt(method, 2, start, intermediates));
    return prompts;
}

std::string infill_prompt(const Sentence &start, const Sentence &stop, std::size_t middle_count) {
    return render("Here is the first sentence of a narrative: {start} and here is the last "
                  "sentence: {stop}. What happens between these sentences? Please give me {count} "
                  "consecutive intermediate sentences.",
                  {{"start", start.text()}, {"stop", stop.text()}, {"count", count_word(middle_count)}});
}

std::string long_generation_prompt(const Sentence &start, const Sentence &stop) {
    return render("Here is the first sentence of a narrative: {start} and here is the last "
                  "sentence: {stop}. What happens between these sentences? Please give the "
                  "complete story.",
                  {{"start", start.text()}, {"stop", stop.text()}});
}

std::string baseline_prompt(const Sentence &start, std::size_t continuation_count) {
    return render("Complete the story in {count} sentences: {start}.",
                  {{"start", start.text()}, {"count", count_word(continuation_count)}});
}

std::string ablation_prompt(const Sentence &start, std::size_t continuation_count) {
    return render("Here is the first sentence of a narrative: {start}. Please give me the next "
                  "{count} sentences. Make sure that the last sentence is related to the first "
                  "sentence.",
                  {{"start", start.text()}, {"count", count_word(continuation_count)}});
}

// ---- response cleaning ----

namespace {

bool starts_with_ci(std::string_view text, std::string_view prefix) {
    if (text.size() < prefix.size())
        return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(text[i])) != prefix[i])
            return false;
    return true;
}

bool is_blank(char c) { return c == ' ' || c == '\t'; }

// "Assistant:", "[INST]", "<s>" and friends.
bool strip_role_label(std::string &s) {
    static constexpr std::array<std::string_view, 7> roles = {"assistant", "user", "system", "ai",
                                                              "bot",       "llama", "model"};
    static constexpr std::array<std::string_view, 6> tags = {"[inst]", "[/inst]", "<s>",
                                                             "</s>",   "<<sys>>", "<</sys>>"};
    for (auto tag : tags)
        if (starts_with_ci(s, tag)) {
            s.erase(0, tag.size());
            return true;
        }
    for (auto role : roles) {
        if (!starts_with_ci(s, role))
            continue;
        std::size_t i = role.size();
        while (i < s.size() && is_blank(s[i]))
            ++i;
        if (i < s.size() && s[i] == ':') {
            s.erase(0, i + 1);
            return true;
        }
    }
    return false;
}

// "1.", "2)", "(3)", "-", "*", "•", "#", "Sentence 2:".
bool strip_list_marker(std::string &s) {
    if (s.empty())
        return false;
    if (s[0] == '#') {
        s.erase(0, s.find_first_not_of('#'));
        return true;
    }
    if ((s[0] == '-' || s[0] == '*') && s.size() > 1 && is_blank(s[1])) {
        s.erase(0, 2);
        return true;
    }
    if (s.starts_with("\xE2\x80\xA2")) {
        s.erase(0, 3);
        return true;
    }
    std::size_t i = s[0] == '(' ? 1 : 0;
    std::size_t digits = 0;
    while (i + digits < s.size() && std::isdigit(static_cast<unsigned char>(s[i + digits])))
        ++digits;
    if (digits >= 1 && digits <= 2) {
        std::size_t j = i + digits;
        bool closed = i == 1 ? (j < s.size() && s[j] == ')')
                             : (j < s.size() && (s[j] == '.' || s[j] == ')'));
        if (closed && (j + 1 == s.size() || is_blank(s[j + 1]))) {
            s.erase(0, j + 1);
            return true;
        }
    }
    for (std::string_view label : {"sentence", "step", "answer", "closing sentence", "stop"}) {
        if (!starts_with_ci(s, label))
            continue;
        std::size_t j = label.size();
        while (j < s.size() && (is_blank(s[j]) || std::isdigit(static_cast<unsigned char>(s[j]))))
            ++j;
        if (j < s.size() && s[j] == ':') {
            s.erase(0, j + 1);
            return true;
        }
    }
    return false;
}

bool strip_emphasis(std::string &s) {
    bool changed = false;
    for (std::string_view mark : {"**", "__"}) {
        for (auto pos = s.find(mark); pos != std::string::npos; pos = s.find(mark)) {
            s.erase(pos, mark.size());
            changed = true;
        }
    }
    return changed;
}

bool strip_lead_in(std::string &s) {
    static constexpr std::array<std::string_view, 9> leads = {
        "sure", "certainly", "of course", "okay", "ok", "absolutely", "here is", "here are", "here's"};
    auto colon = s.find(':');
    if (colon == std::string::npos)
        return false;
    for (auto lead : leads) {
        if (starts_with_ci(s, lead)) {
            s.erase(0, colon + 1);
            return true;
        }
    }
    return false;
}

constexpr std::string_view kLeftCurly = "\xE2\x80\x9C";
constexpr std::string_view kRightCurly = "\xE2\x80\x9D";

bool strip_quotes(std::string &s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
        return true;
    }
    if (s.starts_with(kLeftCurly) && s.ends_with(kRightCurly) && s.size() >= 6) {
        s = s.substr(3, s.size() - 6);
        return true;
    }
    if (std::count(s.begin(), s.end(), '"') % 2 == 1) {
        if (s.front() == '"') {
            s.erase(0, 1);
            return true;
        }
        if (s.back() == '"') {
            s.pop_back();
            return true;
        }
    }
    const bool has_left = s.find(kLeftCurly) != std::string::npos;
    const bool has_right = s.find(kRightCurly) != std::string::npos;
    if (s.starts_with(kLeftCurly) && !has_right) {
        s.erase(0, 3);
        return true;
    }
    if (s.ends_with(kRightCurly) && !has_left) {
        s.erase(s.size() - 3);
        return true;
    }
    return false;
}

bool is_acknowledgement(const std::string &s) {
    static constexpr std::array<std::string_view, 6> acks = {"sure", "certainly", "of", "course",
                                                             "okay", "absolutely"};
    auto tokens = tokenize(s);
    if (tokens.empty() || tokens.size() > 2)
        return false;
    return std::all_of(tokens.begin(), tokens.end(), [](const std::string &t) {
        return std::find(acks.begin(), acks.end(), t) != acks.end();
    });
}

std::optional<std::string> strip_noise(std::string_view text) {
    std::string s = trim(text);
    for (;;) {
        bool changed = strip_emphasis(s);
        s = trim(s);
        changed |= strip_role_label(s);
        s = trim(s);
        changed |= strip_list_marker(s);
        s = trim(s);
        changed |= strip_lead_in(s);
        s = trim(s);
        if (!s.empty())
            changed |= strip_quotes(s);
        s = trim(s);
        if (!changed || s.empty())
            break;
    }
    if (s.empty() || s.back() == ':' || is_acknowledgement(s))
        return std::nullopt;
    return s;
}

std::vector<std::string> lines_of(std::string_view raw) {
    std::vector<std::string> lines;
    std::string current;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '\n' || raw[i] == '\r') {
            if (raw[i] == '\r' && i + 1 < raw.size() && raw[i + 1] == '\n')
                ++i;
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current += raw[i];
        }
    }
    lines.push_back(std::move(current));
    return lines;
}

} // namespace

std::vector<Sentence> clean_response(std::string_view raw) {
    std::vector<Sentence> out;
    for (const auto &line : lines_of(raw)) {
        auto cleaned = strip_noise(line);
        if (!cleaned)
            continue;
        for (const auto &piece : split_sentences(*cleaned)) {
            auto sentence = strip_noise(piece);
            if (sentence && !tokenize(*sentence).empty())
                out.emplace_back(*sentence);
        }
    }
    return out;
}

PhraseList parse_llm_phrase_list(std::string_view raw) {
    std::vector<std::string> items;
    for (const auto &line : lines_of(raw)) {
        auto cleaned = strip_noise(line);
        if (!cleaned)
            continue;
        std::size_t begin = 0;
        while (begin <= cleaned->size()) {
            auto end = cleaned->find(',', begin);
            if (end == std::string::npos)
                end = cleaned->size();
            std::string item = trim(std::string_view(*cleaned).substr(begin, end - begin));
            if (starts_with_ci(item, "and "))
                item = trim(item.substr(4));
            while (!item.empty() && std::ispunct(static_cast<unsigned char>(item.back())))
                item.pop_back();
            while (!item.empty() && std::ispunct(static_cast<unsigned char>(item.front())))
                item.erase(0, 1);
            if (!tokenize(item).empty())
                items.push_back(trim(item));
            begin = end + 1;
        }
    }
    return PhraseList(items);
}

// ---- pipeline ----

namespace {

class Conversation {
  public:
    Conversation(ChatGenerator &chat, const LlmConfig &config) : chat_(chat), config_(config) {}

    std::string ask(const std::string &user) {
        std::string reply;
        try {
            reply = chat_.chat(config_.system_prompt, user, config_.params);
        } catch (const Error &e) {
            throw TranscriptError(e, turns_);
        }
        turns_.push_back({config_.system_prompt, user, reply});
        return reply;
    }

    [[noreturn]] void fail_with(ErrorCode code, const std::string &message, std::string detail = {}) {
        throw TranscriptError(Error(code, message, std::move(detail)), turns_);
    }

    std::vector<ChatTurn> &turns() { return turns_; }

  private:
    ChatGenerator &chat_;
    const LlmConfig &config_;
    std::vector<ChatTurn> turns_;
};

StopResult run_stop(Conversation &conv, PromptMethod method, const Sentence &start,
                    const std::optional<PhraseList> &phrase_list_override) {
    EndpointIntermediates intermediates;
    std::string final_prompt;
    if (method == PromptMethod::phrase_list) {
        if (phrase_list_override)
            intermediates.phrase_list = *phrase_list_override;
        else
            intermediates.phrase_list = parse_llm_phrase_list(conv.ask(endpoint_prompt(method, 1, start)));
        final_prompt = endpoint_prompt(method, 2, start, intermediates);
    } else if (method == PromptMethod::salient_question) {
        intermediates.question = conv.ask(endpoint_prompt(method, 1, start));
        final_prompt = endpoint_prompt(method, 2, start, intermediates);
    } else {
        final_prompt = endpoint_prompt(method, 1, start);
    }
    const auto reply = conv.ask(final_prompt);
    auto sentences = clean_response(reply);
    if (sentences.empty())
        conv.fail_with(ErrorCode::generation_failed, "stop generation failed", reply);
    return {sentences.front(), std::move(intermediates), conv.turns()};
}

// Drops a leading echo of the start and a trailing echo of the stop.
std::vector<Sentence> strip_echoed_endpoints(std::vector<Sentence> sentences, const Sentence &start,
                                             const Sentence *stop) {
    if (!sentences.empty() && sentences.front() == start)
        sentences.erase(sentences.begin());
    if (stop != nullptr && !sentences.empty() && sentences.back() == *stop)
        sentences.pop_back();
    return sentences;
}

std::vector<Sentence> take_exactly(Conversation &conv, std::vector<Sentence> sentences, std::size_t count,
                                   const std::string &reply) {
    if (sentences.size() < count)
        conv.fail_with(ErrorCode::generation_failed, "incomplete infill",
                       "wanted " + std::to_string(count) + " sentences, got " +
                           std::to_string(sentences.size()) + ": " + reply);
    sentences.erase(sentences.begin() + static_cast<std::ptrdiff_t>(count), sentences.end());
    return sentences;
}

std::vector<Sentence> assemble(const Sentence &start, const std::vector<Sentence> &middles,
                               const Sentence *stop) {
    std::vector<Sentence> all{start};
    all.insert(all.end(), middles.begin(), middles.end());
    if (stop != nullptr)
        all.push_back(*stop);
    return all;
}

} // namespace

StopResult generate_stop_llm(PromptMethod method, const Sentence &start, ChatGenerator &chat,
                             const LlmConfig &config, const std::optional<PhraseList> &phrase_list_override) {
    Conversation conv(chat, config);
    return run_stop(conv, method, start, phrase_list_override);
}

InfillLlmResult infill_all_llm(const Sentence &start, const Sentence &stop, std::size_t middle_count,
                               ChatGenerator &chat, const LlmConfig &config) {
    if (middle_count == 0)
        return {};
    Conversation conv(chat, config);
    const auto reply = conv.ask(infill_prompt(start, stop, middle_count));
    auto middles = strip_echoed_endpoints(clean_response(reply), start, &stop);
    middles = take_exactly(conv, std::move(middles), middle_count, reply);
    return {std::move(middles), conv.turns()};
}

std::string_view to_string(LlmVariant variant) noexcept {
    switch (variant) {
    case LlmVariant::standard:
        return "standard";
    case LlmVariant::long_generation:
        return "long";
    case LlmVariant::baseline:
        return "baseline";
    case LlmVariant::ablation:
        return "ablation";
    }
    return "standard";
}

LlmVariant parse_llm_variant(std::string_view name) {
    for (auto v : {LlmVariant::standard, LlmVariant::long_generation, LlmVariant::baseline,
                   LlmVariant::ablation})
        if (to_string(v) == name)
            return v;
    fail(ErrorCode::invalid_argument, "unknown LLM variant", std::string(name));
}

LlmStoryResult generate_story_llm(PromptMethod method, const Sentence &start, std::size_t total_length,
                                  ChatGenerator &chat, const LlmConfig &config, LlmVariant variant) {
    if (variant == LlmVariant::baseline || variant == LlmVariant::ablation)
        return baseline_story_llm(start, total_length, chat, config, variant);
    if (total_length < 2)
        fail(ErrorCode::invalid_argument, "a story needs at least two sentences");
    Conversation conv(chat, config);
    auto stop = run_stop(conv, method, start, std::nullopt);

    std::vector<Sentence> middles;
    if (variant == LlmVariant::long_generation) {
        const auto reply = conv.ask(long_generation_prompt(start, stop.stop));
        middles = strip_echoed_endpoints(clean_response(reply), start, &stop.stop);
    } else if (total_length > 2) {
        const auto count = total_length - 2;
        const auto reply = conv.ask(infill_prompt(start, stop.stop, count));
        middles = take_exactly(conv, strip_echoed_endpoints(clean_response(reply), start, &stop.stop),
                               count, reply);
    }
    Story story(assemble(start, middles, &stop.stop));
    PromptTranscript transcript{conv.turns(), method, variant, stop.intermediates, story};
    return {std::move(story), std::move(transcript)};
}

LlmStoryResult baseline_story_llm(const Sentence &start, std::size_t total_length, ChatGenerator &chat,
                                  const LlmConfig &config, LlmVariant variant) {
    if (total_length < 2)
        fail(ErrorCode::invalid_argument, "a story needs at least two sentences");
    if (variant != LlmVariant::baseline && variant != LlmVariant::ablation)
        fail(ErrorCode::invalid_argument, "baseline_story_llm takes the baseline or ablation variant");
    Conversation conv(chat, config);
    const auto count = total_length - 1;
    const auto prompt =
        variant == LlmVariant::baseline ? baseline_prompt(start, count) : ablation_prompt(start, count);
    const auto reply = conv.ask(prompt);
    auto continuation =
        take_exactly(conv, strip_echoed_endpoints(clean_response(reply), start, nullptr), count, reply);
    Story story(assemble(start, continuation, nullptr));
    PromptTranscript transcript{conv.turns(), std::nullopt, variant, std::nullopt, story};
    return {std::move(story), std::move(transcript)};
}

} // namespace bookend
