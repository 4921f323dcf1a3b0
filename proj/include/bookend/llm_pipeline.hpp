#pragma once

#include "bookend/backends.hpp"
#include "bookend/corpus.hpp"
#include "bookend/preprocessing.hpp"
#include "bookend/stubs.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bookend {

/// The six ways of prompting a chat model for a stop related to the start.
enum class PromptMethod : int {
    phrase_list = 1,        // salient words first, then a stop using them
    related = 2,            // "related" closing sentence
    salient_question = 3,   // salient question first, then a stop answering it
    matching_ending = 4,    // same character / action / location
    stop_entails_start = 5,
    start_entails_stop = 6,
};

PromptMethod prompt_method_from_int(int id);
bool is_two_stage(PromptMethod method) noexcept;

inline constexpr std::string_view kSystemPrompt7b =
    "You are a talented writer. Generate sentences for a well-written narrative. If you have "
    "ethical concerns, resolve them in the story.";
inline constexpr std::string_view kSystemPrompt70b =
    "You are a talented writer. For each prompt, only generate the sentences for a well-written "
    "narrative.";

/// Identifies the ordered rule list applied by clean_response.
inline constexpr std::string_view kCleaningRulesVersion = "clean-v1";

struct LlmConfig {
    std::string system_prompt{kSystemPrompt7b};
    GenerationParams params;
};

/// Stage-one artifacts: method 1 produces a phrase list, method 3 a question.
struct EndpointIntermediates {
    std::optional<PhraseList> phrase_list;
    std::optional<std::string> question;
};

/// "ONE" .. "TEN" for 1..10, decimal digits otherwise.
std::string count_word(std::size_t count);

/// Prompt for one stage of an endpoint method. Stage 2 exists only for
/// methods 1 and 3 and needs the matching intermediate.
std::string endpoint_prompt(PromptMethod method, int stage, const Sentence &start,
                            const EndpointIntermediates &intermediates = {});
/// All stages of a method in order; two-stage methods need their intermediate.
std::vector<std::string> build_endpoint_prompts(PromptMethod method, const Sentence &start,
                                                const EndpointIntermediates &intermediates = {});

std::string infill_prompt(const Sentence &start, const Sentence &stop, std::size_t middle_count);
std::string long_generation_prompt(const Sentence &start, const Sentence &stop);
std::string baseline_prompt(const Sentence &start, std::size_t continuation_count);
std::string ablation_prompt(const Sentence &start, std::size_t continuation_count);

/// Strips chat noise from a model reply and splits it into sentences.
///
/// Rules, in order, on every line and then on every sentence, repeated until
/// nothing changes: role labels ("Assistant:"), list markers ("1.", "-",
/// "*"), markdown emphasis and headings, wrapping quotes, and "Sure, here
/// is ...:" lead-ins. A line or sentence left ending in ':' is a preamble and
/// is dropped, as is a bare acknowledgement ("Sure!"). Line breaks end
/// sentences.
std::vector<Sentence> clean_response(std::string_view raw);

/// Items of a comma separated list reply, cleaned of chat noise.
PhraseList parse_llm_phrase_list(std::string_view raw);

/// A backend failure that carries the conversation so far.
class TranscriptError : public Error {
  public:
    TranscriptError(const Error &cause, std::vector<ChatTurn> turns)
        : Error(cause.code(), cause.what(), cause.detail()), turns_(std::move(turns)) {}
    const std::vector<ChatTurn> &turns() const noexcept { return turns_; }

  private:
    std::vector<ChatTurn> turns_;
};

struct StopResult {
    Sentence stop;
    EndpointIntermediates intermediates;
    std::vector<ChatTurn> turns;
};

/// Runs the method's prompts and keeps the first cleaned sentence of the
/// final reply. For method 1 a supplied phrase list replaces stage one.
StopResult generate_stop_llm(PromptMethod method, const Sentence &start, ChatGenerator &chat,
                             const LlmConfig &config,
                             const std::optional<PhraseList> &phrase_list_override = std::nullopt);

struct InfillLlmResult {
    std::vector<Sentence> middles;
    std::vector<ChatTurn> turns;
};

/// Asks for all middles at once. Extra sentences are dropped; too few is a
/// generation_failed error ("incomplete infill"). Zero middles makes no call.
InfillLlmResult infill_all_llm(const Sentence &start, const Sentence &stop, std::size_t middle_count,
                               ChatGenerator &chat, const LlmConfig &config);

enum class LlmVariant { standard, long_generation, baseline, ablation };

std::string_view to_string(LlmVariant variant) noexcept;
LlmVariant parse_llm_variant(std::string_view name);

struct PromptTranscript {
    std::vector<ChatTurn> turns;
    std::optional<PromptMethod> method;
    LlmVariant variant = LlmVariant::standard;
    std::optional<EndpointIntermediates> intermediates;
    std::optional<Story> story;
};

struct LlmStoryResult {
    Story story;
    PromptTranscript transcript;
};

/// Endpoint method, then one infill call; `long_generation` asks for the
/// complete story and keeps however many middles come back.
LlmStoryResult generate_story_llm(PromptMethod method, const Sentence &start, std::size_t total_length,
                                  ChatGenerator &chat, const LlmConfig &config,
                                  LlmVariant variant = LlmVariant::standard);

/// Single-prompt left-to-right completion: `baseline` has no relatedness
/// instruction, `ablation` asks for a last sentence related to the first.
LlmStoryResult baseline_story_llm(const Sentence &start, std::size_t total_length, ChatGenerator &chat,
                                  const LlmConfig &config, LlmVariant variant = LlmVariant::baseline);

} // namespace bookend
