#pragma once

#include "bookend/backends.hpp"
#include "bookend/preprocessing.hpp"

#include <optional>
#include <string_view>

namespace bookend {

enum class PhraseListSource { generated, user_edited };

std::string_view to_string(PhraseListSource source) noexcept;
PhraseListSource parse_phrase_list_source(std::string_view name);

struct EndpointResult {
    Sentence start;
    PhraseList phrase_list;
    Sentence stop;
    PhraseListSource phrase_list_source = PhraseListSource::generated;
};

struct EndpointConfig {
    Markers markers;
    GenerationParams params;
};

/// First sentence of a raw completion: the text is cut at the first marker,
/// the first non-blank line is kept and split into sentences. Empty when no
/// sentence with a word token remains.
std::optional<Sentence> first_sentence(std::string_view raw, const Markers &markers);

/// Reads a comma or space separated token list from the first non-blank line
/// of `raw`, normalised with the corpus tokenizer. Unusable output yields an
/// empty list and a warning.
PhraseList parse_phrase_list(std::string_view raw, const Markers &markers, Diagnostics *diag = nullptr);

PhraseList generate_phrase_list(const Sentence &start, TextGenerator &generator,
                                const EndpointConfig &config, Diagnostics *diag = nullptr);

/// Prompts with stop_prompt(start, phrase_list) and keeps the first sentence
/// of the completion; throws generation_failed ("stop generation failed")
/// when there is none.
Sentence generate_stop(const Sentence &start, const PhraseList &phrase_list, TextGenerator &generator,
                       const EndpointConfig &config);

EndpointResult generate_endpoints(const Sentence &start, TextGenerator &phrase_generator,
                                  TextGenerator &stop_generator, const EndpointConfig &config,
                                  Diagnostics *diag = nullptr);

/// Stop generation from a phrase list the user supplied.
EndpointResult generate_endpoints_with(const Sentence &start, PhraseList phrase_list,
                                       TextGenerator &stop_generator, const EndpointConfig &config);

} // namespace bookend
