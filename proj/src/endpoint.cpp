#include "bookend/endpoint.hpp"
#include "bookend/text.hpp"

#include <algorithm>
#include <sstream>

namespace bookend {

std::string_view to_string(PhraseListSource source) noexcept {
    return source == PhraseListSource::generated ? "generated" : "user-edited";
}

PhraseListSource parse_phrase_list_source(std::string_view name) {
    if (name == "generated")
        return PhraseListSource::generated;
    if (name == "user-edited")
        return PhraseListSource::user_edited;
    fail(ErrorCode::invalid_argument, "unknown phrase list source", std::string(name));
}

namespace {

std::string_view cut_at_markers(std::string_view raw, const Markers &markers) {
    std::size_t cut = raw.size();
    for (const auto *m : {&markers.mask, &markers.sep, &markers.plist, &markers.stop}) {
        if (m->empty())
            continue;
        if (auto pos = raw.find(*m); pos != std::string_view::npos)
            cut = std::min(cut, pos);
    }
    return raw.substr(0, cut);
}

std::string first_nonblank_line(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (!t.empty())
            return t;
    }
    return {};
}

} // namespace

std::optional<Sentence> first_sentence(std::string_view raw, const Markers &markers) {
    const auto line = first_nonblank_line(cut_at_markers(raw, markers));
    for (const auto &piece : split_sentences(line))
        if (!tokenize(piece).empty())
            return Sentence(piece);
    return std::nullopt;
}

PhraseList parse_phrase_list(std::string_view raw, const Markers &markers, Diagnostics *diag) {
    std::string line = first_nonblank_line(cut_at_markers(raw, markers));
    std::replace(line.begin(), line.end(), ',', ' ');
    auto tokens = tokenize(line);
    if (tokens.empty() && !trim(raw).empty())
        warn(diag, "phrase generator output had no usable tokens; using an empty phrase list");
    return PhraseList(tokens);
}

PhraseList generate_phrase_list(const Sentence &start, TextGenerator &generator,
                                const EndpointConfig &config, Diagnostics *diag) {
    const auto raw = generator.generate({phrase_prompt(start, config.markers), config.params});
    return parse_phrase_list(raw, config.markers, diag);
}

Sentence generate_stop(const Sentence &start, const PhraseList &phrase_list, TextGenerator &generator,
                       const EndpointConfig &config) {
    const auto prompt = stop_prompt(start, phrase_list, config.markers);
    const auto raw = generator.generate({prompt, config.params});
    auto stop = first_sentence(raw, config.markers);
    if (!stop)
        fail(ErrorCode::generation_failed, "stop generation failed", raw);
    return *stop;
}

EndpointResult generate_endpoints(const Sentence &start, TextGenerator &phrase_generator,
                                  TextGenerator &stop_generator, const EndpointConfig &config,
                                  Diagnostics *diag) {
    auto phrase_list = generate_phrase_list(start, phrase_generator, config, diag);
    auto stop = generate_stop(start, phrase_list, stop_generator, config);
    return {start, std::move(phrase_list), std::move(stop), PhraseListSource::generated};
}

EndpointResult generate_endpoints_with(const Sentence &start, PhraseList phrase_list,
                                       TextGenerator &stop_generator, const EndpointConfig &config) {
    auto stop = generate_stop(start, phrase_list, stop_generator, config);
    return {start, std::move(phrase_list), std::move(stop), PhraseListSource::user_edited};
}

} // namespace bookend
