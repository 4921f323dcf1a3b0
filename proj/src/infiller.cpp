#include "bookend/infiller.hpp"
#include "bookend/endpoint.hpp"

namespace bookend {

InfillState::InfillState(Sentence start, Sentence stop, std::size_t target_length)
    : target_length_(target_length) {
    if (target_length < 2)
        fail(ErrorCode::invalid_argument, "target length must be at least 2");
    sentences_.push_back(std::move(start));
    sentences_.push_back(std::move(stop));
}

InfillState InfillState::replay(Sentence start, Sentence stop, std::size_t target_length,
                                const std::vector<TraceEntry> &trace) {
    InfillState state(std::move(start), std::move(stop), target_length);
    for (const auto &entry : trace)
        state.apply(entry);
    return state;
}

void InfillState::apply(TraceEntry entry) {
    if (complete())
        fail(ErrorCode::conflict, "story already has its target length");
    const auto at = entry.gap.insert_before;
    if (at < 1 || at >= sentences_.size())
        fail(ErrorCode::invalid_argument, "gap outside the story interior",
             "insert_before=" + std::to_string(at));
    sentences_.insert(sentences_.begin() + static_cast<std::ptrdiff_t>(at), entry.sentence);
    trace_.push_back(std::move(entry));
}

std::vector<GapPosition> candidate_gaps(const InfillState &state) {
    if (state.complete())
        fail(ErrorCode::conflict, "story already has its target length");
    std::vector<GapPosition> gaps;
    for (std::size_t i = 1; i < state.sentences().size(); ++i)
        gaps.push_back({i});
    return gaps;
}

GapSelection select_gap(const InfillState &state, PositionScorer &scorer, const Markers &markers) {
    const auto gaps = candidate_gaps(state);
    GapSelection selection;
    selection.scores.reserve(gaps.size());
    double best = -1.0;
    for (const auto &gap : gaps) {
        double p = 0.0;
        try {
            p = scorer.score_position(render_masked(state.sentences(), gap.insert_before, markers.mask));
        } catch (const Error &e) {
            throw Error(e.code(), e.what(),
                        "gap insert_before=" + std::to_string(gap.insert_before) +
                            (e.detail().empty() ? "" : ": " + e.detail()));
        }
        selection.scores.push_back(p);
        if (p > best) {
            best = p;
            selection.gap = gap;
        }
    }
    return selection;
}

Sentence generate_infill(const InfillState &state, GapPosition gap, TextGenerator &generator,
                         const InfillConfig &config) {
    if (gap.insert_before < 1 || gap.insert_before >= state.sentences().size())
        fail(ErrorCode::invalid_argument, "gap is not a candidate of this state");
    const auto prompt = render_infill_context(state.sentences(), gap.insert_before, config.markers);
    const auto raw = generator.generate({prompt, config.params});
    auto sentence = first_sentence(raw, config.markers);
    if (!sentence)
        fail(ErrorCode::generation_failed, "infill generation failed", raw);
    return *sentence;
}

TraceEntry infill_step(InfillState &state, PositionScorer &scorer, TextGenerator &generator,
                       const InfillConfig &config) {
    auto selection = select_gap(state, scorer, config.markers);
    auto sentence = generate_infill(state, selection.gap, generator, config);
    TraceEntry entry{selection.gap, std::move(sentence), std::move(selection.scores)};
    state.apply(entry);
    return entry;
}

InfillResult infill_story(const Sentence &start, const Sentence &stop, std::size_t n,
                          PositionScorer &scorer, TextGenerator &generator, const InfillConfig &config) {
    InfillState state(start, stop, n);
    while (!state.complete()) {
        try {
            infill_step(state, scorer, generator, config);
        } catch (const Error &e) {
            throw InfillAborted(e, state.trace());
        }
    }
    return {state.story(), state.trace()};
}

} // namespace bookend
