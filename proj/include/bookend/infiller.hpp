#pragma once

#include "bookend/backends.hpp"
#include "bookend/preprocessing.hpp"

#include <compare>
#include <vector>

namespace bookend {

/// A boundary between two consecutive sentences: the new sentence goes in
/// front of `insert_before` (1 <= insert_before <= size-1), never before the
/// start or after the stop.
struct GapPosition {
    std::size_t insert_before = 1;
    auto operator<=>(const GapPosition &) const = default;
};

/// One infilling iteration: the chosen gap, the sentence placed there and
/// the score of every candidate gap in ascending order.
struct TraceEntry {
    GapPosition gap;
    Sentence sentence;
    std::vector<double> scores;
    friend bool operator==(const TraceEntry &, const TraceEntry &) = default;
};

class InfillState {
  public:
    InfillState(Sentence start, Sentence stop, std::size_t target_length);

    /// Rebuilds a state by re-applying a stored trace.
    static InfillState replay(Sentence start, Sentence stop, std::size_t target_length,
                              const std::vector<TraceEntry> &trace);

    const std::vector<Sentence> &sentences() const noexcept { return sentences_; }
    std::size_t target_length() const noexcept { return target_length_; }
    const std::vector<TraceEntry> &trace() const noexcept { return trace_; }
    bool complete() const noexcept { return sentences_.size() == target_length_; }

    void apply(TraceEntry entry);
    Story story() const { return Story(sentences_); }

  private:
    std::vector<Sentence> sentences_;
    std::size_t target_length_;
    std::vector<TraceEntry> trace_;
};

struct InfillConfig {
    Markers markers;
    GenerationParams params;
};

struct GapSelection {
    GapPosition gap;
    std::vector<double> scores;
};

struct InfillResult {
    Story story;
    std::vector<TraceEntry> trace;
};

/// Thrown when a backend fails mid-run; carries the iterations that finished.
class InfillAborted : public Error {
  public:
    InfillAborted(const Error &cause, std::vector<TraceEntry> partial_trace)
        : Error(cause.code(), cause.what(), cause.detail()), partial_trace_(std::move(partial_trace)) {}
    const std::vector<TraceEntry> &partial_trace() const noexcept { return partial_trace_; }

  private:
    std::vector<TraceEntry> partial_trace_;
};

/// Every adjacent pair of the current story, ascending. Throws conflict when
/// the state is already complete.
std::vector<GapPosition> candidate_gaps(const InfillState &state);

/// Scores each candidate gap's masked rendering and returns the argmax;
/// ties go to the smallest insert_before.
GapSelection select_gap(const InfillState &state, PositionScorer &scorer, const Markers &markers);

/// Prompts with "left <mask> right <sep>" and keeps the first sentence of
/// the completion.
Sentence generate_infill(const InfillState &state, GapPosition gap, TextGenerator &generator,
                         const InfillConfig &config);

/// One select_gap + generate_infill, applied to `state`.
TraceEntry infill_step(InfillState &state, PositionScorer &scorer, TextGenerator &generator,
                       const InfillConfig &config);

/// Infills until the story has n sentences (n-2 iterations). Backend
/// failures surface as InfillAborted with the partial trace.
InfillResult infill_story(const Sentence &start, const Sentence &stop, std::size_t n,
                          PositionScorer &scorer, TextGenerator &generator, const InfillConfig &config);

} // namespace bookend
