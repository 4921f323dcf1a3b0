#pragma once

// Slow, direct reimplementations used to check the library. None of this
// calls into bookend beyond plain data types.

#include <cstddef>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

/// Whitespace split, lowercase, strip ASCII punctuation at both ends.
Tokens tokens_of(const std::string &text);

/// Dice coefficient by linear scans over deduplicated token lists.
double dice(const Tokens &a, const Tokens &b);

/// Mean over n = 1..max_n of distinct/total n-grams, skipping n longer than
/// the stream; distinctness by pairwise comparison.
double distinct_ngrams(const Tokens &stream, int max_n = 5);

/// Labeled tree without terminals.
struct Tree {
    std::string label;
    std::vector<Tree> children;
};

/// Every fragment rooted at `t`, spelled out as a string: the bare label,
/// and "(label f1 .. fk)" for each choice of one fragment per child.
std::vector<std::string> fragments(const Tree &t);

/// Number of (node pair, shared fragment) triples, counted by listing the
/// fragments of every node of both trees.
double fragment_kernel(const Tree &a, const Tree &b);
double normalized_fragment_kernel(const Tree &a, const Tree &b);

/// Corpus BLEU as originally defined: uniform weights over n = 1..4,
/// modified (clipped) precision p_n pooled over the corpus, BP =
/// exp(1 - r/c) when c <= r, score = 100 * BP * (p_1 p_2 p_3 p_4)^(1/4).
/// Every candidate is expected to hold at least 4 tokens in total.
double corpus_bleu(const std::vector<Tokens> &candidates, const std::vector<Tokens> &references);

/// Mean and population standard deviation by Welford's update.
struct Moments {
    double mean = 0.0;
    double std = 0.0;
};
Moments moments(const std::vector<double> &values);

} // namespace oracle
