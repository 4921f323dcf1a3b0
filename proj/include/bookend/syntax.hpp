#pragma once

#include "bookend/corpus.hpp"
#include "bookend/error.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bookend {

/// Ordered labeled tree. Word leaves of a constituency parse are marked
/// `terminal`; the similarity kernel ignores them.
struct SyntaxTree {
    std::string label;
    std::vector<SyntaxTree> children;
    bool terminal = false;

    friend bool operator==(const SyntaxTree &, const SyntaxTree &) = default;
};

/// Reads Penn-style brackets: "(S (NP (DT the) (NN dog)) (VP (VBD ran)))".
/// Bare words become terminal leaves. Malformed input throws ErrorCode::parse.
SyntaxTree parse_bracketed(std::string_view text);
std::string to_bracketed(const SyntaxTree &tree);

/// Copy of `tree` without terminal leaves.
SyntaxTree strip_terminals(const SyntaxTree &tree);
std::size_t node_count(const SyntaxTree &tree);

/// Labeled-fragment kernel: sums, over all node pairs, the number of
/// identical fragments rooted at both. A fragment rooted at a node is the
/// node alone or the node with its full child list, each child expanded into
/// one of its own fragments. Recurrence:
///   C(a,b) = 0                                   if labels differ
///   C(a,b) = 1 + [same child labels] * prod_j C(a_j, b_j)   otherwise
double tree_kernel(const SyntaxTree &a, const SyntaxTree &b);

/// K(a,b) / sqrt(K(a,a) K(b,b)), in [0, 1].
double normalized_tree_kernel(const SyntaxTree &a, const SyntaxTree &b);

/// Pluggable constituency parser.
class SyntaxParser {
  public:
    virtual ~SyntaxParser() = default;
    /// Throws ErrorCode::parse when the sentence cannot be parsed.
    virtual SyntaxTree parse(const Sentence &sentence) = 0;
    virtual std::string id() const = 0;
    virtual bool concurrency_safe() const { return false; }
};

/// Lexicon-and-suffix tagger with flat NP/VP/PP chunking. A dependency-free
/// default; attach a real parser for anything beyond smoke tests.
class ShallowSyntaxParser final : public SyntaxParser {
  public:
    SyntaxTree parse(const Sentence &sentence) override;
    std::string id() const override { return "shallow-chunker"; }
    bool concurrency_safe() const override { return true; }
};

/// Normalized label kernel of the two parses with terminals removed, or
/// nullopt (and a warning) when either parse fails.
std::optional<double> syntax_similarity(const Sentence &a, const Sentence &b, SyntaxParser &parser,
                                        Diagnostics *diag = nullptr);

} // namespace bookend
