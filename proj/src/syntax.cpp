#include "bookend/syntax.hpp"
#include "bookend/text.hpp"

#include <cctype>
#include <cmath>
#include <algorithm>
#include <set>
#include <sstream>

namespace bookend {

namespace {

class BracketReader {
  public:
    explicit BracketReader(std::string_view text) : text_(text) {}

    SyntaxTree read_tree() {
        skip_space();
        expect('(');
        SyntaxTree node;
        node.label = read_atom();
        if (node.label.empty())
            error("node without a label");
        for (;;) {
            skip_space();
            if (pos_ >= text_.size())
                error("unbalanced brackets");
            if (text_[pos_] == ')') {
                ++pos_;
                return node;
            }
            if (text_[pos_] == '(') {
                node.children.push_back(read_tree());
            } else {
                SyntaxTree leaf;
                leaf.label = read_atom();
                leaf.terminal = true;
                node.children.push_back(std::move(leaf));
            }
        }
    }

    void finish() {
        skip_space();
        if (pos_ != text_.size())
            error("trailing text after tree");
    }

  private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }
    void expect(char c) {
        if (pos_ >= text_.size() || text_[pos_] != c)
            error(std::string("expected '") + c + "'");
        ++pos_;
    }
    std::string read_atom() {
        skip_space();
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
               !std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }
    [[noreturn]] void error(const std::string &what) {
        fail(ErrorCode::parse, "malformed bracketed tree: " + what, "at offset " + std::to_string(pos_));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

void write_bracketed(const SyntaxTree &tree, std::string &out) {
    if (tree.terminal) {
        out += tree.label;
        return;
    }
    out += '(';
    out += tree.label;
    for (const auto &child : tree.children) {
        out += ' ';
        write_bracketed(child, out);
    }
    out += ')';
}

// Post-order flattening; every node lists its children's indices.
struct FlatNode {
    const SyntaxTree *tree;
    std::vector<std::size_t> children;
};

std::size_t flatten(const SyntaxTree &tree, std::vector<FlatNode> &out) {
    std::vector<std::size_t> kids;
    for (const auto &child : tree.children)
        kids.push_back(flatten(child, out));
    out.push_back({&tree, std::move(kids)});
    return out.size() - 1;
}

bool same_child_labels(const SyntaxTree &a, const SyntaxTree &b) {
    if (a.children.size() != b.children.size())
        return false;
    for (std::size_t j = 0; j < a.children.size(); ++j)
        if (a.children[j].label != b.children[j].label)
            return false;
    return true;
}

} // namespace

SyntaxTree parse_bracketed(std::string_view text) {
    BracketReader reader(text);
    auto tree = reader.read_tree();
    reader.finish();
    return tree;
}

std::string to_bracketed(const SyntaxTree &tree) {
    std::string out;
    write_bracketed(tree, out);
    return out;
}

SyntaxTree strip_terminals(const SyntaxTree &tree) {
    SyntaxTree out{tree.label, {}, tree.terminal};
    for (const auto &child : tree.children)
        if (!child.terminal)
            out.children.push_back(strip_terminals(child));
    return out;
}

std::size_t node_count(const SyntaxTree &tree) {
    std::size_t n = 1;
    for (const auto &child : tree.children)
        n += node_count(child);
    return n;
}

double tree_kernel(const SyntaxTree &a, const SyntaxTree &b) {
    std::vector<FlatNode> na;
    std::vector<FlatNode> nb;
    flatten(a, na);
    flatten(b, nb);
    // Children precede parents in post-order, so C is filled bottom-up.
    std::vector<double> common(na.size() * nb.size(), 0.0);
    auto at = [&](std::size_t i, std::size_t j) -> double & { return common[i * nb.size() + j]; };
    double total = 0.0;
    for (std::size_t i = 0; i < na.size(); ++i) {
        for (std::size_t j = 0; j < nb.size(); ++j) {
            const SyntaxTree &x = *na[i].tree;
            const SyntaxTree &y = *nb[j].tree;
            if (x.label != y.label)
                continue;
            double c = 1.0;
            if (!x.children.empty() && same_child_labels(x, y)) {
                double product = 1.0;
                for (std::size_t k = 0; k < na[i].children.size(); ++k)
                    product *= at(na[i].children[k], nb[j].children[k]);
                c += product;
            }
            at(i, j) = c;
            total += c;
        }
    }
    return total;
}

double normalized_tree_kernel(const SyntaxTree &a, const SyntaxTree &b) {
    const double kab = tree_kernel(a, b);
    if (kab == 0.0)
        return 0.0;
    return kab / std::sqrt(tree_kernel(a, a) * tree_kernel(b, b));
}

namespace {

const std::set<std::string, std::less<>> &lexicon(std::string_view tag) {
    static const std::set<std::string, std::less<>> dt{"the", "a", "an", "this", "that", "these",
                                                       "those", "every", "each", "some", "any", "no"};
    static const std::set<std::string, std::less<>> prp{"i", "you", "he", "she", "it", "we", "they",
                                                        "me", "him", "us", "them"};
    static const std::set<std::string, std::less<>> prps{"my", "your", "his", "her", "its", "our", "their"};
    static const std::set<std::string, std::less<>> in{
        "in", "on", "at", "of", "for", "with", "to", "from", "by", "about", "into", "over",
        "under", "after", "before", "during", "through", "near", "since", "until", "without"};
    static const std::set<std::string, std::less<>> cc{"and", "or", "but", "so", "yet"};
    static const std::set<std::string, std::less<>> md{"will", "would", "can", "could", "should",
                                                       "may", "might", "must", "shall"};
    static const std::set<std::string, std::less<>> vb{"is", "are", "was", "were", "be", "been",
                                                       "being", "am", "has", "have", "had", "do",
                                                       "does", "did", "got", "went", "made"};
    static const std::set<std::string, std::less<>> rb{"not", "never", "very", "too", "also", "just",
                                                       "then", "now", "finally", "really", "always",
                                                       "often", "again", "there", "here"};
    static const std::set<std::string, std::less<>> none;
    if (tag == "DT") return dt;
    if (tag == "PRP") return prp;
    if (tag == "PRP$") return prps;
    if (tag == "IN") return in;
    if (tag == "CC") return cc;
    if (tag == "MD") return md;
    if (tag == "VB") return vb;
    if (tag == "RB") return rb;
    return none;
}

std::string tag_word(const std::string &raw, const std::string &token, bool sentence_initial) {
    for (std::string_view tag : {"DT", "PRP$", "PRP", "IN", "CC", "MD", "VB", "RB"})
        if (lexicon(tag).count(token))
            return std::string(tag);
    if (std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); }))
        return "CD";
    if (token.size() > 4 && token.ends_with("ly"))
        return "RB";
    if (token.size() > 4 && token.ends_with("ing"))
        return "VBG";
    if (token.size() > 3 && token.ends_with("ed"))
        return "VBD";
    if (!sentence_initial && !raw.empty() && std::isupper(static_cast<unsigned char>(raw.front())))
        return "NNP";
    if (token.size() > 3 && token.ends_with('s') && !token.ends_with("ss"))
        return "NNS";
    return "NN";
}

std::string chunk_of(const std::string &tag) {
    if (tag == "IN")
        return "PP";
    if (tag == "CC")
        return "CC";
    if (tag == "MD" || tag.starts_with("VB") || tag == "RB")
        return "VP";
    return "NP";
}

} // namespace

SyntaxTree ShallowSyntaxParser::parse(const Sentence &sentence) {
    SyntaxTree root{"S", {}, false};
    std::istringstream words(sentence.text());
    std::string raw;
    bool initial = true;
    while (words >> raw) {
        auto toks = tokenize(raw);
        if (toks.empty())
            continue;
        std::string stripped = raw;
        while (!stripped.empty() && std::ispunct(static_cast<unsigned char>(stripped.front())))
            stripped.erase(0, 1);
        const auto tag = tag_word(stripped, toks.front(), initial);
        initial = false;
        const auto chunk = chunk_of(tag);
        if (root.children.empty() || root.children.back().label != chunk || chunk == "PP" || chunk == "CC")
            root.children.push_back({chunk, {}, false});
        root.children.back().children.push_back({tag, {{toks.front(), {}, true}}, false});
    }
    if (root.children.empty())
        fail(ErrorCode::parse, "no words to parse", sentence.text());
    return root;
}

std::optional<double> syntax_similarity(const Sentence &a, const Sentence &b, SyntaxParser &parser,
                                        Diagnostics *diag) {
    try {
        const auto ta = strip_terminals(parser.parse(a));
        const auto tb = strip_terminals(parser.parse(b));
        return normalized_tree_kernel(ta, tb);
    } catch (const Error &e) {
        if (e.code() != ErrorCode::parse)
            throw;
        warn(diag, std::string("syntax parse failed: ") + e.what());
        return std::nullopt;
    }
}

} // namespace bookend
