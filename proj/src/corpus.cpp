#include "bookend/corpus.hpp"
#include "bookend/error.hpp"
#include "bookend/rng.hpp"
#include "bookend/serialization.hpp"
#include "bookend/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace bookend {

Sentence::Sentence(std::string_view text) : text_(trim(text)), tokens_(tokenize(text_)) {
    if (tokens_.empty())
        fail(ErrorCode::invalid_argument, "sentence has no word tokens", std::string(text));
}

Story::Story(std::vector<Sentence> sentences, std::optional<std::string> id,
             std::optional<std::string> title)
    : sentences_(std::move(sentences)), id_(std::move(id)), title_(std::move(title)) {
    if (sentences_.size() < 2)
        fail(ErrorCode::invalid_argument, "a story needs at least two sentences",
             "got " + std::to_string(sentences_.size()));
}

std::string Story::text() const {
    std::string out;
    for (const auto &s : sentences_) {
        if (!out.empty())
            out += ' ';
        out += s.text();
    }
    return out;
}

std::vector<std::string> Story::tokens() const {
    std::vector<std::string> out;
    for (const auto &s : sentences_)
        out.insert(out.end(), s.tokens().begin(), s.tokens().end());
    return out;
}

Story make_story(const std::vector<std::string> &sentence_texts, std::optional<std::string> id,
                 std::optional<std::string> title) {
    std::vector<Sentence> sentences;
    sentences.reserve(sentence_texts.size());
    for (const auto &t : sentence_texts)
        sentences.emplace_back(t);
    return Story(std::move(sentences), std::move(id), std::move(title));
}

CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "csv" || name == "five-sentence-csv")
        return CorpusFormat::five_sentence_csv;
    if (name == "jsonl")
        return CorpusFormat::jsonl;
    fail(ErrorCode::invalid_argument, "unknown corpus format", std::string(name));
}

std::string_view to_string(CorpusFormat format) noexcept {
    return format == CorpusFormat::jsonl ? "jsonl" : "five-sentence-csv";
}

namespace {

constexpr int kCsvSentences = 5;

// RFC 4180 records; quoted fields may contain commas, quotes and newlines.
std::vector<std::vector<std::string>> read_csv_records(std::string_view content) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    if (content.substr(0, 3) == "\xEF\xBB\xBF")
        i = 3;
    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        bool blank = record.size() == 1 && record[0].empty();
        if (!blank)
            records.push_back(std::move(record));
        record.clear();
        field_started = false;
    };
    for (; i < content.size(); ++i) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n')
                ++i;
            end_record();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (in_quotes)
        fail(ErrorCode::parse, "unterminated quoted field",
             "record " + std::to_string(records.size()));
    if (field_started || !record.empty())
        end_record();
    return records;
}

std::vector<Story> parse_csv(std::string_view content) {
    auto records = read_csv_records(content);
    if (records.empty())
        fail(ErrorCode::parse, "empty corpus file: a header row is required");
    const auto &header = records.front();
    int id_col = -1;
    int title_col = -1;
    int sentence_cols[kCsvSentences] = {-1, -1, -1, -1, -1};
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        std::string name = to_lower(trim(header[c]));
        if (name == "id" || name == "storyid")
            id_col = c;
        else if (name == "title" || name == "storytitle")
            title_col = c;
        else if (name.size() == 9 && name.starts_with("sentence") && name[8] >= '1' &&
                 name[8] <= '5')
            sentence_cols[name[8] - '1'] = c;
    }
    for (int k = 0; k < kCsvSentences; ++k)
        if (sentence_cols[k] < 0)
            fail(ErrorCode::parse, "header is missing column sentence" + std::to_string(k + 1));

    std::vector<Story> stories;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto &row = records[r];
        const std::string where = "row " + std::to_string(r);
        if (row.size() != header.size())
            fail(ErrorCode::parse, where + ": expected " + std::to_string(header.size()) +
                                       " fields, got " + std::to_string(row.size()));
        std::vector<Sentence> sentences;
        for (int k = 0; k < kCsvSentences; ++k) {
            try {
                sentences.emplace_back(row[sentence_cols[k]]);
            } catch (const Error &e) {
                fail(ErrorCode::parse,
                     where + ": sentence" + std::to_string(k + 1) + " is empty or has no words",
                     e.detail());
            }
        }
        std::optional<std::string> id;
        std::optional<std::string> title;
        if (id_col >= 0 && !row[id_col].empty())
            id = row[id_col];
        if (title_col >= 0 && !row[title_col].empty())
            title = row[title_col];
        stories.emplace_back(std::move(sentences), std::move(id), std::move(title));
    }
    return stories;
}

std::vector<Story> parse_jsonl(std::string_view content) {
    if (content.empty())
        fail(ErrorCode::parse, "empty corpus file");
    std::vector<Story> stories;
    std::istringstream in{std::string(content)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const std::string where = "row " + std::to_string(line_no);
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error &e) {
            fail(ErrorCode::parse, where + ": invalid JSON", e.what());
        }
        if (!record.is_object())
            fail(ErrorCode::parse, where + ": record is not an object");
        if (auto kind = record.find("kind"); kind != record.end() && *kind != "story")
            continue;
        try {
            stories.push_back(record.get<Story>());
        } catch (const Error &e) {
            fail(ErrorCode::parse, where + ": " + e.what(), e.detail());
        } catch (const nlohmann::json::exception &e) {
            fail(ErrorCode::parse, where + ": malformed story record", e.what());
        }
    }
    return stories;
}

bool needs_quotes(std::string_view field) {
    return field.find_first_of(",\"\n\r") != std::string_view::npos ||
           (!field.empty() && (field.front() == ' ' || field.back() == ' '));
}

void append_csv_field(std::string &out, std::string_view field) {
    if (!needs_quotes(field)) {
        out += field;
        return;
    }
    out += '"';
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
}

} // namespace

std::vector<Story> parse_corpus(std::string_view content, CorpusFormat format) {
    return format == CorpusFormat::jsonl ? parse_jsonl(content) : parse_csv(content);
}

std::vector<Story> load_corpus(const std::filesystem::path &path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::io, "cannot open corpus file", path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_corpus(buffer.str(), format);
}

std::string format_corpus(const std::vector<Story> &stories, CorpusFormat format) {
    std::string out;
    if (format == CorpusFormat::jsonl) {
        // An empty corpus is a single blank line; zero-byte files are rejected on load.
        if (stories.empty())
            return "\n";
        for (const auto &story : stories) {
            out += nlohmann::json(story).dump();
            out += '\n';
        }
        return out;
    }
    out = "id,title,sentence1,sentence2,sentence3,sentence4,sentence5\n";
    for (const auto &story : stories) {
        if (story.size() != kCsvSentences)
            fail(ErrorCode::invalid_argument, "five-sentence-csv can only hold 5-sentence stories",
                 "story has " + std::to_string(story.size()) + " sentences");
        append_csv_field(out, story.id().value_or(""));
        out += ',';
        append_csv_field(out, story.title().value_or(""));
        for (const auto &s : story.sentences()) {
            out += ',';
            append_csv_field(out, s.text());
        }
        out += '\n';
    }
    return out;
}

void write_stories(const std::vector<Story> &stories, const std::filesystem::path &path,
                   CorpusFormat format) {
    const std::string content = format_corpus(stories, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorCode::io, "cannot write story file", path.string());
    out << content;
    if (!out)
        fail(ErrorCode::io, "short write to story file", path.string());
}

CorpusSplit split_train_val(const std::vector<Story> &stories, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        fail(ErrorCode::invalid_argument, "split ratio must lie in (0, 1)");
    if (stories.size() < 2)
        fail(ErrorCode::invalid_argument, "need at least two stories to split");
    std::vector<std::size_t> order(stories.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    // The epsilon keeps exact products such as 10 * 0.8 from flooring to 7.
    auto train_count = static_cast<std::size_t>(std::floor(stories.size() * ratio + 1e-9));
    train_count = std::clamp<std::size_t>(train_count, 1, stories.size() - 1);
    CorpusSplit split;
    split.seed = seed;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < train_count ? split.train : split.validation).push_back(stories[order[i]]);
    return split;
}

} // namespace bookend
