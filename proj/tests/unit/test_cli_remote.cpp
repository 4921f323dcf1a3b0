#include "doctest.h"

#include "bookend/cli.hpp"
#include "bookend/corpus.hpp"
#include "bookend/error.hpp"
#include "bookend/remote.hpp"
#include "bookend/stubs.hpp"
#include "bookend/syntax.hpp"

#include "../support/fixtures.hpp"

#include "json.hpp"

#include <sstream>

using namespace bookend;
using nlohmann::json;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "bookend");
    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<json> read_jsonl(const std::filesystem::path &path) {
    std::vector<json> out;
    std::istringstream in(fixtures::read_file(path));
    std::string line;
    while (std::getline(in, line))
        if (!line.empty())
            out.push_back(json::parse(line));
    return out;
}

template <typename F> ErrorCode code_of(F &&f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::io;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("generate is byte-identical across runs") {
    fixtures::TempDir dir;
    const auto starts = dir / "starts.txt";
    fixtures::write_file(starts, fixtures::kStart + "\nThe dog ran to the park.\nAlice lost her keys.\n");
    for (const std::string scheme : {"lm", "llm"}) {
        const auto a = dir / ("a-" + scheme + ".jsonl");
        const auto b = dir / ("b-" + scheme + ".jsonl");
        std::vector<std::string> args{"generate", "--scheme", scheme, "--starts", starts.string(), "--n", "6",
                                      "--seed", "11"};
        auto ra = args;
        ra.insert(ra.end(), {"--out", a.string()});
        auto rb = args;
        rb.insert(rb.end(), {"--out", b.string(), "--jobs", "3"});
        REQUIRE(run_cli(ra).code == 0);
        REQUIRE(run_cli(rb).code == 0);
        const auto text = fixtures::read_file(a);
        CHECK(text == fixtures::read_file(b));
        const auto records = read_jsonl(a);
        REQUIRE(records.size() == 4);
        CHECK(records[0].at("kind") == "config");
        CHECK(records[0].at("seed") == 11);
        for (std::size_t i = 1; i < records.size(); ++i) {
            CHECK(records[i].at("kind") == "story");
            CHECK(records[i].at("sentences").size() == 6);
        }
        CHECK(load_corpus(a, CorpusFormat::jsonl).size() == 3);
    }
}

TEST_CASE("generate with a different seed changes the output") {
    auto a = run_cli({"generate", "--start", fixtures::kStart, "--seed", "1"});
    auto b = run_cli({"generate", "--start", fixtures::kStart, "--seed", "2"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out != b.out);
}

TEST_CASE("eval of a corpus against itself") {
    fixtures::TempDir dir;
    Rng rng(3);
    std::vector<Story> stories;
    for (int i = 0; i < 6; ++i) {
        auto s = fixtures::random_story(rng, 5);
        auto sentences = s.sentences();
        sentences.back() = sentences.front();
        stories.emplace_back(sentences);
    }
    write_stories(stories, dir / "s.jsonl", CorpusFormat::jsonl);
    const auto r = run_cli({"eval", "--stories", (dir / "s.jsonl").string(), "--references",
                            (dir / "s.jsonl").string()});
    REQUIRE(r.code == 0);
    const auto doc = json::parse(r.out);
    CHECK(doc.at("report").at("bleu_corpus") == 100.0);
    CHECK(doc.at("report").at("lexical_overlap").at("mean") == 1.0);
    CHECK(doc.at("report").at("story_count") == 6);
    CHECK(doc.at("config").at("command") == "eval");
    CHECK(doc.at("table").get<std::string>().find("100.00") != std::string::npos);
}

TEST_CASE("eval reads generate output") {
    fixtures::TempDir dir;
    const auto out = dir / "gen.jsonl";
    REQUIRE(run_cli({"generate", "--start", fixtures::kStart, "--start", "Bob went fishing.", "--out", out.string()})
                .code == 0);
    const auto r = run_cli({"eval", "--stories", out.string(), "--out", (dir / "report.json").string(), "--table",
                            (dir / "table.txt").string()});
    REQUIRE(r.code == 0);
    CHECK(json::parse(fixtures::read_file(dir / "report.json")).at("report").at("story_count") == 2);
    CHECK(fixtures::read_file(dir / "table.txt") == r.out);
}

TEST_CASE("preprocess writes the four sample families") {
    fixtures::TempDir dir;
    const auto corpus = dir / "one.csv";
    fixtures::write_file(corpus, "storyid,storytitle,sentence1,sentence2,sentence3,sentence4,sentence5\n"
                                 "x1,Home,A husband and his wife want a home.,They look.,They search.,"
                                 "They find one.,The husband and wife love their home.\n");
    const auto r = run_cli({"preprocess", "--corpus", corpus.string(), "--out", (dir / "out").string()});
    REQUIRE(r.code == 0);
    const auto stop = read_jsonl(dir / "out" / "stop.jsonl");
    const auto infill = read_jsonl(dir / "out" / "infill.jsonl");
    const auto position = read_jsonl(dir / "out" / "position.jsonl");
    const auto plist = read_jsonl(dir / "out" / "phrase_list.jsonl");
    // First record of every file is the run config.
    CHECK(stop.size() == 1 + 1);
    CHECK(plist.size() == 1 + 1);
    CHECK(infill.size() == 1 + 3);
    CHECK(position.size() >= 1 + 2);
    CHECK(stop[0].at("kind") == "config");
    CHECK(stop[1].at("phrase_list") == json{"husband", "and", "wife", "home"});
    const auto summary = json::parse(r.out);
    CHECK(summary.at("counts").at("infill") == 3);
}

TEST_CASE("preprocess with a split") {
    fixtures::TempDir dir;
    Rng rng(8);
    std::vector<Story> stories;
    for (int i = 0; i < 10; ++i)
        stories.push_back(fixtures::random_story(rng, 5, "s" + std::to_string(i)));
    write_stories(stories, dir / "c.jsonl", CorpusFormat::jsonl);
    const auto r = run_cli({"preprocess", "--corpus", (dir / "c.jsonl").string(), "--out", (dir / "out").string(),
                            "--split-ratio", "0.8", "--seed", "7"});
    REQUIRE(r.code == 0);
    CHECK(load_corpus(dir / "out" / "train.jsonl", CorpusFormat::jsonl).size() == 8);
    CHECK(load_corpus(dir / "out" / "validation.jsonl", CorpusFormat::jsonl).size() == 2);
    CHECK(read_jsonl(dir / "out" / "train" / "infill.jsonl").size() == 1 + 8 * 3);
}

TEST_CASE("exit codes and error output") {
    CHECK(run_cli({}).code == cli::kExitUsage);
    CHECK(run_cli({"generate", "--bogus"}).code == cli::kExitUsage);
    const auto missing = run_cli({"eval", "--stories", "/nonexistent/x.jsonl"});
    CHECK(missing.code == cli::kExitFailure);
    CHECK(json::parse(missing.err).at("error").at("code") == "io");
    const auto bad_scheme = run_cli({"generate", "--start", "A.", "--scheme", "gpt"});
    CHECK(bad_scheme.code == cli::kExitUsage);
    CHECK(json::parse(bad_scheme.err).at("error").at("code") == "invalid_argument");

    // A start that is not a sentence fails on its own; the rest are still written.
    const auto partial = run_cli({"generate", "--start", fixtures::kStart, "--start", "...", "--n", "3"});
    CHECK(partial.code == cli::kExitPartial);
    std::istringstream lines(partial.out);
    std::string line;
    std::vector<json> records;
    while (std::getline(lines, line))
        records.push_back(json::parse(line));
    REQUIRE(records.size() == 3);
    CHECK(records[1].at("kind") == "story");
    CHECK(records[2].at("kind") == "error");
}

TEST_CASE("config file supplies option values") {
    fixtures::TempDir dir;
    fixtures::write_file(dir / "run.toml", "[generate]\nseed = 5\nn = 4\n");
    const auto a = run_cli({"--config", (dir / "run.toml").string(), "generate", "--start", fixtures::kStart});
    REQUIRE(a.code == 0);
    const auto config = json::parse(a.out.substr(0, a.out.find('\n')));
    CHECK(config.at("seed") == 5);
    CHECK(config.at("n") == 4);
}

}

TEST_SUITE("remote") {

TEST_CASE("adapters against a served stub suite") {
    auto suite = make_stub_suite();
    auto parser = std::make_shared<ShallowSyntaxParser>();
    BackendServer server(suite, parser);
    server.start();
    const auto url = server.base_url();

    GenerationRequest req;
    req.prompt = fixtures::kStart + " <plist>";
    req.params.seed = 4;
    RemoteTextGenerator gen(url);
    CHECK(gen.generate(req) == suite.infill_generator->generate(req));

    RemoteChatGenerator chat(url);
    CHECK(chat.chat("sys", "hello there", req.params) == suite.chat->chat("sys", "hello there", req.params));

    const Sentence s(fixtures::kStart);
    RemoteTokenEmbedder tokens(url);
    const auto remote_tokens = tokens.embed_tokens(s);
    const auto local_tokens = suite.token_embedder->embed_tokens(s);
    REQUIRE(remote_tokens.size() == local_tokens.size());
    for (std::size_t i = 0; i < local_tokens.size(); ++i) {
        CHECK(remote_tokens[i].token == local_tokens[i].token);
        CHECK(remote_tokens[i].vector == local_tokens[i].vector);
    }

    RemoteSentenceEmbedder sentences(url);
    CHECK(sentences.embed_sentence(s).vector == suite.sentence_embedder->embed_sentence(s).vector);

    RemotePositionScorer scorer(url);
    CHECK(scorer.score_position("A. B. <mask> C.") == suite.position_scorer->score_position("A. B. <mask> C."));

    RemoteSyntaxParser remote_parser(url);
    CHECK(remote_parser.parse(s) == parser->parse(s));

    BackendConfig config;
    config.phrase_generator = url;
    config.position_scorer = url;
    const auto mixed = make_backend_suite(config);
    CHECK(mixed.phrase_generator->id() == "http:" + url);
    CHECK(mixed.stop_generator->id() == "echo");
    server.stop();
}

TEST_CASE("unreachable backends raise transport errors") {
    BackendServer server(make_stub_suite(), std::make_shared<ShallowSyntaxParser>());
    const int port = server.start();
    server.stop();
    RemoteOptions fast;
    fast.timeout = std::chrono::milliseconds(500);
    RemoteTextGenerator gen("http://127.0.0.1:" + std::to_string(port), fast);
    GenerationRequest req;
    req.prompt = "x";
    CHECK(code_of([&] { gen.generate(req); }) == ErrorCode::transport);
}

TEST_CASE("backend specs") {
    BackendConfig config;
    config.position_scorer = "constant:0.25";
    CHECK(make_backend_suite(config).position_scorer->score_position("A. <mask> B.") == 0.25);
    config.position_scorer = "random:3";
    CHECK(make_backend_suite(config).position_scorer->id() == "random-scorer");
    config.position_scorer = "oracle";
    CHECK(code_of([&] { make_backend_suite(config); }) == ErrorCode::invalid_argument);
    config.position_scorer = "monotone";
    config.chat = "https://example.invalid";
    CHECK(code_of([&] { make_backend_suite(config); }) == ErrorCode::invalid_argument);
}

}
