#include "bookend/cli.hpp"
#include "bookend/corpus.hpp"
#include "bookend/endpoint.hpp"
#include "bookend/infiller.hpp"
#include "bookend/llm_pipeline.hpp"
#include "bookend/metrics.hpp"
#include "bookend/preprocessing.hpp"
#include "bookend/remote.hpp"
#include "bookend/serialization.hpp"
#include "bookend/service.hpp"
#include "bookend/session.hpp"
#include "bookend/text.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace bookend::cli {

using nlohmann::json;

namespace {

struct MarkerOptions {
    Markers markers;

    void add(CLI::App &app) {
        app.add_option("--mask-marker", markers.mask, "Mask marker literal")->capture_default_str();
        app.add_option("--sep-marker", markers.sep, "Separator marker literal")->capture_default_str();
        app.add_option("--plist-marker", markers.plist, "Phrase-list marker literal")->capture_default_str();
        app.add_option("--stop-marker", markers.stop, "Stop marker literal")->capture_default_str();
    }
};

void add_backend_options(CLI::App &app, BackendConfig &b, bool generators) {
    if (generators) {
        app.add_option("--phrase-generator", b.phrase_generator, "echo or http://host:port")->capture_default_str();
        app.add_option("--stop-generator", b.stop_generator, "echo or http://host:port")->capture_default_str();
        app.add_option("--infill-generator", b.infill_generator, "echo or http://host:port")->capture_default_str();
        app.add_option("--chat", b.chat, "echo or http://host:port")->capture_default_str();
        app.add_option("--position-scorer", b.position_scorer,
                       "monotone, constant[:p], random[:seed] or http://host:port")
            ->capture_default_str();
    }
    app.add_option("--token-embedder", b.token_embedder, "hash or http://host:port")->capture_default_str();
    app.add_option("--sentence-embedder", b.sentence_embedder, "hash or http://host:port")->capture_default_str();
    app.add_option("--syntax-parser", b.syntax_parser, "shallow or http://host:port")->capture_default_str();
    app.add_option("--backend-timeout-ms", b.timeout_ms, "Per-request timeout for HTTP backends")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
}

json backend_json(const BackendConfig &b) {
    return {{"phrase_generator", b.phrase_generator}, {"stop_generator", b.stop_generator},
            {"infill_generator", b.infill_generator}, {"chat", b.chat},
            {"token_embedder", b.token_embedder},     {"sentence_embedder", b.sentence_embedder},
            {"position_scorer", b.position_scorer},   {"syntax_parser", b.syntax_parser},
            {"timeout_ms", b.timeout_ms}};
}

CorpusFormat format_for(const std::string &format, const std::filesystem::path &path) {
    if (format != "auto")
        return parse_corpus_format(format);
    return path.extension() == ".csv" ? CorpusFormat::five_sentence_csv : CorpusFormat::jsonl;
}

void write_text(const std::filesystem::path &path, const std::string &content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    if (!out)
        fail(ErrorCode::io, "cannot write output file", path.string());
}

std::string jsonl(const std::vector<json> &records) {
    std::string out;
    for (const auto &r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

void print_error(std::ostream &err, std::string_view code, const std::string &message, const std::string &detail) {
    err << json{{"error", {{"code", code}, {"message", message}, {"detail", detail}}}}.dump() << '\n';
}

// --- preprocess -----------------------------------------------------------

struct PreprocessOptions {
    std::string corpus;
    std::string format = "auto";
    std::string out_dir;
    double gamma = 0.7;
    std::uint64_t seed = 0;
    std::optional<double> split_ratio;
    std::size_t negatives = 1;
    MarkerOptions markers;
    BackendConfig backends;
};

std::uint64_t story_seed(std::uint64_t seed, std::size_t index) {
    return stable_hash(std::to_string(index), seed);
}

void emit_samples(const std::vector<Story> &stories, const PreprocessOptions &o, TokenEmbedder &embedder,
                  const std::filesystem::path &dir, const json &config, json &counts, Diagnostics &diag) {
    const auto &m = o.markers.markers;
    const auto stop_samples = build_stop_samples(stories, embedder, o.gamma, &diag);
    const auto plist_samples = to_phrase_list_samples(stop_samples);
    std::vector<json> stop_records{config};
    std::vector<json> plist_records{config};
    std::vector<json> position_records{config};
    std::vector<json> infill_records{config};
    for (std::size_t i = 0; i < stop_samples.size(); ++i) {
        json s = stop_samples[i];
        s["kind"] = "stop";
        s["prompt"] = stop_prompt(stop_samples[i].start, stop_samples[i].phrase_list, m);
        stop_records.push_back(std::move(s));
        json p = plist_samples[i];
        p["kind"] = "phrase_list";
        p["prompt"] = phrase_prompt(plist_samples[i].start, m);
        plist_records.push_back(std::move(p));
    }
    for (std::size_t i = 0; i < stories.size(); ++i) {
        const auto &story = stories[i];
        const auto story_id = story.id().value_or(std::to_string(i));
        if (story.size() >= 4) {
            for (const auto &sample : build_position_samples(story, story_seed(o.seed, i), m.mask, o.negatives)) {
                json j = sample;
                j["kind"] = "position";
                j["story"] = story_id;
                position_records.push_back(std::move(j));
            }
        } else {
            diag.warn("story " + story_id + " is too short for position samples");
        }
        if (story.size() >= 3) {
            for (const auto &sample : build_infill_samples(story, m)) {
                json j = sample;
                j["kind"] = "infill";
                j["story"] = story_id;
                infill_records.push_back(std::move(j));
            }
        } else {
            diag.warn("story " + story_id + " is too short for infill samples");
        }
    }
    write_text(dir / "phrase_list.jsonl", jsonl(plist_records));
    write_text(dir / "stop.jsonl", jsonl(stop_records));
    write_text(dir / "position.jsonl", jsonl(position_records));
    write_text(dir / "infill.jsonl", jsonl(infill_records));
    counts = {{"phrase_list", plist_records.size() - 1},
              {"stop", stop_records.size() - 1},
              {"position", position_records.size() - 1},
              {"infill", infill_records.size() - 1}};
}

int run_preprocess(const PreprocessOptions &o, std::ostream &out) {
    if (!(o.gamma > 0.0 && o.gamma < 1.0))
        fail(ErrorCode::invalid_argument, "gamma must lie strictly between 0 and 1");
    const auto format = format_for(o.format, o.corpus);
    const auto stories = load_corpus(o.corpus, format);
    const auto suite = make_backend_suite(o.backends, o.markers.markers.mask);
    json config = {{"kind", "config"},
                   {"command", "preprocess"},
                   {"corpus", o.corpus},
                   {"format", to_string(format)},
                   {"gamma", o.gamma},
                   {"seed", o.seed},
                   {"split_ratio", o.split_ratio},
                   {"negatives", o.negatives},
                   {"markers", o.markers.markers},
                   {"token_embedder", suite.token_embedder->id()}};
    Diagnostics diag;
    json summary = {{"config", config}};
    const std::filesystem::path dir(o.out_dir);
    if (o.split_ratio) {
        const auto split = split_train_val(stories, *o.split_ratio, o.seed);
        write_text(dir / "train.jsonl", format_corpus(split.train, CorpusFormat::jsonl));
        write_text(dir / "validation.jsonl", format_corpus(split.validation, CorpusFormat::jsonl));
        emit_samples(split.train, o, *suite.token_embedder, dir / "train", config, summary["train"], diag);
        emit_samples(split.validation, o, *suite.token_embedder, dir / "validation", config,
                     summary["validation"], diag);
    } else {
        emit_samples(stories, o, *suite.token_embedder, dir, config, summary["counts"], diag);
    }
    summary["warnings"] = diag.warnings;
    out << summary.dump(2) << '\n';
    return 0;
}

// "dog, park" -> {"dog", "park"}; PhraseList drops the empties.
std::vector<std::string> split_phrase_arg(const std::string &text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        out.push_back(trim(item));
    return out;
}

// --- generate -------------------------------------------------------------

struct GenerateOptions {
    std::string scheme = "lm";
    int method = 1;
    std::string variant = "standard";
    std::vector<std::string> starts;
    std::string starts_file;
    std::size_t n = 5;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t jobs = 1;
    std::optional<std::string> phrase_list;
    int max_new_tokens = 64;
    double temperature = 0.0;
    std::string system_prompt = "7b";
    MarkerOptions markers;
    BackendConfig backends;
};

std::string resolve_system_prompt(const std::string &choice) {
    if (choice == "7b")
        return std::string(kSystemPrompt7b);
    if (choice == "70b")
        return std::string(kSystemPrompt70b);
    return choice;
}

std::vector<std::string> read_starts(const GenerateOptions &o) {
    std::vector<std::string> starts = o.starts;
    if (!o.starts_file.empty()) {
        std::ifstream in(o.starts_file);
        if (!in)
            fail(ErrorCode::io, "cannot open starts file", o.starts_file);
        std::string line;
        while (std::getline(in, line))
            if (!trim(line).empty())
                starts.push_back(trim(line));
    }
    if (starts.empty())
        fail(ErrorCode::invalid_argument, "no starts given (use --start or --starts)");
    return starts;
}

json generate_one(const GenerateOptions &o, const std::string &start_text, std::size_t index,
                  const BackendSuite &suite, const GenerationParams &params) {
    char id[32];
    std::snprintf(id, sizeof id, "story-%04zu", index + 1);
    const Sentence start(start_text);
    json record = {{"kind", "story"}, {"id", id}};
    if (o.scheme == "lm") {
        Diagnostics diag;
        const EndpointConfig endpoint_config{o.markers.markers, params};
        const auto endpoints =
            o.phrase_list ? generate_endpoints_with(start, PhraseList(split_phrase_arg(*o.phrase_list), &diag),
                                                    *suite.stop_generator, endpoint_config)
                          : generate_endpoints(start, *suite.phrase_generator, *suite.stop_generator,
                                               endpoint_config, &diag);
        const auto result = infill_story(start, endpoints.stop, o.n, *suite.position_scorer,
                                         *suite.infill_generator, {o.markers.markers, params});
        record["sentences"] = json(result.story)["sentences"];
        record["phrase_list"] = endpoints.phrase_list;
        record["phrase_list_source"] = to_string(endpoints.phrase_list_source);
        record["trace"] = result.trace;
        record["warnings"] = diag.warnings;
        return record;
    }
    const LlmConfig config{resolve_system_prompt(o.system_prompt), params};
    const auto variant = parse_llm_variant(o.variant);
    const auto result =
        variant == LlmVariant::baseline || variant == LlmVariant::ablation
            ? baseline_story_llm(start, o.n, *suite.chat, config, variant)
            : generate_story_llm(prompt_method_from_int(o.method), start, o.n, *suite.chat, config, variant);
    record["sentences"] = json(result.story)["sentences"];
    record["transcript"] = result.transcript;
    return record;
}

int run_generate(const GenerateOptions &o, std::ostream &out, std::ostream &err) {
    if (o.scheme != "lm" && o.scheme != "llm")
        fail(ErrorCode::invalid_argument, "scheme must be lm or llm", o.scheme);
    if (o.n < 2)
        fail(ErrorCode::invalid_argument, "story length n must be at least 2");
    prompt_method_from_int(o.method);
    parse_llm_variant(o.variant);
    const auto starts = read_starts(o);
    const auto suite = make_backend_suite(o.backends, o.markers.markers.mask);
    GenerationParams params;
    params.max_new_tokens = o.max_new_tokens;
    params.temperature = o.temperature;
    params.seed = o.seed;
    params.validate();

    std::size_t jobs = std::max<std::size_t>(1, o.jobs);
    std::vector<std::string> warnings;
    if (jobs > 1 && !suite.concurrency_safe()) {
        warnings.push_back("backends are not safe for concurrent use; running with one job");
        jobs = 1;
    }
    std::vector<json> records(starts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < starts.size(); i = next++) {
            try {
                records[i] = generate_one(o, starts[i], i, suite, params);
            } catch (const Error &e) {
                records[i] = {{"kind", "error"}, {"index", i}, {"start", starts[i]},
                              {"code", to_string(e.code())}, {"message", e.what()}, {"detail", e.detail()}};
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();

    json config = {{"kind", "config"},
                   {"command", "generate"},
                   {"scheme", o.scheme},
                   {"n", o.n},
                   {"seed", o.seed},
                   {"params", params},
                   {"markers", o.markers.markers},
                   {"backends", backend_json(o.backends)},
                   {"backend_ids",
                    {{"phrase_generator", suite.phrase_generator->id()},
                     {"stop_generator", suite.stop_generator->id()},
                     {"infill_generator", suite.infill_generator->id()},
                     {"chat", suite.chat->id()},
                     {"position_scorer", suite.position_scorer->id()}}}};
    if (o.scheme == "llm") {
        config["method"] = o.method;
        config["variant"] = o.variant;
        config["system_prompt"] = resolve_system_prompt(o.system_prompt);
        config["cleaning_rules"] = kCleaningRulesVersion;
    } else {
        config["phrase_list"] = o.phrase_list;
    }
    std::vector<json> lines{config};
    std::size_t failures = 0;
    for (auto &r : records) {
        failures += r["kind"] == "error";
        lines.push_back(std::move(r));
    }
    const auto text = jsonl(lines);
    if (o.out.empty() || o.out == "-")
        out << text;
    else
        write_text(o.out, text);
    for (const auto &w : warnings)
        err << json{{"warning", w}}.dump() << '\n';
    if (failures > 0) {
        print_error(err, "generation_failed", std::to_string(failures) + " of " + std::to_string(starts.size()) +
                                                  " starts failed", "see the error records in the output");
        return kExitPartial;
    }
    return 0;
}

// --- eval -----------------------------------------------------------------

struct EvalOptions {
    std::string stories;
    std::optional<std::string> references;
    std::string format = "auto";
    std::string out;
    std::string table_out;
    std::string smoothing = "none";
    std::string label = "stories";
    BackendConfig backends;
};

int run_eval(const EvalOptions &o, std::ostream &out) {
    const BleuSmoothing smoothing = o.smoothing == "none"      ? BleuSmoothing::none
                                    : o.smoothing == "add-one" ? BleuSmoothing::add_one
                                                               : (fail(ErrorCode::invalid_argument,
                                                                       "smoothing must be none or add-one",
                                                                       o.smoothing),
                                                                  BleuSmoothing::none);
    const auto stories = load_corpus(o.stories, format_for(o.format, o.stories));
    std::optional<std::vector<Story>> references;
    if (o.references)
        references = load_corpus(*o.references, format_for(o.format, *o.references));
    const auto suite = make_backend_suite(o.backends);
    const auto parser = make_syntax_parser(o.backends);
    const auto report =
        evaluate_corpus(stories, references ? &*references : nullptr, *suite.sentence_embedder, *parser, smoothing);
    const auto table = format_report_table(report, o.label);
    json config = {{"command", "eval"},
                   {"stories", o.stories},
                   {"references", o.references},
                   {"smoothing", o.smoothing},
                   {"label", o.label},
                   {"backends", backend_json(o.backends)}};
    json doc = {{"config", config}, {"report", report}, {"table", table}};
    if (o.out.empty() || o.out == "-") {
        out << doc.dump(2) << '\n';
    } else {
        write_text(o.out, doc.dump(2) + "\n");
        out << table;
    }
    if (!o.table_out.empty())
        write_text(o.table_out, table);
    return 0;
}

// --- serve ----------------------------------------------------------------

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir = "sessions";
    std::optional<std::string> static_dir;
    std::size_t n = 5;
    std::uint64_t seed = 0;
    MarkerOptions markers;
    BackendConfig backends;
};

int run_serve(const ServeOptions &o, std::ostream &out) {
    auto suite = make_backend_suite(o.backends, o.markers.markers.mask);
    auto store = std::make_shared<SessionStore>(o.data_dir, std::move(suite), make_syntax_parser(o.backends));
    ServiceOptions options;
    options.host = o.host;
    options.port = o.port;
    options.defaults.n = o.n;
    options.defaults.seed = o.seed;
    options.defaults.markers = o.markers.markers;
    if (o.static_dir)
        options.static_dir = *o.static_dir;
    SessionService service(store, options);
    out << json{{"config", {{"command", "serve"}, {"host", o.host}, {"port", o.port}, {"data_dir", o.data_dir},
                             {"n", o.n}, {"seed", o.seed}, {"backends", backend_json(o.backends)}}},
                {"sessions_loaded", store->ids().size()}}
               .dump()
        << std::endl;
    service.run();
    return 0;
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Bookended story generation and evaluation"};
    app.set_config("--config", "", "TOML or INI file with option values (sections per subcommand)");
    app.require_subcommand(1);

    PreprocessOptions pre;
    auto *preprocess = app.add_subcommand("preprocess", "Build the four training-sample families from a corpus");
    preprocess->add_option("--corpus", pre.corpus, "Corpus file")->required();
    preprocess->add_option("--format", pre.format, "auto, csv or jsonl")->capture_default_str();
    preprocess->add_option("--out", pre.out_dir, "Output directory")->required();
    preprocess->add_option("--gamma", pre.gamma, "Phrase extraction threshold")->capture_default_str();
    preprocess->add_option("--seed", pre.seed, "Seed for splitting and position samples")->capture_default_str();
    preprocess->add_option("--split-ratio", pre.split_ratio, "Train fraction; splits before building samples");
    preprocess->add_option("--negatives", pre.negatives, "Negative position samples per story")->capture_default_str();
    pre.markers.add(*preprocess);
    add_backend_options(*preprocess, pre.backends, false);

    GenerateOptions gen;
    auto *generate = app.add_subcommand("generate", "Generate bookended stories from starts");
    generate->add_option("--scheme", gen.scheme, "lm or llm")->capture_default_str();
    generate->add_option("--method", gen.method, "Endpoint prompting method 1..6 (llm scheme)")
        ->capture_default_str()
        ->check(CLI::Range(1, 6));
    generate->add_option("--variant", gen.variant, "standard, long, baseline or ablation (llm scheme)")
        ->capture_default_str();
    generate->add_option("--start", gen.starts, "Start sentence (repeatable)");
    generate->add_option("--starts", gen.starts_file, "File with one start per line");
    generate->add_option("--n", gen.n, "Sentences per story")->capture_default_str();
    generate->add_option("--seed", gen.seed, "Decoding seed")->capture_default_str();
    generate->add_option("--out", gen.out, "Output JSON-lines file (default stdout)");
    generate->add_option("--jobs", gen.jobs, "Starts processed in parallel")->capture_default_str();
    generate->add_option("--phrase-list", gen.phrase_list, "Comma separated phrase list used for every start (lm)");
    generate->add_option("--max-new-tokens", gen.max_new_tokens)->capture_default_str();
    generate->add_option("--temperature", gen.temperature)->capture_default_str();
    generate->add_option("--system-prompt", gen.system_prompt, "7b, 70b or literal text (llm scheme)")
        ->capture_default_str();
    gen.markers.add(*generate);
    add_backend_options(*generate, gen.backends, true);

    EvalOptions ev;
    auto *eval = app.add_subcommand("eval", "Score stories for endpoint relatedness and quality");
    eval->add_option("--stories", ev.stories, "Story file")->required();
    eval->add_option("--references", ev.references, "Reference story file, aligned by position");
    eval->add_option("--format", ev.format, "auto, csv or jsonl")->capture_default_str();
    eval->add_option("--out", ev.out, "Report JSON file (default stdout)");
    eval->add_option("--table", ev.table_out, "Also write the text table here");
    eval->add_option("--smoothing", ev.smoothing, "BLEU smoothing: none or add-one")->capture_default_str();
    eval->add_option("--label", ev.label, "Row label in the table")->capture_default_str();
    add_backend_options(*eval, ev.backends, false);

    ServeOptions sv;
    auto *serve = app.add_subcommand("serve", "Run the interactive session service");
    serve->add_option("--host", sv.host)->capture_default_str()->envname("BOOKEND_HOST");
    serve->add_option("--port", sv.port)->capture_default_str()->envname("BOOKEND_PORT");
    serve->add_option("--data-dir", sv.data_dir, "Session log directory")->capture_default_str()->envname("BOOKEND_DATA_DIR");
    serve->add_option("--static-dir", sv.static_dir, "Directory served at /");
    serve->add_option("--n", sv.n, "Default sentences per story")->capture_default_str();
    serve->add_option("--seed", sv.seed, "Default seed")->capture_default_str()->envname("BOOKEND_SEED");
    sv.markers.add(*serve);
    add_backend_options(*serve, sv.backends, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError &e) {
        print_error(err, "invalid_argument", e.what(), e.get_name());
        return kExitUsage;
    }

    try {
        if (preprocess->parsed())
            return run_preprocess(pre, out);
        if (generate->parsed())
            return run_generate(gen, out, err);
        if (eval->parsed())
            return run_eval(ev, out);
        return run_serve(sv, out);
    } catch (const Error &e) {
        print_error(err, to_string(e.code()), e.what(), e.detail());
        return e.code() == ErrorCode::invalid_argument ? kExitUsage : kExitFailure;
    } catch (const std::exception &e) {
        print_error(err, "io", e.what(), "");
        return kExitFailure;
    }
}

} // namespace bookend::cli
