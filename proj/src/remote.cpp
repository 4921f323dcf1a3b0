#include "bookend/remote.hpp"
#include "bookend/serialization.hpp"
#include "bookend/stubs.hpp"
#include "bookend/text.hpp"

#include "httplib.h"
#include "json.hpp"

#include <thread>

namespace bookend {

using nlohmann::json;

namespace {

struct Endpoint {
    std::string origin; // scheme://host:port
    std::string prefix; // path without trailing slash
};

Endpoint split_url(const std::string &url) {
    if (!url.starts_with("http://"))
        fail(ErrorCode::invalid_argument, "backend URL must start with http://", url);
    const auto path_at = url.find('/', 7);
    Endpoint out;
    out.origin = url.substr(0, path_at);
    if (path_at != std::string::npos)
        out.prefix = url.substr(path_at);
    while (!out.prefix.empty() && out.prefix.back() == '/')
        out.prefix.pop_back();
    if (out.origin.size() <= 7)
        fail(ErrorCode::invalid_argument, "backend URL has no host", url);
    return out;
}

json post(const std::string &base_url, const std::string &path, const json &body, const RemoteOptions &options) {
    const auto endpoint = split_url(base_url);
    httplib::Client client(endpoint.origin);
    const auto seconds = options.timeout.count() / 1000;
    const auto micros = (options.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    const std::string where = base_url + path;
    auto res = client.Post(endpoint.prefix + path, body.dump(), "application/json");
    if (!res)
        fail(ErrorCode::transport, "backend unreachable", where + ": " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        fail(ErrorCode::transport, "backend answered HTTP " + std::to_string(res->status),
             where + ": " + res->body.substr(0, 500));
    try {
        return json::parse(res->body);
    } catch (const json::exception &e) {
        fail(ErrorCode::transport, "backend answered with invalid JSON", where + ": " + e.what());
    }
}

template <typename T> T field(const json &body, const char *name, const std::string &where) {
    try {
        return body.at(name).get<T>();
    } catch (const json::exception &e) {
        fail(ErrorCode::transport, std::string("backend reply lacks a usable \"") + name + "\" field",
             where + ": " + e.what());
    }
}

} // namespace

RemoteTextGenerator::RemoteTextGenerator(std::string base_url, RemoteOptions options)
    : base_url_(std::move(base_url)), options_(options) {
    split_url(base_url_);
}

std::string RemoteTextGenerator::do_generate(const GenerationRequest &request) {
    const auto reply = post(base_url_, "/generate", {{"prompt", request.prompt}, {"params", request.params}}, options_);
    return field<std::string>(reply, "text", base_url_);
}

RemoteChatGenerator::RemoteChatGenerator(std::string base_url, RemoteOptions options)
    : base_url_(std::move(base_url)), options_(options) {
    split_url(base_url_);
}

std::string RemoteChatGenerator::do_chat(const std::string &system, const std::string &user,
                                         const GenerationParams &params) {
    const auto reply =
        post(base_url_, "/chat", {{"system", system}, {"user", user}, {"params", params}}, options_);
    return field<std::string>(reply, "text", base_url_);
}

RemoteTokenEmbedder::RemoteTokenEmbedder(std::string base_url, RemoteOptions options)
    : base_url_(std::move(base_url)), options_(options) {
    split_url(base_url_);
}

std::vector<TokenEmbedding> RemoteTokenEmbedder::do_embed_tokens(const Sentence &sentence) {
    const auto reply = post(base_url_, "/embed_tokens", {{"sentence", sentence.text()}}, options_);
    std::vector<TokenEmbedding> out;
    for (const auto &item : field<json>(reply, "embeddings", base_url_))
        out.push_back({field<std::string>(item, "token", base_url_),
                       field<std::vector<double>>(item, "vector", base_url_)});
    return out;
}

RemoteSentenceEmbedder::RemoteSentenceEmbedder(std::string base_url, RemoteOptions options)
    : base_url_(std::move(base_url)), options_(options) {
    split_url(base_url_);
}

SentenceEmbedding RemoteSentenceEmbedder::do_embed_sentence(const Sentence &sentence) {
    const auto reply = post(base_url_, "/embed_sentence", {{"sentence", sentence.text()}}, options_);
    return {field<std::vector<double>>(reply, "vector", base_url_)};
}

RemotePositionScorer::RemotePositionScorer(std::string base_url, std::string mask_marker, RemoteOptions options)
    : PositionScorer(std::move(mask_marker)), base_url_(std::move(base_url)), options_(options) {
    split_url(base_url_);
}

double RemotePositionScorer::do_score_position(const std::string &masked_story_text) {
    const auto reply =
        post(base_url_, "/score_position", {{"text", masked_story_text}, {"mask", mask_marker()}}, options_);
    return field<double>(reply, "probability", base_url_);
}

RemoteSyntaxParser::RemoteSyntaxParser(std::string base_url, RemoteOptions options)
    : base_url_(std::move(base_url)), options_(options) {
    split_url(base_url_);
}

SyntaxTree RemoteSyntaxParser::parse(const Sentence &sentence) {
    const auto reply = post(base_url_, "/parse", {{"sentence", sentence.text()}}, options_);
    return parse_bracketed(field<std::string>(reply, "tree", base_url_));
}

namespace {

bool is_url(const std::string &spec) { return spec.starts_with("http://") || spec.starts_with("https://"); }

[[noreturn]] void unknown(const std::string &contract, const std::string &spec) {
    fail(ErrorCode::invalid_argument, "unknown " + contract + " backend", spec);
}

std::shared_ptr<TextGenerator> text_generator(const std::string &spec, const RemoteOptions &options,
                                              const std::string &contract) {
    if (spec == "echo")
        return std::make_shared<EchoGenerator>();
    if (is_url(spec))
        return std::make_shared<RemoteTextGenerator>(spec, options);
    unknown(contract, spec);
}

// "name" or "name:argument"
std::pair<std::string, std::optional<std::string>> split_spec(const std::string &spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        return {spec, std::nullopt};
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

} // namespace

BackendSuite make_backend_suite(const BackendConfig &config, const std::string &mask_marker) {
    const RemoteOptions options{std::chrono::milliseconds(config.timeout_ms)};
    BackendSuite suite;
    suite.phrase_generator = text_generator(config.phrase_generator, options, "phrase generator");
    suite.stop_generator = text_generator(config.stop_generator, options, "stop generator");
    suite.infill_generator = text_generator(config.infill_generator, options, "infill generator");

    if (config.chat == "echo")
        suite.chat = std::make_shared<EchoChatGenerator>();
    else if (is_url(config.chat))
        suite.chat = std::make_shared<RemoteChatGenerator>(config.chat, options);
    else
        unknown("chat", config.chat);

    if (config.token_embedder == "hash")
        suite.token_embedder = std::make_shared<HashTokenEmbedder>();
    else if (is_url(config.token_embedder))
        suite.token_embedder = std::make_shared<RemoteTokenEmbedder>(config.token_embedder, options);
    else
        unknown("token embedder", config.token_embedder);

    if (config.sentence_embedder == "hash")
        suite.sentence_embedder = std::make_shared<HashSentenceEmbedder>();
    else if (is_url(config.sentence_embedder))
        suite.sentence_embedder = std::make_shared<RemoteSentenceEmbedder>(config.sentence_embedder, options);
    else
        unknown("sentence embedder", config.sentence_embedder);

    const auto &scorer = config.position_scorer;
    if (is_url(scorer)) {
        suite.position_scorer = std::make_shared<RemotePositionScorer>(scorer, mask_marker, options);
    } else {
        const auto [name, arg] = split_spec(scorer);
        try {
            if (name == "monotone" && !arg)
                suite.position_scorer = std::make_shared<MonotoneScorer>(mask_marker);
            else if (name == "constant")
                suite.position_scorer = std::make_shared<ConstantScorer>(arg ? std::stod(*arg) : 0.5, mask_marker);
            else if (name == "random")
                suite.position_scorer = std::make_shared<RandomScorer>(arg ? std::stoull(*arg) : 0, mask_marker);
            else
                unknown("position scorer", scorer);
        } catch (const std::logic_error &) {
            unknown("position scorer", scorer);
        }
    }
    return suite;
}

std::shared_ptr<SyntaxParser> make_syntax_parser(const BackendConfig &config) {
    if (config.syntax_parser == "shallow")
        return std::make_shared<ShallowSyntaxParser>();
    if (is_url(config.syntax_parser))
        return std::make_shared<RemoteSyntaxParser>(config.syntax_parser,
                                                    RemoteOptions{std::chrono::milliseconds(config.timeout_ms)});
    unknown("syntax", config.syntax_parser);
}

struct BackendServer::Impl {
    BackendSuite suite;
    std::shared_ptr<SyntaxParser> parser;
    std::mutex mutex; // stubs with state are not safe for concurrent calls
    httplib::Server server;
    std::thread thread;
    std::string host;
    int port = 0;
};

namespace {

template <typename Handler> httplib::Server::Handler json_route(std::mutex &mutex, Handler handler) {
    return [&mutex, handler](const httplib::Request &req, httplib::Response &res) {
        try {
            const auto body = json::parse(req.body);
            json reply;
            {
                std::lock_guard lock(mutex);
                reply = handler(body);
            }
            res.set_content(reply.dump(), "application/json");
        } catch (const Error &e) {
            res.status = e.code() == ErrorCode::invalid_argument || e.code() == ErrorCode::parse ? 400 : 500;
            res.set_content(json{{"code", to_string(e.code())}, {"message", e.what()}, {"detail", e.detail()}}.dump(),
                            "application/json");
        } catch (const json::exception &e) {
            res.status = 400;
            res.set_content(json{{"code", "invalid_argument"}, {"message", "malformed request"}, {"detail", e.what()}}.dump(),
                            "application/json");
        }
    };
}

} // namespace

BackendServer::BackendServer(BackendSuite suite, std::shared_ptr<SyntaxParser> parser)
    : impl_(std::make_unique<Impl>()) {
    impl_->suite = std::move(suite);
    impl_->parser = std::move(parser);
    auto &s = impl_->server;
    auto &m = impl_->mutex;
    Impl *impl = impl_.get();
    s.Post("/generate", json_route(m, [impl](const json &body) {
               GenerationRequest request{body.at("prompt").get<std::string>(), body.value("params", GenerationParams{})};
               return json{{"text", impl->suite.infill_generator->generate(request)}};
           }));
    s.Post("/chat", json_route(m, [impl](const json &body) {
               return json{{"text", impl->suite.chat->chat(body.at("system").get<std::string>(),
                                                               body.at("user").get<std::string>(),
                                                               body.value("params", GenerationParams{}))}};
           }));
    s.Post("/embed_tokens", json_route(m, [impl](const json &body) {
               json items = json::array();
               for (const auto &e : impl->suite.token_embedder->embed_tokens(Sentence(body.at("sentence").get<std::string>())))
                   items.push_back({{"token", e.token}, {"vector", e.vector}});
               return json{{"embeddings", std::move(items)}};
           }));
    s.Post("/embed_sentence", json_route(m, [impl](const json &body) {
               const auto e = impl->suite.sentence_embedder->embed_sentence(Sentence(body.at("sentence").get<std::string>()));
               return json{{"vector", e.vector}};
           }));
    s.Post("/score_position", json_route(m, [impl](const json &body) {
               return json{{"probability", impl->suite.position_scorer->score_position(body.at("text").get<std::string>())}};
           }));
    s.Post("/parse", json_route(m, [impl](const json &body) {
               return json{{"tree", to_bracketed(impl->parser->parse(Sentence(body.at("sentence").get<std::string>())))}};
           }));
}

BackendServer::~BackendServer() { stop(); }

int BackendServer::start(const std::string &host, int port) {
    auto &server = impl_->server;
    impl_->host = host;
    impl_->port = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (impl_->port < 0)
        fail(ErrorCode::io, "cannot bind backend server", host + ":" + std::to_string(port));
    impl_->thread = std::thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();
    return impl_->port;
}

void BackendServer::stop() {
    if (impl_ && impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

std::string BackendServer::base_url() const {
    return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

} // namespace bookend
