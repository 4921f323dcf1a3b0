#include "bookend/service.hpp"
#include "bookend/serialization.hpp"

#include "httplib.h"

#include <thread>

namespace bookend {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::parse:
        return 400;
    case ErrorCode::not_found:
        return 404;
    case ErrorCode::conflict:
        return 409;
    case ErrorCode::transport:
        return 502;
    case ErrorCode::generation_failed:
        return 422;
    case ErrorCode::io:
        return 500;
    }
    return 500;
}

struct SessionService::Impl {
    std::shared_ptr<SessionStore> store;
    ServiceOptions options;
    httplib::Server server;
    std::thread thread;
    int port = 0;
};

namespace {

void send_error(httplib::Response &res, ErrorCode code, const std::string &message, const std::string &detail) {
    res.status = http_status(code);
    res.set_content(json{{"code", to_string(code)}, {"message", message}, {"detail", detail}}.dump(),
                    "application/json");
}

json body_of(const httplib::Request &req) {
    if (req.body.empty())
        return json::object();
    auto body = json::parse(req.body);
    if (!body.is_object())
        fail(ErrorCode::invalid_argument, "request body must be a JSON object");
    return body;
}

std::size_t attempt_param(const httplib::Request &req) {
    const auto &text = req.path_params.at("k");
    std::size_t index = 0;
    for (char c : text) {
        if (c < '0' || c > '9' || index > 1000000)
            fail(ErrorCode::invalid_argument, "attempt index must be a non-negative integer", text);
        index = index * 10 + static_cast<std::size_t>(c - '0');
    }
    return index;
}

using Action = std::function<json(const httplib::Request &)>;

httplib::Server::Handler route(Action action) {
    return [action = std::move(action)](const httplib::Request &req, httplib::Response &res) {
        try {
            res.set_content(action(req).dump(), "application/json");
        } catch (const Error &e) {
            send_error(res, e.code(), e.what(), e.detail());
        } catch (const json::exception &e) {
            send_error(res, ErrorCode::invalid_argument, "malformed request", e.what());
        } catch (const std::exception &e) {
            send_error(res, ErrorCode::io, "internal error", e.what());
        }
    };
}

SessionConfig config_from_request(const json &body, SessionConfig config) {
    config.n = body.value("n", config.n);
    config.gamma = body.value("gamma", config.gamma);
    config.seed = body.value("seed", config.seed);
    config.system_prompt = body.value("system_prompt", config.system_prompt);
    if (auto it = body.find("markers"); it != body.end())
        it->get_to(config.markers);
    if (auto it = body.find("params"); it != body.end())
        it->get_to(config.params);
    return config;
}

} // namespace

SessionService::SessionService(std::shared_ptr<SessionStore> store, ServiceOptions options)
    : impl_(std::make_unique<Impl>()) {
    impl_->store = std::move(store);
    impl_->options = std::move(options);
    auto &s = impl_->server;
    auto *store_ptr = impl_->store.get();
    const SessionConfig defaults = impl_->options.defaults;

    s.Get("/healthz", [](const httplib::Request &, httplib::Response &res) {
        res.set_content(R"({"status":"ok"})", "application/json");
    });
    s.Post("/sessions", route([store_ptr, defaults](const httplib::Request &req) {
               const auto body = body_of(req);
               const auto scheme = SessionScheme::parse(body.value("scheme", std::string("lm")));
               return to_json(store_ptr->create_session(body.at("start").get<std::string>(), scheme,
                                                        config_from_request(body, defaults)));
           }));
    s.Get("/sessions/:id", route([store_ptr](const httplib::Request &req) {
              return to_json(store_ptr->get(req.path_params.at("id")));
          }));
    s.Post("/sessions/:id/phrase-list", route([store_ptr](const httplib::Request &req) {
               const auto body = body_of(req);
               const auto &id = req.path_params.at("id");
               const auto attempt = store_ptr->edit_phrase_list(id, body.at("tokens").get<std::vector<std::string>>());
               return to_json(attempt, store_ptr->get(id));
           }));
    s.Post("/sessions/:id/attempts/:k/stop", route([store_ptr](const httplib::Request &req) {
               const auto &id = req.path_params.at("id");
               const auto attempt = store_ptr->generate_stop_for(id, attempt_param(req));
               return to_json(attempt, store_ptr->get(id));
           }));
    s.Post("/sessions/:id/attempts/:k/infill-step", route([store_ptr](const httplib::Request &req) {
               const auto step = store_ptr->infill_step(req.path_params.at("id"), attempt_param(req));
               json sentences = json::array();
               for (const auto &sentence : step.sentences)
                   sentences.push_back(sentence.text());
               return json{{"entry", step.entry}, {"sentences", sentences}, {"complete", step.complete}};
           }));
    s.Post("/sessions/:id/attempts/:k/infill-complete", route([store_ptr](const httplib::Request &req) {
               const auto &id = req.path_params.at("id");
               const auto index = attempt_param(req);
               const auto story = store_ptr->infill_complete(id, index);
               const auto session = store_ptr->get(id);
               return json{{"story", story}, {"infill_trace", session.attempts.at(index).trace}};
           }));
    s.Post("/sessions/:id/attempts/:k/score", route([store_ptr](const httplib::Request &req) {
               return json(store_ptr->score_attempt(req.path_params.at("id"), attempt_param(req)));
           }));
    if (impl_->options.static_dir && !s.set_mount_point("/", impl_->options.static_dir->string()))
        fail(ErrorCode::io, "static directory does not exist", impl_->options.static_dir->string());
}

SessionService::~SessionService() { stop(); }

int SessionService::start() {
    auto &server = impl_->server;
    const auto &o = impl_->options;
    impl_->port = o.port == 0 ? server.bind_to_any_port(o.host) : (server.bind_to_port(o.host, o.port) ? o.port : -1);
    if (impl_->port < 0)
        fail(ErrorCode::io, "cannot bind service", o.host + ":" + std::to_string(o.port));
    impl_->thread = std::thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();
    return impl_->port;
}

void SessionService::run() {
    auto &server = impl_->server;
    const auto &o = impl_->options;
    impl_->port = o.port == 0 ? server.bind_to_any_port(o.host) : (server.bind_to_port(o.host, o.port) ? o.port : -1);
    if (impl_->port < 0)
        fail(ErrorCode::io, "cannot bind service", o.host + ":" + std::to_string(o.port));
    server.listen_after_bind();
}

void SessionService::stop() {
    if (!impl_)
        return;
    impl_->server.stop();
    if (impl_->thread.joinable())
        impl_->thread.join();
}

int SessionService::port() const { return impl_->port; }

} // namespace bookend
