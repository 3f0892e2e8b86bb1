// Copyright 2026 the groundqa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "groundqa/service.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <nlohmann/json.hpp>

#include "groundqa/error.hpp"

namespace groundqa {

namespace {

using nlohmann::json;

struct HttpError {
    int status;
    const char* code;
};

HttpError map_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument:
        case ErrorCode::kMalformedDocument:
        case ErrorCode::kFormatError:
        case ErrorCode::kMissingLabel:
            return {400, "bad_request"};
        case ErrorCode::kEmptyDocument:
            return {422, "bad_request"};
        case ErrorCode::kNotFound:
            return {404, "not_found"};
        case ErrorCode::kBackendUnavailable:
        case ErrorCode::kContextOverflow:
            return {503, "backend_unavailable"};
        default:
            return {500, "internal"};
    }
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message,
                std::string_view detail) {
    send_json(res, status, json{{"error", {{"code", code}, {"message", message}, {"detail", detail}}}});
}

json document_json(const DocumentRecord& d) {
    return json{{"document_id", d.document_id}, {"file_name", d.file_name},         {"page_count", d.page_count},
                {"chunk_count", d.chunk_count}, {"summary", d.summary},             {"summary_fallback", d.summary_fallback},
                {"ingested_at", d.ingested_at}};
}

json turn_json(const ConversationTurn& t) {
    return json{{"turn_index", t.turn_index},
                {"question", t.question},
                {"answer", t.answer},
                {"insufficient_context", t.insufficient_context},
                {"citation_chunk_ids", t.citation_chunk_ids},
                {"created_at", t.created_at}};
}

json parse_body(const httplib::Request& req) {
    try {
        auto j = json::parse(req.body);
        if (!j.is_object()) raise(ErrorCode::kInvalidArgument, "request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        raise(ErrorCode::kInvalidArgument, fmt::format("invalid JSON body: {}", e.what()));
    }
}

std::string required_string(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || !it->is_string()) raise(ErrorCode::kInvalidArgument, fmt::format("'{}' must be a string", key));
    return it->get<std::string>();
}

bool truthy(std::string_view v) { return v == "true" || v == "1" || v == "yes"; }

}  // namespace

struct Service::Impl {
    Engine& engine;
    ServiceOptions options;
    httplib::Server server;
    int bound_port = -1;

    Impl(Engine& e, ServiceOptions o) : engine(e), options(std::move(o)) { routes(); }

    template <typename Fn>
    httplib::Server::Handler guarded(Fn fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                const auto mapped = map_error(e.code());
                send_error(res, mapped.status, mapped.code, e.what(), to_string(e.code()));
            } catch (const std::exception& e) {
                send_error(res, 500, "internal", e.what(), "");
            }
        };
    }

    void routes() {
        server.set_payload_max_length(options.max_upload_bytes);
        // No SO_REUSEPORT: a second engine on the same port must fail to bind.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
        });
        if (!options.cors_origin.empty()) {
            server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                        {"Access-Control-Allow-Headers", "Content-Type"},
                                        {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
            server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        }
        if (!options.static_dir.empty()) server.set_mount_point("/", options.static_dir.string());

        server.Post("/api/documents", guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::string name;
            std::string content;
            std::optional<SourceFormat> format;
            if (req.is_multipart_form_data()) {
                if (!req.has_file("file")) raise(ErrorCode::kInvalidArgument, "multipart body needs a 'file' part");
                const auto file = req.get_file_value("file");
                name = file.filename.empty() ? "upload" : file.filename;
                content = file.content;
            } else {
                const auto body = parse_body(req);
                name = required_string(body, "name");
                content = required_string(body, "text");
                format = SourceFormat::kPlainText;
            }
            const auto result = engine.ingest(content, name, format);
            json out{{"document_id", result.record.document_id},
                     {"file_name", result.record.file_name},
                     {"page_count", result.record.page_count},
                     {"chunk_count", result.record.chunk_count},
                     {"summary", result.record.summary},
                     {"created", result.created}};
            send_json(res, 200, out);
        }));

        server.Get("/api/documents", guarded([this](const httplib::Request&, httplib::Response& res) {
            json docs = json::array();
            for (const auto& d : engine.documents()) docs.push_back(document_json(d));
            send_json(res, 200, json{{"documents", std::move(docs)}});
        }));

        server.Get(R"(/api/documents/([0-9A-Za-z_-]+))",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       send_json(res, 200, document_json(engine.store().get_document(req.matches[1].str())));
                   }));

        server.Delete(R"(/api/documents/([0-9A-Za-z_-]+))",
                      guarded([this](const httplib::Request& req, httplib::Response& res) {
                          const std::string id = req.matches[1].str();
                          engine.delete_document(id);
                          send_json(res, 200, json{{"deleted", id}});
                      }));

        server.Post("/api/conversations", guarded([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, json{{"conversation_id", engine.create_conversation()}});
        }));

        server.Get(R"(/api/conversations/([0-9A-Za-z_-]+))",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const std::string id = req.matches[1].str();
                       json turns = json::array();
                       for (const auto& t : engine.history(id)) turns.push_back(turn_json(t));
                       send_json(res, 200, json{{"conversation_id", id}, {"turns", std::move(turns)}});
                   }));

        server.Post(R"(/api/conversations/([0-9A-Za-z_-]+)/query)",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const std::string id = req.matches[1].str();
                        const auto body = parse_body(req);
                        const std::string question = required_string(body, "question");
                        std::optional<std::string> document_id;
                        if (auto it = body.find("document_id"); it != body.end() && !it->is_null()) {
                            document_id = required_string(body, "document_id");
                        }
                        bool debug = req.has_param("debug") && truthy(req.get_param_value("debug"));
                        if (auto it = body.find("debug"); it != body.end() && it->is_boolean()) {
                            debug = debug || it->get<bool>();
                        }
                        const auto answer = engine.query(id, question, document_id);
                        send_json(res, answer.error ? 503 : 200, answer.to_json(debug));
                    }));

        server.Get("/api/health", guarded([this](const httplib::Request&, httplib::Response& res) {
            const auto h = engine.health();
            auto state = [](bool up) { return up ? "up" : "down"; };
            send_json(res, 200,
                      json{{"status", h.status},
                           {"embed_backend", state(h.embed_up)},
                           {"generate_backend", state(h.generate_up)},
                           {"rerank_backend", state(h.rerank_up)},
                           {"index_size", h.index_size}});
        }));

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return;
            const bool missing = res.status == 404;
            send_error(res, res.status, missing ? "not_found" : "bad_request",
                       missing ? "no such route" : "request rejected", "");
        });
    }
};

Service::Service(Engine& engine, ServiceOptions options) : impl_(std::make_unique<Impl>(engine, std::move(options))) {}

Service::~Service() { stop(); }

int Service::bind() {
    if (impl_->bound_port >= 0) return impl_->bound_port;
    const auto& o = impl_->options;
    if (o.port == 0) {
        impl_->bound_port = impl_->server.bind_to_any_port(o.host);
    } else if (impl_->server.bind_to_port(o.host, o.port)) {
        impl_->bound_port = o.port;
    }
    if (impl_->bound_port <= 0) raise(ErrorCode::kIoError, fmt::format("cannot bind {}:{}", o.host, o.port));
    return impl_->bound_port;
}

void Service::run() {
    bind();
    impl_->server.listen_after_bind();
}

void Service::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace groundqa
