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



#include <gtest/gtest.h>

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "groundqa/service.hpp"
#include "test_support.hpp"

namespace groundqa {
namespace {

using nlohmann::json;
using testing::TempDir;

class ServiceTest : public ::testing::Test {
  protected:
    void SetUp() override {
        stub_ = testing::make_stub_engine(testing::stub_config(dir_.path()));
        ServiceOptions options;
        options.host = "127.0.0.1";
        options.port = 0;
        service_ = std::make_unique<Service>(*stub_.engine, options);
        port_ = service_->bind();
        thread_ = std::thread([this] { service_->run(); });
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        client_->set_read_timeout(30, 0);
    }

    void TearDown() override {
        service_->stop();
        thread_.join();
    }

    json body(const httplib::Result& r) {
        EXPECT_TRUE(r);
        return r ? json::parse(r->body) : json();
    }

    std::string post_text(const std::string& name, const std::string& text) {
        auto r = client_->Post("/api/documents", json{{"name", name}, {"text", text}}.dump(), "application/json");
        EXPECT_EQ(r->status, 200) << r->body;
        return json::parse(r->body)["document_id"];
    }

    std::string new_conversation() {
        return body(client_->Post("/api/conversations", "", "application/json"))["conversation_id"];
    }

    httplib::Result ask(const std::string& conv, const json& payload) {
        return client_->Post("/api/conversations/" + conv + "/query", payload.dump(), "application/json");
    }

    TempDir dir_;
    testing::StubEngine stub_;
    std::unique_ptr<Service> service_;
    std::thread thread_;
    int port_ = 0;
    std::unique_ptr<httplib::Client> client_;
};

void expect_error(const httplib::Result& r, int status, const std::string& code) {
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, status) << r->body;
    const auto j = json::parse(r->body);
    EXPECT_EQ(j["error"]["code"], code) << r->body;
    EXPECT_TRUE(j["error"]["message"].is_string());
}

TEST_F(ServiceTest, HealthReportsBackends) {
    const auto j = body(client_->Get("/api/health"));
    EXPECT_EQ(j["status"], "ok");
    EXPECT_EQ(j["embed_backend"], "up");
    EXPECT_EQ(j["generate_backend"], "up");
    EXPECT_EQ(j["rerank_backend"], "up");
    EXPECT_EQ(j["index_size"], 0);

    stub_.generator->set_available(false);
    const auto degraded = body(client_->Get("/api/health"));
    EXPECT_EQ(degraded["status"], "degraded");
    EXPECT_EQ(degraded["generate_backend"], "down");
}

TEST_F(ServiceTest, DocumentLifecycle) {
    const auto docs = testing::policy_documents();
    auto r = client_->Post("/api/documents", json{{"name", docs[0].first}, {"text", docs[0].second}}.dump(),
                           "application/json");
    ASSERT_EQ(r->status, 200);
    const auto created = json::parse(r->body);
    EXPECT_TRUE(created["created"].get<bool>());
    EXPECT_EQ(created["file_name"], "parking.txt");
    EXPECT_EQ(created["page_count"], 1);
    const std::string id = created["document_id"];
    EXPECT_EQ(id.size(), 32u);

    r = client_->Post("/api/documents", json{{"name", docs[0].first}, {"text", docs[0].second}}.dump(),
                      "application/json");
    EXPECT_FALSE(json::parse(r->body)["created"].get<bool>());

    const auto list = body(client_->Get("/api/documents"));
    ASSERT_EQ(list["documents"].size(), 1u);
    EXPECT_EQ(list["documents"][0]["document_id"], id);

    const auto one = body(client_->Get("/api/documents/" + id));
    EXPECT_EQ(one["summary"], list["documents"][0]["summary"]);

    r = client_->Delete("/api/documents/" + id);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(json::parse(r->body)["deleted"], id);
    expect_error(client_->Delete("/api/documents/" + id), 404, "not_found");
    expect_error(client_->Get("/api/documents/" + id), 404, "not_found");
    EXPECT_TRUE(body(client_->Get("/api/documents"))["documents"].empty());
}

TEST_F(ServiceTest, MultipartPdfUpload) {
    httplib::MultipartFormDataItems items{
        {"file", testing::read_fixture("three_page.pdf"), "three_page.pdf", "application/pdf"}};
    auto r = client_->Post("/api/documents", items);
    ASSERT_EQ(r->status, 200) << r->body;
    const auto j = json::parse(r->body);
    EXPECT_EQ(j["page_count"], 3);
    EXPECT_EQ(j["file_name"], "three_page.pdf");

    httplib::MultipartFormDataItems wrong{{"other", "x", "x.txt", "text/plain"}};
    expect_error(client_->Post("/api/documents", wrong), 400, "bad_request");
}

TEST_F(ServiceTest, RejectsBadUploads) {
    expect_error(client_->Post("/api/documents", "{not json", "application/json"), 400, "bad_request");
    expect_error(client_->Post("/api/documents", "[1,2]", "application/json"), 400, "bad_request");
    expect_error(client_->Post("/api/documents", json{{"name", "a.txt"}}.dump(), "application/json"), 400,
                 "bad_request");
    expect_error(client_->Post("/api/documents", json{{"name", "a.txt"}, {"text", "  \n "}}.dump(), "application/json"),
                 422, "bad_request");
    httplib::MultipartFormDataItems broken{
        {"file", testing::read_fixture("truncated.pdf"), "truncated.pdf", "application/pdf"}};
    expect_error(client_->Post("/api/documents", broken), 400, "bad_request");
}

TEST_F(ServiceTest, ConversationQueryAndHistory) {
    for (const auto& [name, text] : testing::policy_documents()) post_text(name, text);
    const auto conv = new_conversation();
    EXPECT_EQ(conv.size(), 32u);

    auto r = ask(conv, {{"question", "How much does a parking permit cost per year?"}});
    ASSERT_EQ(r->status, 200) << r->body;
    const auto a = json::parse(r->body);
    EXPECT_FALSE(a["insufficient_context"].get<bool>());
    ASSERT_FALSE(a["citations"].empty());
    EXPECT_FALSE(a.contains("trace"));
    EXPECT_EQ(a["turn_index"], 0);
    const auto cite = a["citations"][0];
    EXPECT_EQ(cite["text"], stub_.engine->store().get_chunk(cite["chunk_id"].get<std::string>()).text);

    r = ask(conv, {{"question", "And for visitors?"}, {"debug", true}});
    const auto second = json::parse(r->body);
    ASSERT_TRUE(second.contains("trace"));
    EXPECT_EQ(second["trace"]["rewordings"].size(), 5u);
    EXPECT_EQ(second["turn_index"], 1);

    r = client_->Post("/api/conversations/" + conv + "/query?debug=true", json{{"question", "Visitors?"}}.dump(),
                      "application/json");
    EXPECT_TRUE(json::parse(r->body).contains("trace"));

    const auto history = body(client_->Get("/api/conversations/" + conv));
    EXPECT_EQ(history["conversation_id"], conv);
    ASSERT_EQ(history["turns"].size(), 3u);
    EXPECT_EQ(history["turns"][0]["question"], "How much does a parking permit cost per year?");
    EXPECT_EQ(history["turns"][1]["answer"], second["answer"]);
}

TEST_F(ServiceTest, ScopedQuery) {
    post_text("parking.txt", testing::policy_documents()[0].second);
    const auto library = post_text("library.txt", testing::policy_documents()[1].second);
    const auto conv = new_conversation();
    auto r = ask(conv, {{"question", "When does the reading room open?"}, {"document_id", library}, {"debug", true}});
    ASSERT_EQ(r->status, 200);
    const auto a = json::parse(r->body);
    EXPECT_EQ(a["trace"]["scope"], library);
    // Scope picks the summary for query expansion; retrieval spans all documents.
    ASSERT_FALSE(a["citations"].empty());
    EXPECT_EQ(a["citations"][0]["file_name"], "library.txt");
    const auto summary = stub_.engine->store().get_document(library).summary;
    std::string hyde_system;
    for (const auto& req : stub_.generator->requests()) {
        if (req.system.find("Write a short passage") != std::string::npos) hyde_system = req.system;
    }
    EXPECT_NE(hyde_system.find(summary), std::string::npos);
    expect_error(ask(conv, {{"question", "q?"}, {"document_id", std::string(32, 'e')}}), 404, "not_found");
    expect_error(ask(conv, {{"question", "q?"}, {"document_id", 7}}), 400, "bad_request");
}

TEST_F(ServiceTest, QueryErrors) {
    const auto conv = new_conversation();
    expect_error(ask("0123456789abcdef0123456789abcdef", {{"question", "q?"}}), 404, "not_found");
    expect_error(client_->Get("/api/conversations/0123456789abcdef0123456789abcdef"), 404, "not_found");
    expect_error(ask(conv, json{{"question", ""}}), 400, "bad_request");
    expect_error(ask(conv, json{{"nope", 1}}), 400, "bad_request");
    expect_error(client_->Get("/api/unknown"), 404, "not_found");

    // Nothing indexed: refusal without a generator call.
    const auto r = ask(conv, {{"question", "Anything?"}});
    ASSERT_EQ(r->status, 200);
    const auto a = json::parse(r->body);
    EXPECT_TRUE(a["insufficient_context"].get<bool>());
    EXPECT_EQ(a["answer"], "not enough context");
    EXPECT_EQ(stub_.generator->calls(), 0u);
}

TEST_F(ServiceTest, GeneratorOutageIs503WithAnswerBody) {
    post_text("parking.txt", testing::policy_documents()[0].second);
    const auto conv = new_conversation();
    stub_.generator->set_available(false);
    const auto r = ask(conv, {{"question", "How much is a permit?"}});
    ASSERT_EQ(r->status, 503);
    const auto a = json::parse(r->body);
    EXPECT_TRUE(a["insufficient_context"].get<bool>());
    EXPECT_TRUE(a["error"].is_string());
}

TEST_F(ServiceTest, CorsPreflight) {
    const auto r = client_->Options("/api/documents");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 204);
    EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST(Service, BindFailureIsIoError) {
    TempDir dir;
    auto stub = testing::make_stub_engine(testing::stub_config(dir.path()));
    ServiceOptions options;
    options.port = 0;
    Service first(*stub.engine, options);
    const int port = first.bind();
    options.port = port;
    Service second(*stub.engine, options);
    EXPECT_ERROR_CODE(second.bind(), ErrorCode::kIoError);
}

}  // namespace
}  // namespace groundqa
