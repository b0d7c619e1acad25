#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "migkit/pipeline.hpp"
#include "migkit/remote.hpp"

using namespace migkit;

namespace {

struct TestServer {
  httplib::Server srv;
  std::thread thread;
  int port = 0;

  void start() {
    port = srv.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { srv.listen_after_bind(); });
    srv.wait_until_ready();
  }

  ~TestServer() {
    srv.stop();
    if (thread.joinable()) thread.join();
  }

  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port) + path;
  }
};

}  // namespace

TEST(HttpLlm, TranslatesViaWireContract) {
  TestServer ts;
  json seen_request;
  ts.srv.Post("/v1/translate", [&](const httplib::Request& req, httplib::Response& res) {
    seen_request = json::parse(req.body);
    res.set_content(json{{"text", "SELECT 42;"}}.dump(), "application/json");
  });
  ts.start();

  HttpLlmConfig cfg;
  cfg.url = ts.url("/v1/translate");
  cfg.model = "test-model";
  cfg.backoff_ms = 1;
  HttpLlmBackend backend(cfg);
  auto res = backend.translate({"the prompt", "chunk text"});
  ASSERT_TRUE(res.ok) << res.error;
  EXPECT_EQ(res.text, "SELECT 42;");
  EXPECT_EQ(res.attempts, 1);
  EXPECT_EQ(seen_request["model"], "test-model");
  EXPECT_EQ(seen_request["prompt"], "the prompt");
  EXPECT_TRUE(seen_request.contains("max_tokens"));
  EXPECT_TRUE(seen_request.contains("temperature"));
}

TEST(HttpLlm, RetriesThenSucceeds) {
  TestServer ts;
  std::atomic<int> hits{0};
  ts.srv.Post("/llm", [&](const httplib::Request&, httplib::Response& res) {
    if (++hits < 3) {
      res.status = 500;
      return;
    }
    res.set_content(json{{"text", "ok"}}.dump(), "application/json");
  });
  ts.start();

  HttpLlmConfig cfg;
  cfg.url = ts.url("/llm");
  cfg.backoff_ms = 1;
  HttpLlmBackend backend(cfg);
  auto res = backend.translate({"p", "c"});
  ASSERT_TRUE(res.ok);
  EXPECT_EQ(res.attempts, 3);
  EXPECT_EQ(hits.load(), 3);
}

TEST(HttpLlm, ExhaustedRetriesReportFailure) {
  TestServer ts;
  ts.srv.Post("/llm", [&](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });
  ts.start();

  HttpLlmConfig cfg;
  cfg.url = ts.url("/llm");
  cfg.backoff_ms = 1;
  HttpLlmBackend backend(cfg);
  auto res = backend.translate({"p", "c"});
  EXPECT_FALSE(res.ok);
  EXPECT_EQ(res.attempts, 3);
  EXPECT_NE(res.error.find("503"), std::string::npos);
}

TEST(HttpLlm, SendsBearerToken) {
  TestServer ts;
  std::string seen_auth;
  ts.srv.Post("/llm", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    res.set_content(json{{"text", "x"}}.dump(), "application/json");
  });
  ts.start();

  HttpLlmConfig cfg;
  cfg.url = ts.url("/llm");
  cfg.api_key = "sekret";
  cfg.backoff_ms = 1;
  HttpLlmBackend backend(cfg);
  backend.translate({"p", "c"});
  EXPECT_EQ(seen_auth, "Bearer sekret");
}

TEST(HttpLlm, FencedAnswerStrippedByPipeline) {
  TestServer ts;
  ts.srv.Post("/llm", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"text", "```sql\nSELECT 9;\n```"}}.dump(),
                    "application/json");
  });
  ts.start();

  HttpLlmConfig cfg;
  cfg.url = ts.url("/llm");
  cfg.backoff_ms = 1;
  HttpLlmBackend backend(cfg);
  std::vector<SourceScript> corpus = {
      make_script("a.sql", Dialect::Oracle, "SELECT 1;\n")};
  RunConfig rcfg;
  auto run = run_pipeline(corpus, backend, rcfg);
  ASSERT_TRUE(run.files[0].converted);
  EXPECT_EQ(run.files[0].output_text, "SELECT 9;");
}

TEST(HttpEmbedder, RoundTrip) {
  TestServer ts;
  ts.srv.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    EXPECT_TRUE(body.contains("text"));
    res.set_content(json{{"embedding", {1.0, 0.0, 0.0, 0.5}}}.dump(),
                    "application/json");
  });
  ts.start();

  HttpEmbedder emb(ts.url("/embed"), 4);
  auto v = emb.embed("SELECT 1;");
  EXPECT_EQ(v.dim, 4u);
  EXPECT_FLOAT_EQ(v.values[0], 1.0f);
  EXPECT_FLOAT_EQ(v.values[3], 0.5f);
}

TEST(HttpEmbedder, WrongDimensionFailsLoudly) {
  TestServer ts;
  ts.srv.Post("/embed", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"embedding", {1.0, 2.0}}}.dump(), "application/json");
  });
  ts.start();
  HttpEmbedder emb(ts.url("/embed"), 4);
  EXPECT_THROW(emb.embed("x"), EmbedderUnavailable);
}

TEST(HttpEmbedder, DeadEndpointFailsLoudly) {
  // bind+close to get a port nothing listens on
  int dead_port;
  {
    TestServer probe;
    probe.start();
    dead_port = probe.port;
  }
  HttpEmbedder emb("http://127.0.0.1:" + std::to_string(dead_port) + "/embed", 4);
  EXPECT_THROW(emb.embed("x"), EmbedderUnavailable);
}
