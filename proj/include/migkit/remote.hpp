#pragma once

// HTTP-backed translator and embedder. Kept separate so that the rest of the
// library does not pay for the httplib include.

#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "migkit/backend.hpp"
#include "migkit/embed.hpp"

namespace migkit {

inline std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

struct HttpLlmConfig {
  std::string url;  // falls back to MIGRATE_LLM_URL
  std::string model = "default";
  std::string api_key;  // falls back to MIGRATE_LLM_KEY
  int max_tokens = 4096;
  double temperature = 0.0;
  int timeout_sec = 120;
  int max_retries = 3;
  int backoff_ms = 250;  // doubled per attempt
};

// Wire contract: POST <url> with {"model","prompt","max_tokens","temperature"},
// expecting {"text": "..."} back. Retries with exponential backoff; a chunk
// whose retries are exhausted makes its file "not converted".
class HttpLlmBackend : public TranslatorBackend {
public:
  explicit HttpLlmBackend(HttpLlmConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.url.empty()) cfg_.url = env_or("MIGRATE_LLM_URL", "");
    if (cfg_.api_key.empty()) cfg_.api_key = env_or("MIGRATE_LLM_KEY", "");
    if (cfg_.url.empty())
      throw std::invalid_argument("HttpLlmBackend: no endpoint (set MIGRATE_LLM_URL)");
    split_url(cfg_.url, base_, path_);
  }

  TranslateResult translate(const TranslateRequest& req) override {
    json body{{"model", cfg_.model},
              {"prompt", req.prompt},
              {"max_tokens", cfg_.max_tokens},
              {"temperature", cfg_.temperature}};
    std::string payload = body.dump();
    TranslateResult out;
    auto t0 = std::chrono::steady_clock::now();
    for (int attempt = 1; attempt <= cfg_.max_retries; ++attempt) {
      out.attempts = attempt;
      httplib::Client cli(base_);
      cli.set_connection_timeout(cfg_.timeout_sec);
      cli.set_read_timeout(cfg_.timeout_sec);
      httplib::Headers headers;
      if (!cfg_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + cfg_.api_key);
      auto res = cli.Post(path_, headers, payload, "application/json");
      if (res && res->status == 200) {
        try {
          json reply = json::parse(res->body);
          out.ok = true;
          out.text = reply.at("text").get<std::string>();
          out.error.clear();
          break;
        } catch (const std::exception& e) {
          out.error = std::string("bad response body: ") + e.what();
        }
      } else {
        out.error = res ? "http status " + std::to_string(res->status)
                        : "connection failed: " + httplib::to_string(res.error());
      }
      if (attempt < cfg_.max_retries)
        std::this_thread::sleep_for(
            std::chrono::milliseconds(cfg_.backoff_ms << (attempt - 1)));
    }
    out.latency_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return out;
  }

  std::string name() const override { return "http:" + cfg_.model; }

private:
  static void split_url(const std::string& url, std::string& base, std::string& path) {
    auto scheme = url.find("://");
    size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    auto slash = url.find('/', host_start);
    if (slash == std::string::npos) {
      base = url;
      path = "/";
    } else {
      base = url.substr(0, slash);
      path = url.substr(slash);
    }
  }

  HttpLlmConfig cfg_;
  std::string base_, path_;
};

// External embedding endpoint: POST {"text": ...} -> {"embedding": [...]}.
// Failure raises EmbedderUnavailable; there is no silent fallback.
class HttpEmbedder : public Embedder {
public:
  HttpEmbedder(std::string url, size_t dim, std::string model = "default",
               int timeout_sec = 60)
      : url_(std::move(url)), dim_(dim), model_(std::move(model)),
        timeout_sec_(timeout_sec) {
    if (url_.empty()) url_ = env_or("MIGRATE_EMBED_URL", "");
    if (url_.empty())
      throw std::invalid_argument("HttpEmbedder: no endpoint (set MIGRATE_EMBED_URL)");
  }

  EmbeddingVector embed(std::string_view text) const override {
    std::string base, path;
    auto scheme = url_.find("://");
    size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    auto slash = url_.find('/', host_start);
    if (slash == std::string::npos) {
      base = url_;
      path = "/";
    } else {
      base = url_.substr(0, slash);
      path = url_.substr(slash);
    }
    httplib::Client cli(base);
    cli.set_connection_timeout(timeout_sec_);
    cli.set_read_timeout(timeout_sec_);
    json body{{"model", model_}, {"text", std::string(text)}};
    auto res = cli.Post(path, body.dump(), "application/json");
    if (!res)
      throw EmbedderUnavailable("embedding endpoint unreachable: " +
                                httplib::to_string(res.error()));
    if (res->status != 200)
      throw EmbedderUnavailable("embedding endpoint returned status " +
                                std::to_string(res->status));
    try {
      json reply = json::parse(res->body);
      EmbeddingVector v;
      v.values = reply.at("embedding").get<std::vector<float>>();
      v.dim = v.values.size();
      v.embedder_id = id();
      if (v.dim != dim_)
        throw EmbedderUnavailable("embedding endpoint returned dim " +
                                  std::to_string(v.dim) + ", expected " +
                                  std::to_string(dim_));
      return v;
    } catch (const json::exception& e) {
      throw EmbedderUnavailable(std::string("bad embedding response: ") + e.what());
    }
  }

  std::string id() const override { return "http-embed:" + model_ + "@" + url_; }
  size_t dim() const override { return dim_; }
  json to_json() const override {
    return json{{"kind", "http"}, {"url", url_}, {"model", model_}, {"dim", dim_}};
  }

private:
  std::string url_;
  size_t dim_;
  std::string model_;
  int timeout_sec_;
};

}  // namespace migkit
