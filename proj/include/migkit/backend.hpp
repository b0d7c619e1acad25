#pragma once

#include <map>
#include <string>

#include "migkit/token.hpp"

namespace migkit {

struct TranslateRequest {
  std::string prompt;      // fully bound prompt text
  std::string chunk_text;  // raw source chunk (deterministic backends use this)
};

struct TranslateResult {
  bool ok = false;
  std::string text;
  std::string error;
  int attempts = 1;
  double latency_ms = 0.0;
};

class TranslatorBackend {
public:
  virtual ~TranslatorBackend() = default;
  virtual TranslateResult translate(const TranslateRequest& req) = 0;
  virtual std::string name() const = 0;
};

// Returns the chunk unchanged; the identity backend every pipeline round-trip
// test is built on.
class EchoBackend : public TranslatorBackend {
public:
  TranslateResult translate(const TranslateRequest& req) override {
    return {true, req.chunk_text, "", 1, 0.0};
  }
  std::string name() const override { return "echo"; }
};

// Deterministic word-level rewrite table. Only keyword/identifier tokens are
// replaced; literals, comments and spacing pass through byte-exact.
class RuleBaselineBackend : public TranslatorBackend {
public:
  using RewriteTable = std::map<std::string, std::string>;  // UPPER key -> replacement

  explicit RuleBaselineBackend(RewriteTable table = default_table(),
                               Dialect dialect = Dialect::Oracle)
      : table_(std::move(table)), dialect_(dialect) {}

  static RewriteTable default_table() {
    return {{"NUMBER", "NUMERIC"},
            {"VARCHAR2", "VARCHAR"},
            {"SYSDATE", "CURRENT_TIMESTAMP"},
            {"NVL", "COALESCE"}};
  }

  TranslateResult translate(const TranslateRequest& req) override {
    const std::string& src = req.chunk_text;
    auto lexed = tokenize(src, dialect_);
    std::string out;
    out.reserve(src.size());
    size_t cursor = 0;
    for (const auto& t : lexed.tokens) {
      out.append(src, cursor, t.begin - cursor);
      if (t.kind == TokenKind::Keyword || t.kind == TokenKind::Identifier) {
        auto it = table_.find(upper_copy(t.text));
        out += it != table_.end() ? it->second : t.text;
      } else {
        out += t.text;
      }
      cursor = t.end;
    }
    out.append(src, cursor, src.size() - cursor);
    return {true, std::move(out), "", 1, 0.0};
  }

  std::string name() const override { return "rule-baseline"; }

private:
  RewriteTable table_;
  Dialect dialect_;
};

// Removes one surrounding markdown code fence (``` or ```sql ... ```) when a
// backend wrapped its answer; any other shape passes through untouched.
inline std::string strip_code_fences(const std::string& text) {
  size_t begin = 0, end = text.size();
  while (begin < end && (text[begin] == ' ' || text[begin] == '\n' ||
                         text[begin] == '\t' || text[begin] == '\r'))
    ++begin;
  while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\n' ||
                         text[end - 1] == '\t' || text[end - 1] == '\r'))
    --end;
  std::string_view body = std::string_view(text).substr(begin, end - begin);
  if (body.size() < 6 || body.substr(0, 3) != "```" ||
      body.substr(body.size() - 3) != "```")
    return text;
  size_t nl = body.find('\n');
  if (nl == std::string_view::npos) return text;
  // opening fence line may carry a language tag; nothing else
  std::string_view opener = body.substr(3, nl - 3);
  for (char c : opener)
    if (!detail::is_word_char(c) && c != '\r') return text;
  std::string_view inner = body.substr(nl + 1, body.size() - 3 - (nl + 1));
  while (!inner.empty() && (inner.back() == '\n' || inner.back() == '\r'))
    inner.remove_suffix(1);
  return std::string(inner);
}

}  // namespace migkit
