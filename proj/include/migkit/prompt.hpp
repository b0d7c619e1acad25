#pragma once

#include <map>
#include <set>
#include <string>

#include "migkit/io.hpp"

namespace migkit {

class UnboundPlaceholder : public std::runtime_error {
public:
  explicit UnboundPlaceholder(const std::string& key)
      : std::runtime_error("unbound placeholder: " + key), placeholder(key) {}
  std::string placeholder;
};

enum class TemplateId { Direct, History, StrategyA, StrategyB };

inline const char* template_name(TemplateId id) {
  switch (id) {
    case TemplateId::Direct: return "direct";
    case TemplateId::History: return "history";
    case TemplateId::StrategyA: return "strategy_a";
    default: return "strategy_b";
  }
}

inline TemplateId template_from_name(std::string_view name) {
  std::string n = lower_copy(name);
  if (n == "direct") return TemplateId::Direct;
  if (n == "history") return TemplateId::History;
  if (n == "strategy_a") return TemplateId::StrategyA;
  if (n == "strategy_b") return TemplateId::StrategyB;
  throw std::invalid_argument("unknown template: " + std::string(name));
}

// Bound placeholder marker when retrieval legitimately came back empty.
inline constexpr const char* kNoContentMarker = "[no examples retrieved]";

namespace templates {

inline constexpr const char* kStrategyA =
    R"(You are converting an Oracle SQL/PLSQL chunk to PostgreSQL.

Context:
• Oracle reference examples (global context): {ORACLE_CONTEXT}
• PostgreSQL documentation excerpts (syntax and semantics): {POSTGRES_DOCS}
• SME converting rules (must override examples when applicable): {CONVERTING_RULES}

Current chunk to convert:
{CURRENT_CHUNK}

Task:
Produce the PostgreSQL equivalent of the current chunk.
Follow these principles:
1. Apply converting rules with highest priority.
2. Use PostgreSQL documentation to ensure canonical and version-correct syntax.
3. Use Oracle context only to understand intent, not for direct copying.
4. Do NOT hallucinate missing constructs; if ambiguity exists, choose the safest syntactic equivalent.
5. Output only valid PostgreSQL code.
)";

inline constexpr const char* kStrategyB =
    R"(You are converting an Oracle SQL/PLSQL chunk to PostgreSQL.

You are provided with semantically similar Oracle → PostgreSQL conversion examples
retrieved from the knowledge base. Use them as guidance for style, structure,
and feature mapping.

Retrieved examples (Oracle → PostgreSQL):
{RETRIEVED_EXAMPLES}

Current Oracle chunk to convert:
{CURRENT_CHUNK}

Task:
Generate the PostgreSQL equivalent of the current chunk using ONLY the patterns
and mappings observable in the retrieved examples.

Guidelines:
1. Learn from the examples: follow their mapping patterns, syntax choices,
   type conversions, and procedural rewrites.
2. Do NOT hallucinate undocumented constructs; if the pattern is not visible
   in the examples, produce the safest syntactic PostgreSQL alternative.
3. Preserve semantics: maintain cursor logic, exception behaviour, and SQL flow
   consistent with the Oracle intent.
4. Output only PostgreSQL code without explanations, comments, or additional text.
)";

inline constexpr const char* kDirect =
    R"(You are converting an Oracle SQL/PLSQL chunk to PostgreSQL.

Current chunk to convert:
{CURRENT_CHUNK}

Task:
Produce the PostgreSQL equivalent of the current chunk.
Follow these principles:
1. Do NOT hallucinate missing constructs; if ambiguity exists, choose the safest syntactic equivalent.
2. Output only valid PostgreSQL code.
)";

inline constexpr const char* kHistory =
    R"(You are converting an Oracle SQL/PLSQL chunk to PostgreSQL.

Previously converted chunks (most recent first):
{HISTORY}

Current chunk to convert:
{CURRENT_CHUNK}

Task:
Produce the PostgreSQL equivalent of the current chunk.
Follow these principles:
1. Keep naming, declarations, and style consistent with the previously converted chunks.
2. Do NOT hallucinate missing constructs; if ambiguity exists, choose the safest syntactic equivalent.
3. Output only valid PostgreSQL code.
)";

}  // namespace templates

// Templates are editable data: a set loaded from files overrides the built-in
// text, wording stays out of code paths.
class TemplateSet {
public:
  TemplateSet() {
    texts_[TemplateId::Direct] = templates::kDirect;
    texts_[TemplateId::History] = templates::kHistory;
    texts_[TemplateId::StrategyA] = templates::kStrategyA;
    texts_[TemplateId::StrategyB] = templates::kStrategyB;
  }

  static TemplateSet load(const fs::path& dir) {
    TemplateSet set;
    for (TemplateId id : {TemplateId::Direct, TemplateId::History,
                          TemplateId::StrategyA, TemplateId::StrategyB}) {
      fs::path p = dir / (std::string(template_name(id)) + ".txt");
      if (fs::exists(p)) set.texts_[id] = read_file(p);
    }
    return set;
  }

  const std::string& text(TemplateId id) const { return texts_.at(id); }

private:
  std::map<TemplateId, std::string> texts_;
};

struct PromptSpec {
  TemplateId template_id = TemplateId::Direct;
  std::string filled_text;
  std::map<std::string, std::string> placeholders_bound;
};

inline std::set<std::string> placeholders_in(std::string_view text) {
  std::set<std::string> keys;
  size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      ++i;
      continue;
    }
    size_t close = text.find('}', i + 1);
    if (close == std::string_view::npos) break;
    std::string_view key = text.substr(i + 1, close - i - 1);
    bool valid = !key.empty();
    for (char c : key)
      if (!((c >= 'A' && c <= 'Z') || c == '_')) valid = false;
    if (valid) {
      keys.emplace(key);
      i = close + 1;
    } else {
      ++i;
    }
  }
  return keys;
}

// Pure substitution in a single pass over the template: binding values are
// emitted verbatim and never rescanned, so placeholder-looking text inside a
// chunk cannot expand recursively.
inline PromptSpec build_prompt(TemplateId id,
                               const std::map<std::string, std::string>& bindings,
                               const TemplateSet& set = TemplateSet()) {
  const std::string& tpl = set.text(id);
  PromptSpec spec;
  spec.template_id = id;
  std::string out;
  out.reserve(tpl.size());
  size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] != '{') {
      out += tpl[i++];
      continue;
    }
    size_t close = tpl.find('}', i + 1);
    std::string key =
        close == std::string::npos ? "" : tpl.substr(i + 1, close - i - 1);
    bool valid = !key.empty();
    for (char c : key)
      if (!((c >= 'A' && c <= 'Z') || c == '_')) valid = false;
    if (!valid) {
      out += tpl[i++];
      continue;
    }
    auto it = bindings.find(key);
    if (it == bindings.end()) throw UnboundPlaceholder(key);
    out += it->second;
    spec.placeholders_bound[key] = it->second;
    i = close + 1;
  }
  spec.filled_text = std::move(out);
  return spec;
}

}  // namespace migkit
