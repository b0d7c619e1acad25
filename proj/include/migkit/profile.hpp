#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "migkit/taxonomy.hpp"

namespace migkit {

class DialectMismatch : public std::runtime_error {
public:
  explicit DialectMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

enum class SizeClass { S, M, L };

inline const char* size_class_name(SizeClass s) {
  switch (s) {
    case SizeClass::S: return "S";
    case SizeClass::M: return "M";
    default: return "L";
  }
}

inline SizeClass size_class_for_lines(size_t line_count) {
  if (line_count <= 100) return SizeClass::S;
  if (line_count <= 200) return SizeClass::M;
  return SizeClass::L;
}

struct SourceScript {
  std::string path;
  Dialect dialect = Dialect::Oracle;
  std::string text;
  size_t line_count = 0;
  SizeClass size_class = SizeClass::S;
};

inline SourceScript make_script(std::string path, Dialect dialect, std::string text) {
  SourceScript s;
  s.path = std::move(path);
  s.dialect = dialect;
  s.text = std::move(text);
  s.line_count = count_lines(s.text);
  s.size_class = size_class_for_lines(s.line_count);
  return s;
}

inline SourceScript load_script(const fs::path& path, Dialect dialect) {
  return make_script(path.string(), dialect, read_file(path));
}

// Keyword-hit counts per feature class. Counts are integral for profiled
// scripts; predicted profiles may redistribute them fractionally.
struct FeatureProfile {
  std::map<std::string, double> counts;
  double total_hits = 0;

  std::map<std::string, double> percentages() const {
    std::map<std::string, double> pct;
    for (const auto& [name, c] : counts) pct[name] = total_hits > 0 ? c / total_hits : 0.0;
    return pct;
  }

  void add(const FeatureProfile& other) {
    for (const auto& [name, c] : other.counts) counts[name] += c;
    total_hits += other.total_hits;
  }

  json to_json() const {
    json j;
    j["counts"] = counts;
    j["percentages"] = percentages();
    j["total_hits"] = total_hits;
    return j;
  }
};

namespace detail {

struct PatternEntry {
  const KeywordPattern* pattern;
  const FeatureClass* cls;
};

// A script is profiled in RMAN mode when its first non-comment tokens look
// like an RMAN command; only then do mode-gated classes participate.
inline bool detect_rman_mode(std::span<const Token> tokens) {
  static const std::set<std::string> starters = {"RMAN",    "BACKUP",    "RESTORE",
                                                 "RECOVER", "CROSSCHECK", "DUPLICATE"};
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (!is_word_token(tokens[i])) return false;
    std::string up = upper_copy(tokens[i].text);
    if (starters.count(up)) return true;
    if (up == "CONNECT" && i + 1 < tokens.size() && is_word_token(tokens[i + 1]) &&
        upper_copy(tokens[i + 1].text) == "TARGET")
      return true;
    if (up == "RUN" && i + 1 < tokens.size() && tokens[i + 1].text == "{") return true;
    return false;
  }
  return false;
}

}  // namespace detail

// Keyword-level classifier: counts taxonomy pattern hits over the token
// stream. Literal and comment content never reaches the matcher, and quoted
// identifiers keep their quotes, so neither can produce false hits. Longest
// pattern wins at each position and consumes its tokens. rman_override lets a
// caller working on a slice (e.g. one chunk) inherit the whole-script mode.
inline FeatureProfile profile_tokens(std::span<const Token> tokens,
                                     const FeatureTaxonomy& taxonomy,
                                     std::optional<bool> rman_override = std::nullopt) {
  FeatureProfile prof;
  for (const auto& cls : taxonomy.classes) prof.counts[cls.name] = 0;

  std::map<std::string, std::vector<detail::PatternEntry>> by_first_word;
  for (const auto& cls : taxonomy.classes)
    for (const auto& pat : cls.keyword_patterns)
      by_first_word[pat.words.front()].push_back({&pat, &cls});
  for (auto& [_, entries] : by_first_word)
    std::stable_sort(entries.begin(), entries.end(),
                     [](const detail::PatternEntry& a, const detail::PatternEntry& b) {
                       return a.pattern->words.size() > b.pattern->words.size();
                     });

  const bool rman_mode = rman_override.value_or(detail::detect_rman_mode(tokens));

  size_t i = 0;
  while (i < tokens.size()) {
    if (!detail::is_word_token(tokens[i])) {
      ++i;
      continue;
    }
    std::string up = upper_copy(tokens[i].text);
    auto it = by_first_word.find(up);
    size_t consumed = 1;
    if (it != by_first_word.end()) {
      for (const auto& entry : it->second) {
        if (entry.cls->rman_mode_only && !rman_mode) continue;
        const auto& words = entry.pattern->words;
        if (i + words.size() > tokens.size()) continue;
        bool ok = true;
        for (size_t k = 1; k < words.size(); ++k) {
          if (!detail::is_word_token(tokens[i + k]) ||
              upper_copy(tokens[i + k].text) != words[k]) {
            ok = false;
            break;
          }
        }
        if (ok) {
          prof.counts[entry.cls->name] += 1;
          prof.total_hits += 1;
          consumed = words.size();
          break;
        }
      }
    }
    i += consumed;
  }
  return prof;
}

inline FeatureProfile profile(const SourceScript& script, const FeatureTaxonomy& taxonomy) {
  if (script.dialect != taxonomy.dialect)
    throw DialectMismatch("script " + script.path + " is " + dialect_name(script.dialect) +
                          " but taxonomy is " + dialect_name(taxonomy.dialect));
  auto lexed = tokenize(script.text, script.dialect);
  return profile_tokens(lexed.tokens, taxonomy);
}

inline FeatureProfile profile_corpus(std::span<const SourceScript> scripts,
                                     const FeatureTaxonomy& taxonomy) {
  if (scripts.empty()) throw std::invalid_argument("profile_corpus: empty corpus");
  FeatureProfile total;
  for (const auto& cls : taxonomy.classes) total.counts[cls.name] = 0;
  for (const auto& s : scripts) total.add(profile(s, taxonomy));
  return total;
}

// Redistributes Oracle-class counts through the class-to-class mapping to get
// the feature mix a correct PostgreSQL translation is expected to show.
inline FeatureProfile predict_expected_features(const FeatureProfile& oracle_profile,
                                                const FeatureMapping& mapping = default_feature_mapping()) {
  mapping.validate();
  FeatureProfile out;
  for (const auto& [src, count] : oracle_profile.counts) {
    if (count == 0) continue;
    auto row = mapping.rows.find(src);
    if (row == mapping.rows.end()) throw UnmappedClass(src);
    for (const auto& [target, weight] : row->second) out.counts[target] += count * weight;
  }
  for (const auto& [_, c] : out.counts) out.total_hits += c;
  return out;
}

inline json profile_report_json(const SourceScript& script, const FeatureProfile& prof) {
  json j = prof.to_json();
  j["file"] = script.path;
  j["dialect"] = dialect_name(script.dialect);
  j["size_class"] = size_class_name(script.size_class);
  j["line_count"] = script.line_count;
  return j;
}

}  // namespace migkit
