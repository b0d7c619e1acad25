#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "migkit/chunk.hpp"
#include "migkit/vector_index.hpp"

namespace migkit {

class StoreMissing : public std::runtime_error {
public:
  explicit StoreMissing(StoreKind kind)
      : std::runtime_error(std::string("knowledge base store missing: ") +
                           store_name(kind)),
        store(kind) {}
  StoreKind store;
};

// Similarity floors applied when no explicit threshold is configured. The
// values are working defaults, not tuned constants.
inline constexpr double kDefaultMinSimilarityStrategyA = 0.15;
inline constexpr double kDefaultMinSimilarityStrategyB = 0.25;

// Byte cap for paragraph entries cut from documentation/rule files.
inline constexpr size_t kDocEntryMaxBytes = 2048;

// Holds one index per store kind. Strategy A uses the three heterogeneous
// stores; Strategy B only the unified pair store.
class KnowledgeBase {
public:
  void put(VectorIndex index) { stores_[index.store()] = std::move(index); }

  bool has(StoreKind kind) const { return stores_.count(kind) > 0; }

  const VectorIndex& store(StoreKind kind) const {
    auto it = stores_.find(kind);
    if (it == stores_.end()) throw StoreMissing(kind);
    return it->second;
  }

  std::vector<StoreKind> missing_for_strategy_a() const {
    std::vector<StoreKind> missing;
    for (StoreKind k :
         {StoreKind::OracleContext, StoreKind::PgDocs, StoreKind::SmeRules})
      if (!has(k)) missing.push_back(k);
    return missing;
  }

  // Directory layout: <root>/<store_name>/ per persisted index.
  static KnowledgeBase load(const fs::path& root, EmbedderRef external = nullptr) {
    KnowledgeBase kb;
    for (StoreKind k : {StoreKind::OracleContext, StoreKind::PgDocs,
                        StoreKind::SmeRules, StoreKind::PairExamples}) {
      fs::path dir = root / store_name(k);
      if (fs::exists(dir / "manifest.json")) kb.put(VectorIndex::load(dir, external));
    }
    return kb;
  }

  void save(const fs::path& root) const {
    for (const auto& [kind, index] : stores_) index.save(root / store_name(kind));
  }

private:
  std::map<StoreKind, VectorIndex> stores_;
};

struct TripleContext {
  std::vector<RetrievalResult> oracle_context;
  std::vector<RetrievalResult> pg_docs;
  std::vector<RetrievalResult> sme_rules;
};

namespace detail {

inline bool tags_intersect(const std::vector<std::string>& tags,
                           const std::vector<std::string>& classes) {
  for (const auto& t : tags)
    for (const auto& c : classes)
      if (t == c) return true;
  return false;
}

// Re-ranks results so that, at exactly equal similarity, entries whose tags
// intersect the chunk's feature classes come first; id ascending last.
inline std::vector<RetrievalResult> rerank_by_tags(
    std::vector<RetrievalResult> results, const std::vector<std::string>& classes,
    size_t k) {
  std::stable_sort(results.begin(), results.end(),
                   [&](const RetrievalResult& a, const RetrievalResult& b) {
                     if (a.similarity != b.similarity)
                       return a.similarity > b.similarity;
                     bool ta = tags_intersect(a.entry.tags, classes);
                     bool tb = tags_intersect(b.entry.tags, classes);
                     if (ta != tb) return ta;
                     return a.entry.id < b.entry.id;
                   });
  if (results.size() > k) results.resize(k);
  for (size_t i = 0; i < results.size(); ++i) results[i].rank = i + 1;
  return results;
}

inline std::vector<std::string> present_classes(const FeatureProfile& profile) {
  std::vector<std::string> classes;
  for (const auto& [name, count] : profile.counts)
    if (count > 0) classes.push_back(name);
  return classes;
}

}  // namespace detail

// Strategy A: query the three heterogeneous stores independently, keeping
// per-store provenance. Up to k results per store.
inline TripleContext retrieve_strategy_a(
    const KnowledgeBase& kb, const Chunk& chunk, size_t k,
    double min_similarity = kDefaultMinSimilarityStrategyA) {
  for (StoreKind kind : kb.missing_for_strategy_a()) throw StoreMissing(kind);
  auto classes = detail::present_classes(chunk.features);
  // fetch extra candidates so a tag-preferred tie just past k can surface
  const size_t fetch = 2 * k + 8;
  TripleContext ctx;
  auto pull = [&](StoreKind kind) -> std::vector<RetrievalResult> {
    const auto& index = kb.store(kind);
    if (index.size() == 0) return {};
    auto results =
        index.query(chunk.text, std::min(fetch, index.size()), min_similarity);
    return detail::rerank_by_tags(std::move(results), classes, k);
  };
  ctx.oracle_context = pull(StoreKind::OracleContext);
  ctx.pg_docs = pull(StoreKind::PgDocs);
  ctx.sme_rules = pull(StoreKind::SmeRules);
  return ctx;
}

// Strategy B: query the unified pair store; results carry both sides.
inline std::vector<RetrievalResult> retrieve_strategy_b(
    const KnowledgeBase& kb, const Chunk& chunk, size_t k,
    double min_similarity = kDefaultMinSimilarityStrategyB) {
  if (!kb.has(StoreKind::PairExamples)) throw StoreMissing(StoreKind::PairExamples);
  const auto& index = kb.store(StoreKind::PairExamples);
  if (index.size() == 0) return {};
  return index.query(chunk.text, std::min(k, index.size()), min_similarity);
}

// ---------------------------------------------------------------------------
// Gold-standard retrieval validation
// ---------------------------------------------------------------------------

enum class GoldScenario {
  ExactMatch,
  NoMatch,
  PartialMatch,
  MixedFeature,
  Ambiguous,
  SyntaxAlikeSemanticsDiffer
};

inline const char* gold_scenario_name(GoldScenario s) {
  switch (s) {
    case GoldScenario::ExactMatch: return "exact_match";
    case GoldScenario::NoMatch: return "no_match";
    case GoldScenario::PartialMatch: return "partial_match";
    case GoldScenario::MixedFeature: return "mixed_feature";
    case GoldScenario::Ambiguous: return "ambiguous";
    default: return "syntax_alike_semantics_differ";
  }
}

inline GoldScenario gold_scenario_from_name(std::string_view name) {
  std::string n = lower_copy(name);
  if (n == "exact_match") return GoldScenario::ExactMatch;
  if (n == "no_match") return GoldScenario::NoMatch;
  if (n == "partial_match") return GoldScenario::PartialMatch;
  if (n == "mixed_feature") return GoldScenario::MixedFeature;
  if (n == "ambiguous") return GoldScenario::Ambiguous;
  if (n == "syntax_alike_semantics_differ")
    return GoldScenario::SyntaxAlikeSemanticsDiffer;
  throw std::invalid_argument("unknown gold scenario: " + std::string(name));
}

struct GoldRetrievalCase {
  std::string query_chunk;
  GoldScenario scenario = GoldScenario::ExactMatch;
  std::vector<std::string> expected_ids;
  bool must_abstain = false;

  void validate() const {
    if (must_abstain != (scenario == GoldScenario::NoMatch))
      throw std::invalid_argument(
          "gold case: must_abstain must hold exactly for no_match scenarios");
  }

  json to_json() const {
    return json{{"query_chunk", query_chunk},
                {"scenario", gold_scenario_name(scenario)},
                {"expected_ids", expected_ids},
                {"must_abstain", must_abstain}};
  }

  static GoldRetrievalCase from_json(const json& j) {
    GoldRetrievalCase c;
    c.query_chunk = j.at("query_chunk").get<std::string>();
    c.scenario = gold_scenario_from_name(j.at("scenario").get<std::string>());
    if (j.contains("expected_ids"))
      c.expected_ids = j["expected_ids"].get<std::vector<std::string>>();
    c.must_abstain = j.value("must_abstain", false);
    c.validate();
    return c;
  }
};

inline std::vector<GoldRetrievalCase> load_gold_cases(const fs::path& path) {
  std::vector<GoldRetrievalCase> cases;
  for (const auto& row : read_jsonl(path))
    cases.push_back(GoldRetrievalCase::from_json(row));
  return cases;
}

struct RetrievalScorecard {
  size_t cases = 0;
  size_t abstain_cases = 0;
  double hit_at_k = 0.0;               // over non-abstain cases
  double mean_reciprocal_rank = 0.0;   // over non-abstain cases
  double abstention_correctness = 1.0; // over no_match cases
  double ranking_stability = 1.0;      // identical orderings across rebuilds
  std::map<std::string, double> hit_at_k_by_scenario;

  json to_json() const {
    return json{{"cases", cases},
                {"abstain_cases", abstain_cases},
                {"hit_at_k", hit_at_k},
                {"mean_reciprocal_rank", mean_reciprocal_rank},
                {"abstention_correctness", abstention_correctness},
                {"ranking_stability", ranking_stability},
                {"hit_at_k_by_scenario", hit_at_k_by_scenario}};
  }
};

// Scores retrieval quality against a gold dataset: hit@k and MRR on cases
// that expect a result, abstention correctness on no_match cases, and
// ranking stability across two independent builds of the same index.
inline RetrievalScorecard evaluate_retrieval(const std::vector<KbEntry>& entries,
                                             EmbedderRef embedder,
                                             const std::vector<GoldRetrievalCase>& gold,
                                             size_t k, double min_similarity) {
  if (gold.empty()) throw std::invalid_argument("evaluate_retrieval: empty gold set");
  VectorIndex first = VectorIndex::build(entries, embedder);
  VectorIndex second = VectorIndex::build(entries, embedder);  // rebuild for stability

  RetrievalScorecard card;
  card.cases = gold.size();
  size_t scored = 0, hits = 0, abstain_ok = 0, stable = 0;
  double rr_sum = 0.0;
  std::map<std::string, std::pair<size_t, size_t>> per_scenario;  // hits/total

  for (const auto& g : gold) {
    g.validate();
    auto results = first.query(g.query_chunk, k, min_similarity);
    auto results2 = second.query(g.query_chunk, k, min_similarity);

    bool same_order = results.size() == results2.size();
    for (size_t i = 0; same_order && i < results.size(); ++i)
      same_order = results[i].entry.id == results2[i].entry.id;
    if (same_order) ++stable;

    if (g.scenario == GoldScenario::NoMatch) {
      ++card.abstain_cases;
      if (results.empty()) ++abstain_ok;
      continue;
    }
    ++scored;
    auto& sc = per_scenario[gold_scenario_name(g.scenario)];
    ++sc.second;
    double rr = 0.0;
    bool hit = false;
    for (const auto& r : results) {
      for (const auto& want : g.expected_ids) {
        if (r.entry.id == want) {
          if (!hit) rr = 1.0 / static_cast<double>(r.rank);
          hit = true;
        }
      }
      if (hit) break;
    }
    if (hit) {
      ++hits;
      ++sc.first;
    }
    rr_sum += rr;
  }

  card.hit_at_k = scored ? static_cast<double>(hits) / scored : 1.0;
  card.mean_reciprocal_rank = scored ? rr_sum / scored : 1.0;
  card.abstention_correctness =
      card.abstain_cases ? static_cast<double>(abstain_ok) / card.abstain_cases : 1.0;
  card.ranking_stability = static_cast<double>(stable) / gold.size();
  for (const auto& [name, counts] : per_scenario)
    card.hit_at_k_by_scenario[name] =
        counts.second ? static_cast<double>(counts.first) / counts.second : 1.0;
  return card;
}

// ---------------------------------------------------------------------------
// Ingestion helpers
// ---------------------------------------------------------------------------

// One entry per statement-aligned chunk of an Oracle script, tagged with its
// feature classes.
inline std::vector<KbEntry> entries_from_scripts(std::span<const SourceScript> scripts,
                                                 const FeatureTaxonomy& taxonomy,
                                                 StoreKind kind,
                                                 size_t max_chunk_bytes = 2048) {
  std::vector<KbEntry> entries;
  ChunkConfig cfg{.max_chunk_bytes = max_chunk_bytes, .statement_per_chunk = false,
                  .taxonomy = &taxonomy};
  for (const auto& s : scripts) {
    for (const auto& c : chunk(s, cfg)) {
      KbEntry e;
      e.store = kind;
      e.text = c.text;
      e.source = s.path;
      e.tags = detail::present_classes(c.features);
      entries.push_back(std::move(e));
    }
  }
  return entries;
}

// Paragraph-level entries (blank-line delimited) for prose documentation and
// SME rule files, capped at kDocEntryMaxBytes per entry.
inline std::vector<KbEntry> entries_from_document(const std::string& text,
                                                  const std::string& source,
                                                  StoreKind kind,
                                                  size_t max_bytes = kDocEntryMaxBytes) {
  std::vector<KbEntry> entries;
  auto flush = [&](std::string para) {
    while (!para.empty() && (para.back() == '\n' || para.back() == ' ')) para.pop_back();
    if (para.empty()) return;
    for (size_t off = 0; off < para.size(); off += max_bytes) {
      KbEntry e;
      e.store = kind;
      e.text = para.substr(off, max_bytes);
      e.source = source;
      entries.push_back(std::move(e));
    }
  };
  std::string current;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos
                                                                : nl - pos);
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) {
      flush(std::move(current));
      current.clear();
    } else {
      current += line;
      current += '\n';
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  flush(std::move(current));
  return entries;
}

// Pair entries from a JSONL of {"oracle": ..., "postgres": ...} rows; feature
// tags come from profiling the Oracle side.
inline std::vector<KbEntry> entries_from_pairs_jsonl(const fs::path& path,
                                                     const FeatureTaxonomy& oracle_taxonomy) {
  std::vector<KbEntry> entries;
  for (const auto& row : read_jsonl(path)) {
    KbEntry e;
    e.store = StoreKind::PairExamples;
    if (row.contains("oracle")) {
      e.text = row.at("oracle").get<std::string>();
      e.pair_target = row.at("postgres").get<std::string>();
    } else {
      e = KbEntry::from_json(row);
      if (e.store != StoreKind::PairExamples || !e.pair_target)
        throw IoError("pair example rows need oracle/postgres or pair_target fields");
    }
    e.source = path.string();
    auto lexed = tokenize(e.text, Dialect::Oracle);
    e.tags = detail::present_classes(profile_tokens(lexed.tokens, oracle_taxonomy));
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace migkit
