#pragma once

#include <algorithm>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "migkit/embed.hpp"

namespace migkit {

class EmbedderMismatch : public std::runtime_error {
public:
  explicit EmbedderMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

enum class StoreKind { OracleContext, PgDocs, SmeRules, PairExamples };

inline const char* store_name(StoreKind s) {
  switch (s) {
    case StoreKind::OracleContext: return "oracle_context";
    case StoreKind::PgDocs: return "pg_docs";
    case StoreKind::SmeRules: return "sme_rules";
    default: return "pair_examples";
  }
}

inline StoreKind store_from_name(std::string_view name) {
  std::string n = lower_copy(name);
  if (n == "oracle_context" || n == "oracle-context") return StoreKind::OracleContext;
  if (n == "pg_docs" || n == "pg-docs") return StoreKind::PgDocs;
  if (n == "sme_rules" || n == "sme-rules") return StoreKind::SmeRules;
  if (n == "pair_examples" || n == "pair-examples") return StoreKind::PairExamples;
  throw std::invalid_argument("unknown store kind: " + std::string(name));
}

struct KbEntry {
  std::string id;  // stable content hash; build derives it when empty
  StoreKind store = StoreKind::OracleContext;
  std::string text;
  std::optional<std::string> pair_target;  // PostgreSQL side, PairExamples only
  std::string source;                      // originating path, if any
  std::vector<std::string> tags;           // feature classes of the text

  json to_json() const {
    json j{{"id", id}, {"store", store_name(store)}, {"text", text}};
    if (pair_target) j["pair_target"] = *pair_target;
    json meta = json::object();
    if (!source.empty()) meta["source"] = source;
    if (!tags.empty()) meta["tags"] = tags;
    j["metadata"] = meta;
    return j;
  }

  static KbEntry from_json(const json& j) {
    KbEntry e;
    e.id = j.value("id", "");
    e.store = store_from_name(j.at("store").get<std::string>());
    e.text = j.at("text").get<std::string>();
    if (j.contains("pair_target") && !j["pair_target"].is_null())
      e.pair_target = j["pair_target"].get<std::string>();
    if (j.contains("metadata")) {
      const auto& m = j["metadata"];
      e.source = m.value("source", "");
      if (m.contains("tags")) e.tags = m["tags"].get<std::vector<std::string>>();
    }
    return e;
  }
};

inline std::string make_entry_id(const KbEntry& e) {
  std::string material = std::string(store_name(e.store)) + "\x1f" + e.text;
  if (e.pair_target) material += "\x1f" + *e.pair_target;
  return content_id(material);
}

struct RetrievalResult {
  KbEntry entry;
  double similarity = 0.0;
  size_t rank = 0;  // 1-based
};

// Exact cosine nearest-neighbour store over one kind of entry. Queries score
// every entry (no approximation) and break ties by ascending entry id, so
// rankings are reproducible across rebuilds.
class VectorIndex {
public:
  VectorIndex() = default;

  // Degenerate store with zero entries; queries against it must not be
  // issued directly (strategy retrieval treats it as an always-empty result).
  static VectorIndex empty(StoreKind kind, EmbedderRef embedder) {
    VectorIndex idx;
    idx.store_ = kind;
    idx.embedder_ = std::move(embedder);
    return idx;
  }

  static VectorIndex build(std::vector<KbEntry> entries, EmbedderRef embedder) {
    if (entries.empty()) throw std::invalid_argument("build_index: no entries");
    if (!embedder) throw std::invalid_argument("build_index: no embedder");
    VectorIndex idx;
    idx.store_ = entries.front().store;
    idx.embedder_ = std::move(embedder);
    std::set<std::string> ids;
    for (auto& e : entries) {
      if (e.store != idx.store_)
        throw std::invalid_argument("build_index: mixed store kinds");
      if (e.pair_target.has_value() != (e.store == StoreKind::PairExamples))
        throw std::invalid_argument(
            "build_index: pair_target must be present exactly for pair_examples");
      if (e.id.empty()) e.id = make_entry_id(e);
      size_t serial = 1;
      while (!ids.insert(e.id).second)  // duplicate content: derive a distinct id
        e.id = content_id(make_entry_id(e) + "#" + std::to_string(serial++));
      idx.add_vector(e, idx.embedder_->embed(e.text));
    }
    return idx;
  }

  // Low-level append; rejects vectors produced under a different embedder.
  void add_vector(KbEntry entry, EmbeddingVector vec) {
    if (vec.embedder_id != embedder_->id())
      throw EmbedderMismatch("vector from embedder '" + vec.embedder_id +
                             "' cannot join index built with '" + embedder_->id() + "'");
    if (vec.dim != embedder_->dim())
      throw EmbedderMismatch("vector dimension mismatch");
    entries_.push_back(std::move(entry));
    vectors_.insert(vectors_.end(), vec.values.begin(), vec.values.end());
  }

  std::vector<RetrievalResult> query(std::string_view text, size_t k,
                                     double min_similarity = -1.0) const {
    if (k == 0) throw std::invalid_argument("query: k must be >= 1");
    if (entries_.empty()) throw std::invalid_argument("query: empty index");
    EmbeddingVector qv = embedder_->embed(text);
    return query_vector(qv, k, min_similarity);
  }

  std::vector<RetrievalResult> query_vector(const EmbeddingVector& qv, size_t k,
                                            double min_similarity = -1.0) const {
    if (qv.embedder_id != embedder_->id())
      throw EmbedderMismatch("query vector from a different embedder");
    const size_t dim = embedder_->dim();
    std::vector<std::pair<double, size_t>> scored;
    scored.reserve(entries_.size());
    for (size_t i = 0; i < entries_.size(); ++i) {
      double sim = cosine_similarity(
          std::span<const float>(qv.values),
          std::span<const float>(vectors_.data() + i * dim, dim));
      scored.emplace_back(sim, i);
    }
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return entries_[a.second].id < entries_[b.second].id;
    });
    std::vector<RetrievalResult> out;
    for (const auto& [sim, i] : scored) {
      if (out.size() == k) break;
      if (sim < min_similarity) break;
      out.push_back({entries_[i], sim, out.size() + 1});
    }
    return out;
  }

  size_t size() const { return entries_.size(); }
  StoreKind store() const { return store_; }
  const std::vector<KbEntry>& entries() const { return entries_; }
  const EmbedderRef& embedder() const { return embedder_; }
  std::span<const float> vector_at(size_t i) const {
    const size_t dim = embedder_->dim();
    return {vectors_.data() + i * dim, dim};
  }

  // Persistence: <dir>/manifest.json + entries.jsonl + vectors.f32 (packed
  // little-endian float32, row-major). An index directory is immutable.
  void save(const fs::path& dir) const {
    fs::create_directories(dir);
    json manifest{{"format_version", 1},
                  {"store", store_name(store_)},
                  {"embedder_id", embedder_->id()},
                  {"embedder", embedder_->to_json()},
                  {"dim", embedder_->dim()},
                  {"entry_count", entries_.size()}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::vector<json> rows;
    rows.reserve(entries_.size());
    for (const auto& e : entries_) rows.push_back(e.to_json());
    write_jsonl(dir / "entries.jsonl", rows);
    std::string blob(reinterpret_cast<const char*>(vectors_.data()),
                     vectors_.size() * sizeof(float));
    write_file(dir / "vectors.f32", blob);
  }

  // Built-in embedders are reconstructed from the persisted statistics; an
  // external (HTTP) embedder must be reattached by the caller and must carry
  // the exact embedder_id the index was built with.
  static VectorIndex load(const fs::path& dir, EmbedderRef external = nullptr) {
    json manifest = json::parse(read_file(dir / "manifest.json"));
    VectorIndex idx;
    idx.store_ = store_from_name(manifest.at("store").get<std::string>());
    const json& emb = manifest.at("embedder");
    if (emb.at("kind") == "trigram-tfidf")
      idx.embedder_ = std::make_shared<TrigramEmbedder>(TrigramEmbedder::from_json(emb));
    else if (external)
      idx.embedder_ = std::move(external);
    else
      throw IoError("index at " + dir.string() + " needs embedder kind '" +
                    emb.at("kind").get<std::string>() +
                    "' which must be reattached by the caller");
    if (idx.embedder_->id() != manifest.at("embedder_id").get<std::string>())
      throw EmbedderMismatch("reconstructed embedder id differs from manifest");
    for (const auto& row : read_jsonl(dir / "entries.jsonl"))
      idx.entries_.push_back(KbEntry::from_json(row));
    std::string blob = read_file(dir / "vectors.f32");
    size_t expect = idx.entries_.size() * idx.embedder_->dim() * sizeof(float);
    if (blob.size() != expect)
      throw IoError("vectors.f32 has " + std::to_string(blob.size()) +
                    " bytes, expected " + std::to_string(expect));
    idx.vectors_.resize(idx.entries_.size() * idx.embedder_->dim());
    std::memcpy(idx.vectors_.data(), blob.data(), blob.size());
    size_t count = manifest.at("entry_count").get<size_t>();
    if (count != idx.entries_.size()) throw IoError("manifest entry_count mismatch");
    return idx;
  }

private:
  StoreKind store_ = StoreKind::OracleContext;
  EmbedderRef embedder_;
  std::vector<KbEntry> entries_;
  std::vector<float> vectors_;  // row-major [count x dim]
};

inline VectorIndex build_index(std::vector<KbEntry> entries, EmbedderRef embedder) {
  return VectorIndex::build(std::move(entries), std::move(embedder));
}

}  // namespace migkit
