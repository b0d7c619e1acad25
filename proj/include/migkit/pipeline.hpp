#pragma once

#include <atomic>
#include <chrono>
#include <ctime>
#include <thread>

#include "migkit/backend.hpp"
#include "migkit/chunk.hpp"
#include "migkit/knowledge_base.hpp"
#include "migkit/prompt.hpp"

namespace migkit {

enum class PipelineKind { Conversion, History, RagA, RagB };

inline const char* pipeline_name(PipelineKind p) {
  switch (p) {
    case PipelineKind::Conversion: return "conversion";
    case PipelineKind::History: return "history";
    case PipelineKind::RagA: return "rag-a";
    default: return "rag-b";
  }
}

inline PipelineKind pipeline_from_name(std::string_view name) {
  std::string n = lower_copy(name);
  if (n == "conversion") return PipelineKind::Conversion;
  if (n == "history") return PipelineKind::History;
  if (n == "rag-a" || n == "rag_a") return PipelineKind::RagA;
  if (n == "rag-b" || n == "rag_b") return PipelineKind::RagB;
  throw std::invalid_argument("unknown pipeline: " + std::string(name));
}

struct RunConfig {
  PipelineKind pipeline = PipelineKind::Conversion;
  size_t max_chunk_bytes = 8192;
  bool statement_per_chunk = false;
  size_t retrieval_k = 3;
  double min_similarity_a = kDefaultMinSimilarityStrategyA;
  double min_similarity_b = kDefaultMinSimilarityStrategyB;
  size_t history_budget_bytes = 16384;
  size_t jobs = 1;  // worker threads == max in-flight backend requests
  const FeatureTaxonomy* taxonomy = nullptr;  // defaults to the Oracle taxonomy
  TemplateSet templates;
  std::string input_root;

  json snapshot(const std::string& backend_name) const {
    return json{{"pipeline", pipeline_name(pipeline)},
                {"backend", backend_name},
                {"max_chunk_bytes", max_chunk_bytes},
                {"statement_per_chunk", statement_per_chunk},
                {"retrieval_k", retrieval_k},
                {"min_similarity_a", min_similarity_a},
                {"min_similarity_b", min_similarity_b},
                {"history_budget_bytes", history_budget_bytes},
                {"jobs", jobs},
                {"input_root", input_root}};
  }
};

// Per-chunk provenance kept for the run log.
struct ChunkRecord {
  size_t index = 0;
  TemplateId template_id = TemplateId::Direct;
  std::map<std::string, std::string> bindings;
  json retrieval;  // per-store ids and similarities; null outside RAG
  int attempts = 1;
  bool ok = true;
  std::string error;
  std::string output_text;
  double latency_ms = 0.0;
};

struct FileOutcome {
  std::string rel_path;
  bool converted = false;
  std::string cause;
  size_t chunk_count = 0;
  std::string output_text;
  std::vector<ChunkRecord> chunks;
};

struct MigrationRun {
  std::string run_id;
  PipelineKind pipeline = PipelineKind::Conversion;
  json config_snapshot;
  std::string corpus_fingerprint;
  std::vector<FileOutcome> files;
  std::vector<std::string> not_converted;
  std::string started_at;
  std::string finished_at;
};

namespace detail {

inline std::string iso_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string rel_path_of(const std::string& path, const std::string& root) {
  if (!root.empty()) {
    std::error_code ec;
    auto rel = fs::relative(path, root, ec);
    if (!ec && !rel.empty() && rel.native().rfind("..", 0) != 0)
      return rel.generic_string();
  }
  return fs::path(path).filename().string();
}

inline std::string corpus_fingerprint(std::span<const SourceScript> scripts,
                                      const std::string& root) {
  std::vector<std::string> parts;
  parts.reserve(scripts.size());
  for (const auto& s : scripts)
    parts.push_back(rel_path_of(s.path, root) + "\x1f" + content_id(s.text));
  std::sort(parts.begin(), parts.end());
  uint64_t h = 14695981039346656037ull;
  for (const auto& p : parts) h = fnv1a64(p, h);
  return to_hex(h);
}

inline std::string join_results(const std::vector<RetrievalResult>& results) {
  if (results.empty()) return kNoContentMarker;
  std::string out;
  for (size_t i = 0; i < results.size(); ++i) {
    if (i) out += "\n---\n";
    out += results[i].entry.text;
  }
  return out;
}

inline std::string join_pairs(const std::vector<RetrievalResult>& results) {
  if (results.empty()) return kNoContentMarker;
  std::string out;
  for (size_t i = 0; i < results.size(); ++i) {
    if (i) out += "\n---\n";
    out += "Oracle:\n" + results[i].entry.text + "\nPostgreSQL:\n" +
           results[i].entry.pair_target.value_or("");
  }
  return out;
}

inline json retrieval_provenance(const std::vector<RetrievalResult>& results) {
  json arr = json::array();
  for (const auto& r : results)
    arr.push_back({{"id", r.entry.id}, {"similarity", r.similarity}, {"rank", r.rank}});
  return arr;
}

// History window: most recent first; the budget drops the oldest bytes, so a
// partially fitting entry keeps only its trailing suffix.
inline std::string history_window(const std::vector<ChunkRecord>& done,
                                  size_t budget_bytes) {
  std::string out;
  size_t remaining = budget_bytes;
  for (auto it = done.rbegin(); it != done.rend() && remaining > 0; ++it) {
    const std::string& text = it->output_text;
    std::string part = text.size() <= remaining
                           ? text
                           : text.substr(text.size() - remaining);
    out += "-- [chunk " + std::to_string(it->index) + "]\n";
    out += part;
    out += "\n";
    remaining -= part.size();
  }
  return out;
}

}  // namespace detail

// Translates one script through the selected pipeline. Chunks run strictly in
// index order; the first chunk that exhausts the backend marks the whole file
// "not converted" and leaves every other file untouched.
inline FileOutcome run_file(const SourceScript& script, TranslatorBackend& backend,
                            const RunConfig& cfg, const KnowledgeBase* kb) {
  const FeatureTaxonomy& tax =
      cfg.taxonomy ? *cfg.taxonomy : default_taxonomy(script.dialect);
  FileOutcome outcome;
  outcome.rel_path = detail::rel_path_of(script.path, cfg.input_root);

  ChunkConfig ccfg{.max_chunk_bytes = cfg.max_chunk_bytes,
                   .statement_per_chunk = cfg.statement_per_chunk,
                   .taxonomy = &tax};
  auto chunks = chunk(script, ccfg);
  outcome.chunk_count = chunks.size();

  for (const auto& c : chunks) {
    ChunkRecord rec;
    rec.index = c.index;
    std::map<std::string, std::string> bindings;
    bindings["CURRENT_CHUNK"] = c.text;
    switch (cfg.pipeline) {
      case PipelineKind::Conversion:
        rec.template_id = TemplateId::Direct;
        break;
      case PipelineKind::History:
        // first chunk has no history and behaves exactly like direct conversion
        if (outcome.chunks.empty()) {
          rec.template_id = TemplateId::Direct;
        } else {
          rec.template_id = TemplateId::History;
          bindings["HISTORY"] =
              detail::history_window(outcome.chunks, cfg.history_budget_bytes);
        }
        break;
      case PipelineKind::RagA: {
        rec.template_id = TemplateId::StrategyA;
        auto ctx = retrieve_strategy_a(*kb, c, cfg.retrieval_k, cfg.min_similarity_a);
        bindings["ORACLE_CONTEXT"] = detail::join_results(ctx.oracle_context);
        bindings["POSTGRES_DOCS"] = detail::join_results(ctx.pg_docs);
        bindings["CONVERTING_RULES"] = detail::join_results(ctx.sme_rules);
        rec.retrieval = {
            {"oracle_context", detail::retrieval_provenance(ctx.oracle_context)},
            {"pg_docs", detail::retrieval_provenance(ctx.pg_docs)},
            {"sme_rules", detail::retrieval_provenance(ctx.sme_rules)}};
        break;
      }
      case PipelineKind::RagB: {
        rec.template_id = TemplateId::StrategyB;
        auto pairs = retrieve_strategy_b(*kb, c, cfg.retrieval_k, cfg.min_similarity_b);
        bindings["RETRIEVED_EXAMPLES"] = detail::join_pairs(pairs);
        rec.retrieval = {{"pair_examples", detail::retrieval_provenance(pairs)}};
        break;
      }
    }
    PromptSpec prompt = build_prompt(rec.template_id, bindings, cfg.templates);
    rec.bindings = prompt.placeholders_bound;
    TranslateResult res = backend.translate({prompt.filled_text, c.text});
    rec.attempts = res.attempts;
    rec.latency_ms = res.latency_ms;
    if (!res.ok) {
      rec.ok = false;
      rec.error = res.error;
      outcome.chunks.push_back(std::move(rec));
      outcome.converted = false;
      outcome.cause = "chunk " + std::to_string(c.index) + ": " + res.error;
      return outcome;
    }
    rec.output_text = strip_code_fences(res.text);
    outcome.chunks.push_back(std::move(rec));
  }

  std::vector<ChunkOutput> outs;
  outs.reserve(outcome.chunks.size());
  for (const auto& r : outcome.chunks)
    outs.push_back({script.path, r.index, r.output_text});
  outcome.output_text = assemble(outs);
  outcome.converted = true;
  return outcome;
}

inline MigrationRun run_pipeline(std::span<const SourceScript> scripts,
                                 TranslatorBackend& backend, const RunConfig& cfg,
                                 const KnowledgeBase* kb = nullptr) {
  if (cfg.pipeline == PipelineKind::RagA) {
    if (!kb) throw StoreMissing(StoreKind::OracleContext);
    auto missing = kb->missing_for_strategy_a();
    if (!missing.empty()) throw StoreMissing(missing.front());
  }
  if (cfg.pipeline == PipelineKind::RagB) {
    if (!kb || !kb->has(StoreKind::PairExamples))
      throw StoreMissing(StoreKind::PairExamples);
  }

  MigrationRun run;
  run.pipeline = cfg.pipeline;
  run.config_snapshot = cfg.snapshot(backend.name());
  run.corpus_fingerprint = detail::corpus_fingerprint(scripts, cfg.input_root);
  run.run_id = to_hex(fnv1a64(run.config_snapshot.dump() + run.corpus_fingerprint));
  run.started_at = detail::iso_now();

  // deterministic processing order regardless of caller ordering
  std::vector<size_t> order(scripts.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return detail::rel_path_of(scripts[a].path, cfg.input_root) <
           detail::rel_path_of(scripts[b].path, cfg.input_root);
  });

  run.files.resize(scripts.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      size_t slot = next.fetch_add(1);
      if (slot >= order.size()) break;
      run.files[slot] = run_file(scripts[order[slot]], backend, cfg, kb);
    }
  };
  size_t jobs = std::max<size_t>(1, cfg.jobs);
  if (jobs == 1 || scripts.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t j = 0; j < std::min(jobs, scripts.size()); ++j)
      pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& f : run.files)
    if (!f.converted) run.not_converted.push_back(f.rel_path);
  run.finished_at = detail::iso_now();
  return run;
}

// Named entry points for the four pipelines.

inline MigrationRun run_conversion(std::span<const SourceScript> scripts,
                                   TranslatorBackend& backend, RunConfig cfg = {}) {
  cfg.pipeline = PipelineKind::Conversion;
  return run_pipeline(scripts, backend, cfg);
}

inline MigrationRun run_history(std::span<const SourceScript> scripts,
                                TranslatorBackend& backend, RunConfig cfg = {}) {
  cfg.pipeline = PipelineKind::History;
  return run_pipeline(scripts, backend, cfg);
}

enum class RagStrategy { A, B };

inline MigrationRun run_rag(std::span<const SourceScript> scripts,
                            TranslatorBackend& backend, const KnowledgeBase& kb,
                            RagStrategy strategy, size_t k, RunConfig cfg = {}) {
  cfg.pipeline = strategy == RagStrategy::A ? PipelineKind::RagA : PipelineKind::RagB;
  cfg.retrieval_k = k;
  return run_pipeline(scripts, backend, cfg, &kb);
}

// ---------------------------------------------------------------------------
// Run directory persistence
// ---------------------------------------------------------------------------

inline json run_manifest_json(const MigrationRun& run) {
  json files = json::array();
  for (const auto& f : run.files) {
    json jf{{"input", f.rel_path},
            {"status", f.converted ? "converted" : "not_converted"},
            {"chunks", f.chunk_count}};
    if (f.converted)
      jf["output"] = "outputs/" + f.rel_path;
    else
      jf["cause"] = f.cause;
    files.push_back(std::move(jf));
  }
  return json{{"run_id", run.run_id},
              {"pipeline", pipeline_name(run.pipeline)},
              {"config", run.config_snapshot},
              {"corpus_fingerprint", run.corpus_fingerprint},
              {"started_at", run.started_at},
              {"finished_at", run.finished_at},
              {"files", files},
              {"not_converted", run.not_converted},
              {"artifacts", {"manifest.json", "provenance.jsonl"}}};
}

inline void write_migration_run(const MigrationRun& run, const fs::path& dir) {
  fs::create_directories(dir / "outputs");
  for (const auto& f : run.files)
    if (f.converted) write_file(dir / "outputs" / f.rel_path, f.output_text);

  std::vector<json> prov;
  for (const auto& f : run.files) {
    for (const auto& r : f.chunks) {
      json row{{"file", f.rel_path},
               {"index", r.index},
               {"template", template_name(r.template_id)},
               {"bindings", r.bindings},
               {"attempts", r.attempts},
               {"ok", r.ok}};
      if (!r.retrieval.is_null()) row["retrieval"] = r.retrieval;
      if (!r.ok) row["error"] = r.error;
      prov.push_back(std::move(row));
    }
  }
  write_jsonl(dir / "provenance.jsonl", prov);

  json manifest = run_manifest_json(run);
  // the manifest promises its artifact paths exist; check before writing
  for (const auto& f : run.files)
    if (f.converted && !fs::exists(dir / "outputs" / f.rel_path))
      throw IoError("missing run artifact: outputs/" + f.rel_path);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace migkit
