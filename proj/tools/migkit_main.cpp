// migkit — Oracle-to-PostgreSQL migration toolkit CLI.
//
// Subcommands: profile, chunk, kb-build, kb-eval, migrate, evaluate, gap,
// yield, report. Exit codes: 0 success, 1 runtime failure, 2 usage/config
// error.

#include <algorithm>
#include <iostream>

#include "CLI11.hpp"
#include "migkit/dataset.hpp"
#include "migkit/evaluate.hpp"
#include "migkit/gap.hpp"
#include "migkit/knowledge_base.hpp"
#include "migkit/pipeline.hpp"
#include "migkit/remote.hpp"
#include "migkit/report.hpp"
#include "migkit/yield.hpp"

using namespace migkit;

namespace {

class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Layered configuration: a JSON config file provides defaults, explicit
// command-line flags win.
struct LayeredConfig {
  json values = json::object();

  void load(const std::string& path) {
    if (path.empty()) return;
    try {
      values = json::parse(read_file(path));
    } catch (const std::exception& e) {
      throw UsageError(std::string("bad --config file: ") + e.what());
    }
  }

  template <typename T>
  void apply(const CLI::Option* opt, const std::string& key, T& var) const {
    if (opt->count() > 0) return;  // explicit flag wins
    if (values.contains(key)) var = values.at(key).get<T>();
  }
};

std::vector<fs::path> collect_sql_files(const std::vector<std::string>& paths) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    fs::path path(p);
    if (fs::is_directory(path)) {
      for (const auto& entry : fs::recursive_directory_iterator(path)) {
        if (!entry.is_regular_file()) continue;
        auto ext = lower_copy(entry.path().extension().string());
        if (ext == ".sql" || ext == ".pls" || ext == ".pkb" || ext == ".pks" ||
            ext == ".trg")
          files.push_back(entry.path());
      }
    } else if (fs::exists(path)) {
      files.push_back(path);
    } else {
      throw UsageError("input path does not exist: " + p);
    }
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  if (files.empty()) throw UsageError("no input files found");
  return files;
}

std::vector<SourceScript> load_scripts(const std::vector<fs::path>& files,
                                       Dialect dialect) {
  std::vector<SourceScript> scripts;
  scripts.reserve(files.size());
  for (const auto& f : files) scripts.push_back(load_script(f, dialect));
  return scripts;
}

std::string detect_input_root(const std::vector<std::string>& paths,
                              const std::string& explicit_root) {
  if (!explicit_root.empty()) return explicit_root;
  if (paths.size() == 1 && fs::is_directory(paths[0]))
    return fs::path(paths[0]).string();
  return "";
}

std::string files_fingerprint(const std::vector<fs::path>& files) {
  uint64_t h = 14695981039346656037ull;
  for (const auto& f : files) {
    h = fnv1a64(f.string(), h);
    h = fnv1a64(content_id(read_file(f)), h);
  }
  return to_hex(h);
}

FeatureTaxonomy taxonomy_for(const std::string& taxonomy_path, Dialect dialect) {
  if (taxonomy_path.empty()) return default_taxonomy(dialect);
  auto tax = load_taxonomy(taxonomy_path);
  if (tax.dialect != dialect)
    throw UsageError("taxonomy file is " + std::string(dialect_name(tax.dialect)) +
                     " but --dialect is " + dialect_name(dialect));
  return tax;
}

ValidatorRef make_validator(const std::string& spec) {
  if (spec.empty() || spec == "builtin") return std::make_shared<BuiltinValidator>();
  return std::make_shared<ExternalValidator>(spec);
}

// ---------------------------------------------------------------- commands

struct GlobalFlags {
  std::string config_path;
  size_t jobs = 1;
  uint64_t seed = 0;
  LayeredConfig config;
};

int cmd_profile(const std::vector<std::string>& paths, std::string dialect_name_arg,
                const std::string& taxonomy_path,
                const std::vector<std::string>& test_paths, const std::string& out) {
  auto started = detail::iso_now();
  Dialect dialect = dialect_from_name(dialect_name_arg);
  FeatureTaxonomy tax = taxonomy_for(taxonomy_path, dialect);

  auto files = collect_sql_files(paths);
  auto scripts = load_scripts(files, dialect);
  auto corpus_profile = profile_corpus(scripts, tax);

  FeatureProfile test_profile = corpus_profile;  // unsplit corpora mirror columns
  if (!test_paths.empty()) {
    auto test_files = collect_sql_files(test_paths);
    auto test_scripts = load_scripts(test_files, dialect);
    test_profile = profile_corpus(test_scripts, tax);
  }

  fs::path out_dir(out);
  fs::create_directories(out_dir);
  std::vector<json> rows;
  for (const auto& s : scripts) rows.push_back(profile_report_json(s, profile(s, tax)));
  write_jsonl(out_dir / "profiles.jsonl", rows);
  write_file(out_dir / "distribution.csv",
             distribution_csv(corpus_profile, test_profile));

  json cfg{{"dialect", dialect_name_arg},
           {"taxonomy", taxonomy_path},
           {"paths", paths},
           {"test_paths", test_paths}};
  write_cli_manifest(out_dir, "profile", cfg, files_fingerprint(files),
                     {"profiles.jsonl", "distribution.csv"}, started);
  std::cout << "profiled " << scripts.size() << " files, total hits "
            << corpus_profile.total_hits << "\n";
  return 0;
}

int cmd_chunk(const std::vector<std::string>& paths, std::string dialect_name_arg,
              size_t max_bytes, bool per_statement, const std::string& taxonomy_path,
              const std::string& out) {
  auto started = detail::iso_now();
  Dialect dialect = dialect_from_name(dialect_name_arg);
  FeatureTaxonomy tax = taxonomy_for(taxonomy_path, dialect);
  auto files = collect_sql_files(paths);
  auto scripts = load_scripts(files, dialect);

  fs::path out_dir(out);
  fs::create_directories(out_dir);
  std::vector<json> rows;
  size_t total = 0;
  for (const auto& s : scripts) {
    ChunkConfig cfg{.max_chunk_bytes = max_bytes,
                    .statement_per_chunk = per_statement,
                    .taxonomy = &tax};
    for (const auto& c : chunk(s, cfg)) {
      rows.push_back(c.to_json());
      ++total;
    }
  }
  write_jsonl(out_dir / "chunks.jsonl", rows);
  json cfg{{"dialect", dialect_name_arg},
           {"max_chunk_bytes", max_bytes},
           {"statement_per_chunk", per_statement}};
  write_cli_manifest(out_dir, "chunk", cfg, files_fingerprint(files),
                     {"chunks.jsonl"}, started);
  std::cout << "wrote " << total << " chunks for " << scripts.size() << " files\n";
  return 0;
}

EmbedderRef make_embedder(const std::string& embed_url, size_t dim,
                          const std::vector<std::string>& fit_corpus) {
  if (!embed_url.empty()) return std::make_shared<HttpEmbedder>(embed_url, dim);
  std::string env_url = env_or("MIGRATE_EMBED_URL", "");
  if (!env_url.empty()) return std::make_shared<HttpEmbedder>(env_url, dim);
  return make_trigram_embedder(fit_corpus, dim);
}

int cmd_kb_build(const std::string& store_arg, const std::vector<std::string>& scripts,
                 const std::vector<std::string>& docs, const std::string& entries_path,
                 const std::string& pairs_path, const std::string& out, size_t dim,
                 const std::string& embed_url, const std::string& taxonomy_path) {
  StoreKind kind = store_from_name(store_arg);
  FeatureTaxonomy tax = taxonomy_for(taxonomy_path, Dialect::Oracle);

  std::vector<KbEntry> entries;
  if (!entries_path.empty()) {
    for (const auto& row : read_jsonl(entries_path)) {
      auto e = KbEntry::from_json(row);
      if (e.store != kind)
        throw UsageError("entry store mismatch in " + entries_path);
      entries.push_back(std::move(e));
    }
  } else if (!pairs_path.empty()) {
    if (kind != StoreKind::PairExamples)
      throw UsageError("--pairs is only valid for --store pair-examples");
    entries = entries_from_pairs_jsonl(pairs_path, tax);
  } else if (!scripts.empty()) {
    auto files = collect_sql_files(scripts);
    auto loaded = load_scripts(files, Dialect::Oracle);
    entries = entries_from_scripts(loaded, tax, kind);
  } else if (!docs.empty()) {
    for (const auto& d : docs) {
      if (!fs::exists(d)) throw UsageError("doc file does not exist: " + d);
      auto doc_entries = entries_from_document(read_file(d), d, kind);
      entries.insert(entries.end(), doc_entries.begin(), doc_entries.end());
    }
  } else {
    throw UsageError("kb-build needs one of --entries/--pairs/--scripts/--docs");
  }
  if (entries.empty()) throw UsageError("no knowledge-base entries produced");

  std::vector<std::string> texts;
  texts.reserve(entries.size());
  for (const auto& e : entries) texts.push_back(e.text);
  auto embedder = make_embedder(embed_url, dim, texts);

  auto index = build_index(std::move(entries), embedder);
  index.save(fs::path(out) / store_name(kind));
  std::cout << "built " << store_name(kind) << " store with " << index.size()
            << " entries (embedder " << embedder->id() << ")\n";
  return 0;
}

int cmd_kb_eval(const std::string& kb_dir, const std::string& store_arg,
                const std::string& gold_path, size_t k, double min_similarity,
                const std::string& out, const std::string& embed_url, size_t dim) {
  auto started = detail::iso_now();
  StoreKind kind = store_from_name(store_arg);
  EmbedderRef external;
  if (!embed_url.empty()) external = std::make_shared<HttpEmbedder>(embed_url, dim);
  auto index = VectorIndex::load(fs::path(kb_dir) / store_name(kind), external);
  auto gold = load_gold_cases(gold_path);
  if (gold.empty()) throw UsageError("gold dataset is empty: " + gold_path);

  auto card = evaluate_retrieval(index.entries(), index.embedder(), gold, k,
                                 min_similarity);
  fs::path out_dir(out);
  fs::create_directories(out_dir);
  write_file(out_dir / "scorecard.json", card.to_json().dump(2) + "\n");
  json cfg{{"kb", kb_dir}, {"store", store_arg}, {"gold", gold_path},
           {"k", k},       {"min_similarity", min_similarity}};
  write_cli_manifest(out_dir, "kb-eval", cfg, content_id(read_file(gold_path)),
                     {"scorecard.json"}, started);
  std::cout << card.to_json().dump(2) << "\n";
  return 0;
}

int cmd_migrate(const std::vector<std::string>& paths, const std::string& pipeline_arg,
                const std::string& backend_arg, const std::string& kb_dir, size_t k,
                size_t max_bytes, bool per_statement, size_t history_budget,
                double min_sim_a, double min_sim_b, const std::string& llm_url,
                const std::string& model, const std::string& templates_dir,
                const std::string& taxonomy_path, const std::string& input_root_arg,
                const std::string& out, size_t jobs, const std::string& embed_url,
                size_t dim) {
  RunConfig cfg;
  cfg.pipeline = pipeline_from_name(pipeline_arg);
  cfg.max_chunk_bytes = max_bytes;
  cfg.statement_per_chunk = per_statement;
  cfg.retrieval_k = k;
  cfg.history_budget_bytes = history_budget;
  cfg.min_similarity_a = min_sim_a;
  cfg.min_similarity_b = min_sim_b;
  cfg.jobs = jobs;
  cfg.input_root = detect_input_root(paths, input_root_arg);
  if (!templates_dir.empty()) cfg.templates = TemplateSet::load(templates_dir);

  FeatureTaxonomy tax = taxonomy_for(taxonomy_path, Dialect::Oracle);
  cfg.taxonomy = &tax;

  std::unique_ptr<TranslatorBackend> backend;
  std::string b = lower_copy(backend_arg);
  if (b == "echo") {
    backend = std::make_unique<EchoBackend>();
  } else if (b == "rule" || b == "rule-baseline") {
    backend = std::make_unique<RuleBaselineBackend>();
  } else if (b == "http") {
    HttpLlmConfig hcfg;
    hcfg.url = llm_url;
    if (!model.empty()) hcfg.model = model;
    backend = std::make_unique<HttpLlmBackend>(hcfg);
  } else {
    throw UsageError("unknown backend: " + backend_arg);
  }

  KnowledgeBase kb;
  bool need_kb = cfg.pipeline == PipelineKind::RagA || cfg.pipeline == PipelineKind::RagB;
  if (need_kb) {
    if (kb_dir.empty()) {
      std::string stores = cfg.pipeline == PipelineKind::RagA
                               ? "oracle_context, pg_docs, sme_rules"
                               : "pair_examples";
      throw UsageError("pipeline " + pipeline_arg + " requires --kb (missing stores: " +
                       stores + ")");
    }
    EmbedderRef external;
    if (!embed_url.empty()) external = std::make_shared<HttpEmbedder>(embed_url, dim);
    kb = KnowledgeBase::load(kb_dir, external);
    std::vector<StoreKind> missing;
    if (cfg.pipeline == PipelineKind::RagA) missing = kb.missing_for_strategy_a();
    if (cfg.pipeline == PipelineKind::RagB && !kb.has(StoreKind::PairExamples))
      missing.push_back(StoreKind::PairExamples);
    if (!missing.empty()) {
      std::string names;
      for (auto m : missing) names += std::string(names.empty() ? "" : ", ") + store_name(m);
      throw UsageError("knowledge base at " + kb_dir + " is missing stores: " + names);
    }
  }

  auto files = collect_sql_files(paths);
  auto scripts = load_scripts(files, Dialect::Oracle);
  auto run = run_pipeline(scripts, *backend, cfg, need_kb ? &kb : nullptr);
  write_migration_run(run, out);
  std::cout << "run " << run.run_id << ": " << run.files.size() << " files, "
            << run.not_converted.size() << " not converted\n";
  return 0;
}

int cmd_evaluate(const std::string& run_dir, const std::string& references,
                 const std::string& validator_arg, const std::string& out) {
  auto started = detail::iso_now();
  EvaluateOptions opt;
  opt.validator = make_validator(validator_arg);
  auto report = evaluate_run(run_dir, references, opt);

  json run_manifest = json::parse(read_file(fs::path(run_dir) / "manifest.json"));
  std::string pipeline = run_manifest.value("pipeline", "unknown");

  fs::path out_dir(out);
  auto artifacts = write_metric_artifacts(report, out_dir, pipeline);
  json cfg{{"run", run_dir}, {"references", references},
           {"validator", validator_arg.empty() ? "builtin" : validator_arg}};
  write_cli_manifest(out_dir, "evaluate", cfg,
                     run_manifest.value("corpus_fingerprint", ""), artifacts, started);
  std::cout << "file_efficiency=" << report.file_efficiency
            << " ser_db=" << report.ser_db << " error_files=" << report.error_files
            << " not_converted=" << report.not_converted;
  if (report.unscored > 0)
    std::cout << " (warning: " << report.unscored << " files without references)";
  std::cout << "\n";
  return 0;
}

int cmd_gap(const std::string& counts_path, const std::string& dataset_path,
            const std::string& metrics_path, const std::string& weights_path,
            const std::string& taxonomy_path, bool full_precision,
            const std::string& out) {
  auto started = detail::iso_now();
  FeatureTaxonomy tax = taxonomy_for(taxonomy_path, Dialect::Oracle);

  std::map<std::string, double> counts;
  if (!counts_path.empty()) {
    json j = json::parse(read_file(counts_path));
    for (const auto& [feature, v] : j.items()) counts[feature] = v.get<double>();
  } else if (!dataset_path.empty()) {
    for (const auto& row : read_jsonl(dataset_path)) {
      if (row.value("split", "") != "train") continue;
      auto script = make_script("sample", Dialect::Oracle,
                                row.at("oracle_text").get<std::string>());
      for (const auto& [cls, c] : profile(script, tax).counts) counts[cls] += c;
    }
  } else {
    throw UsageError("gap needs --counts or --dataset");
  }
  if (counts.empty()) throw UsageError("no training counts found");

  json mj;
  try {
    mj = json::parse(read_file(metrics_path));
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad --metrics file: ") + e.what());
  }
  if (!mj.contains("pipelines") || mj["pipelines"].empty())
    throw UsageError("metrics file has no per-pipeline scores: " + metrics_path);

  std::map<std::string, std::map<std::string, FeatureQuality>> per_pipeline;
  for (const auto& [pipeline, features] : mj["pipelines"].items()) {
    for (const auto& [feature, scores] : features.items()) {
      FeatureQuality q;
      q.feature = feature;
      q.recall = scores.value("recall", 0.0);
      q.bleu = scores.value("bleu", 0.0);
      q.chrf = scores.value("chrf", 0.0);
      q.syntax_correctness = scores.value("syntax_correctness", 0.0);
      q.aggregated = scores.value("aggregated", 0.0);
      per_pipeline[pipeline][feature] = q;
    }
  }

  GapConfig gcfg;
  if (!weights_path.empty()) gcfg.weights = GapWeights::from_json(
      json::parse(read_file(weights_path)));
  if (full_precision) gcfg.gap_dict_decimals = -1;

  auto est = estimate_dataset(counts, per_pipeline, tax, gcfg);
  fs::path out_dir(out);
  fs::create_directories(out_dir);
  write_file(out_dir / "GAP.csv", gap_csv(est));
  write_file(out_dir / "gap.json", gap_report_json(est, gcfg.weights).dump(2) + "\n");
  json cfg{{"counts", counts_path}, {"dataset", dataset_path},
           {"metrics", metrics_path}, {"weights", weights_path},
           {"full_precision", full_precision}};
  write_cli_manifest(out_dir, "gap", cfg, content_id(read_file(metrics_path)),
                     {"GAP.csv", "gap.json"}, started);
  std::cout << "wrote " << est.records.size() << " gap records\n";
  return 0;
}

int cmd_yield(const std::string& inputs_path, const std::string& out) {
  auto started = detail::iso_now();
  json j;
  try {
    j = json::parse(read_file(inputs_path));
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad --inputs file: ") + e.what());
  }
  auto report = project_yield(YieldInputs::from_json(j));
  fs::path out_dir(out);
  fs::create_directories(out_dir);
  write_file(out_dir / "yield.json", report.to_json().dump(2) + "\n");
  write_file(out_dir / "yield.csv", report.to_csv());
  write_cli_manifest(out_dir, "yield", json{{"inputs", inputs_path}},
                     content_id(read_file(inputs_path)), {"yield.json", "yield.csv"},
                     started);
  std::cout << "total=" << report.total_success << " baseline=" << report.total_baseline
            << " difference=" << report.difference
            << " person_days=" << report.person_days << "\n";
  return 0;
}

int cmd_report(const std::string& metrics_path, const std::string& pipeline,
               const std::string& out) {
  auto started = detail::iso_now();
  auto report = metric_report_from_json(json::parse(read_file(metrics_path)));
  auto artifacts = write_metric_artifacts(report, out, pipeline);
  write_cli_manifest(out, "report", json{{"metrics", metrics_path}},
                     content_id(read_file(metrics_path)), artifacts, started);
  std::cout << "re-emitted " << artifacts.size() << " artifacts\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oracle to PostgreSQL migration toolkit"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--config", g.config_path, "JSON config file (flags override it)");
  auto* jobs_opt = app.add_option("--jobs", g.jobs, "worker threads");
  auto* seed_opt = app.add_option("--seed", g.seed, "deterministic split seed");

  // profile
  std::vector<std::string> p_paths, p_test_paths;
  std::string p_dialect = "oracle", p_taxonomy, p_out = "profile_out";
  auto* sc_profile = app.add_subcommand("profile", "feature-distribution profiling");
  sc_profile->add_option("paths", p_paths, "input files/directories")->required();
  auto* p_dialect_opt = sc_profile->add_option("--dialect", p_dialect);
  auto* p_tax_opt = sc_profile->add_option("--taxonomy", p_taxonomy);
  sc_profile->add_option("--test-paths", p_test_paths,
                         "files/directories forming the test split column");
  auto* p_out_opt = sc_profile->add_option("--out", p_out);

  // chunk
  std::vector<std::string> c_paths;
  std::string c_dialect = "oracle", c_taxonomy, c_out = "chunk_out";
  size_t c_max = 8192;
  bool c_per_statement = false;
  auto* sc_chunk = app.add_subcommand("chunk", "statement-aligned chunking");
  sc_chunk->add_option("paths", c_paths)->required();
  sc_chunk->add_option("--dialect", c_dialect);
  auto* c_max_opt = sc_chunk->add_option("--max-bytes", c_max);
  sc_chunk->add_flag("--per-statement", c_per_statement);
  sc_chunk->add_option("--taxonomy", c_taxonomy);
  sc_chunk->add_option("--out", c_out);

  // kb-build
  std::string kb_store, kb_entries, kb_pairs, kb_out = "kb", kb_embed_url, kb_taxonomy;
  std::vector<std::string> kb_scripts, kb_docs;
  size_t kb_dim = TrigramEmbedder::kDefaultDim;
  auto* sc_kb_build = app.add_subcommand("kb-build", "build a vector store");
  sc_kb_build->add_option("--store", kb_store)->required();
  sc_kb_build->add_option("--entries", kb_entries, "KbEntry JSONL");
  sc_kb_build->add_option("--pairs", kb_pairs, "oracle/postgres pair JSONL");
  sc_kb_build->add_option("--scripts", kb_scripts, "Oracle scripts to chunk+index");
  sc_kb_build->add_option("--docs", kb_docs, "prose files split by paragraph");
  sc_kb_build->add_option("--out", kb_out, "knowledge-base root directory");
  sc_kb_build->add_option("--dim", kb_dim);
  sc_kb_build->add_option("--embed-url", kb_embed_url, "external embedding endpoint");
  sc_kb_build->add_option("--taxonomy", kb_taxonomy);

  // kb-eval
  std::string ke_kb, ke_store = "pair_examples", ke_gold, ke_out = "kb_eval_out",
              ke_embed_url;
  size_t ke_k = 3, ke_dim = TrigramEmbedder::kDefaultDim;
  double ke_min_sim = 0.25;
  auto* sc_kb_eval = app.add_subcommand("kb-eval", "gold-dataset retrieval scorecard");
  sc_kb_eval->add_option("--kb", ke_kb)->required();
  sc_kb_eval->add_option("--store", ke_store);
  sc_kb_eval->add_option("--gold", ke_gold)->required();
  auto* ke_k_opt = sc_kb_eval->add_option("--k", ke_k);
  sc_kb_eval->add_option("--min-similarity", ke_min_sim);
  sc_kb_eval->add_option("--out", ke_out);
  sc_kb_eval->add_option("--embed-url", ke_embed_url);
  sc_kb_eval->add_option("--dim", ke_dim);

  // migrate
  std::vector<std::string> m_paths;
  std::string m_pipeline = "conversion", m_backend = "echo", m_kb, m_llm_url, m_model;
  std::string m_templates, m_taxonomy, m_input_root, m_out = "run_out", m_embed_url;
  size_t m_k = 3, m_max = 8192, m_history_budget = 16384,
         m_dim = TrigramEmbedder::kDefaultDim;
  bool m_per_statement = false;
  double m_min_sim_a = kDefaultMinSimilarityStrategyA;
  double m_min_sim_b = kDefaultMinSimilarityStrategyB;
  auto* sc_migrate = app.add_subcommand("migrate", "run a conversion pipeline");
  sc_migrate->add_option("paths", m_paths)->required();
  auto* m_pipe_opt = sc_migrate->add_option(
      "--pipeline", m_pipeline, "conversion|history|rag-a|rag-b");
  auto* m_backend_opt = sc_migrate->add_option("--backend", m_backend,
                                               "echo|rule|http");
  sc_migrate->add_option("--kb", m_kb, "knowledge-base root (rag pipelines)");
  auto* m_k_opt = sc_migrate->add_option("--k", m_k, "retrieved neighbours per store");
  auto* m_max_opt = sc_migrate->add_option("--max-bytes", m_max);
  sc_migrate->add_flag("--per-statement", m_per_statement);
  auto* m_hist_opt = sc_migrate->add_option("--history-budget", m_history_budget);
  sc_migrate->add_option("--min-similarity-a", m_min_sim_a);
  sc_migrate->add_option("--min-similarity-b", m_min_sim_b);
  sc_migrate->add_option("--llm-url", m_llm_url, "defaults to MIGRATE_LLM_URL");
  sc_migrate->add_option("--model", m_model);
  sc_migrate->add_option("--templates", m_templates, "prompt template directory");
  sc_migrate->add_option("--taxonomy", m_taxonomy);
  sc_migrate->add_option("--input-root", m_input_root);
  sc_migrate->add_option("--embed-url", m_embed_url);
  sc_migrate->add_option("--dim", m_dim);
  auto* m_out_opt = sc_migrate->add_option("--out", m_out);

  // evaluate
  std::string e_run, e_refs, e_validator = "builtin", e_out = "eval_out";
  auto* sc_eval = app.add_subcommand("evaluate", "score a migration run");
  sc_eval->add_option("--run", e_run)->required();
  sc_eval->add_option("--references", e_refs)->required();
  auto* e_val_opt = sc_eval->add_option("--validator", e_validator,
                                        "'builtin' or an external command");
  sc_eval->add_option("--out", e_out);

  // gap
  std::string g_counts, g_dataset, g_metrics, g_weights, g_taxonomy,
      g_out = "gap_out";
  bool g_full_precision = false;
  auto* sc_gap = app.add_subcommand("gap", "dataset gap estimation");
  sc_gap->add_option("--counts", g_counts, "JSON {feature: train_count}");
  sc_gap->add_option("--dataset", g_dataset, "dataset JSONL (train split profiled)");
  sc_gap->add_option("--metrics", g_metrics, "feature_quality.json")->required();
  sc_gap->add_option("--weights", g_weights, "GapWeights JSON");
  sc_gap->add_option("--taxonomy", g_taxonomy);
  sc_gap->add_flag("--full-precision", g_full_precision,
                   "skip the two-decimal gap_dict truncation");
  sc_gap->add_option("--out", g_out);

  // yield
  std::string y_inputs, y_out = "yield_out";
  auto* sc_yield = app.add_subcommand("yield", "migration yield projection");
  sc_yield->add_option("--inputs", y_inputs)->required();
  sc_yield->add_option("--out", y_out);

  // report
  std::string r_metrics, r_pipeline = "unknown", r_out = "report_out";
  auto* sc_report = app.add_subcommand("report", "re-emit artifacts from metrics.json");
  sc_report->add_option("--metrics", r_metrics)->required();
  sc_report->add_option("--pipeline", r_pipeline);
  sc_report->add_option("--out", r_out);

  // dataset build rides along gap tooling
  std::string d_manifest, d_root = ".", d_out = "dataset_out", d_taxonomy;
  double d_train_fraction = kDefaultTrainFraction;
  auto* sc_dataset = app.add_subcommand("dataset", "build datasets 1 and 2");
  sc_dataset->add_option("--manifest", d_manifest)->required();
  sc_dataset->add_option("--root", d_root, "corpus root the manifest paths resolve in");
  auto* d_frac_opt = sc_dataset->add_option("--train-fraction", d_train_fraction);
  sc_dataset->add_option("--taxonomy", d_taxonomy);
  sc_dataset->add_option("--out", d_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    g.config.load(g.config_path);
    g.config.apply(jobs_opt, "jobs", g.jobs);
    g.config.apply(seed_opt, "seed", g.seed);

    if (*sc_profile) {
      g.config.apply(p_dialect_opt, "dialect", p_dialect);
      g.config.apply(p_tax_opt, "taxonomy", p_taxonomy);
      g.config.apply(p_out_opt, "out", p_out);
      return cmd_profile(p_paths, p_dialect, p_taxonomy, p_test_paths, p_out);
    }
    if (*sc_chunk) {
      g.config.apply(c_max_opt, "max_chunk_bytes", c_max);
      return cmd_chunk(c_paths, c_dialect, c_max, c_per_statement, c_taxonomy, c_out);
    }
    if (*sc_kb_build)
      return cmd_kb_build(kb_store, kb_scripts, kb_docs, kb_entries, kb_pairs, kb_out,
                          kb_dim, kb_embed_url, kb_taxonomy);
    if (*sc_kb_eval) {
      g.config.apply(ke_k_opt, "k", ke_k);
      return cmd_kb_eval(ke_kb, ke_store, ke_gold, ke_k, ke_min_sim, ke_out,
                         ke_embed_url, ke_dim);
    }
    if (*sc_migrate) {
      g.config.apply(m_pipe_opt, "pipeline", m_pipeline);
      g.config.apply(m_backend_opt, "backend", m_backend);
      g.config.apply(m_k_opt, "k", m_k);
      g.config.apply(m_max_opt, "max_chunk_bytes", m_max);
      g.config.apply(m_hist_opt, "history_budget_bytes", m_history_budget);
      g.config.apply(m_out_opt, "out", m_out);
      return cmd_migrate(m_paths, m_pipeline, m_backend, m_kb, m_k, m_max,
                         m_per_statement, m_history_budget, m_min_sim_a, m_min_sim_b,
                         m_llm_url, m_model, m_templates, m_taxonomy, m_input_root,
                         m_out, g.jobs, m_embed_url, m_dim);
    }
    if (*sc_eval) {
      g.config.apply(e_val_opt, "validator", e_validator);
      return cmd_evaluate(e_run, e_refs, e_validator, e_out);
    }
    if (*sc_gap)
      return cmd_gap(g_counts, g_dataset, g_metrics, g_weights, g_taxonomy,
                     g_full_precision, g_out);
    if (*sc_yield) return cmd_yield(y_inputs, y_out);
    if (*sc_report) return cmd_report(r_metrics, r_pipeline, r_out);
    if (*sc_dataset) {
      g.config.apply(d_frac_opt, "train_fraction", d_train_fraction);
      auto started = detail::iso_now();
      FeatureTaxonomy ora = taxonomy_for(d_taxonomy, Dialect::Oracle);
      const FeatureTaxonomy& pg = default_taxonomy(Dialect::PostgreSQL);
      auto result = build_datasets_from_manifest(d_manifest, d_root, ora, pg,
                                                 d_train_fraction, g.seed);
      fs::path out_dir(d_out);
      fs::create_directories(out_dir);
      write_dataset_jsonl(out_dir / "dataset1.jsonl", result.dataset1);
      write_dataset_jsonl(out_dir / "dataset2.jsonl", result.dataset2);
      write_file(out_dir / "oracle_distribution.csv",
                 distribution_csv(result.oracle_train, result.oracle_test));
      write_file(out_dir / "postgres_distribution.csv",
                 distribution_csv(result.pg_train, result.pg_test));
      json missing = json::array();
      for (const auto& m : result.missing) missing.push_back(m);
      write_file(out_dir / "missing.json", missing.dump(2) + "\n");
      write_cli_manifest(out_dir, "dataset",
                         json{{"manifest", d_manifest},
                              {"train_fraction", d_train_fraction},
                              {"seed", g.seed}},
                         content_id(read_file(d_manifest)),
                         {"dataset1.jsonl", "dataset2.jsonl", "oracle_distribution.csv",
                          "postgres_distribution.csv", "missing.json"},
                         started);
      std::cout << "dataset1=" << result.dataset1.size()
                << " dataset2=" << result.dataset2.size()
                << " missing=" << result.missing.size() << "\n";
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const StoreMissing& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
