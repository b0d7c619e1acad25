#include <gtest/gtest.h>

#include <filesystem>

#include "migkit/backend.hpp"
#include "migkit/pipeline.hpp"
#include "migkit/prompt.hpp"

using namespace migkit;

namespace {

fs::path temp_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("migkit_engine_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SourceScript oracle_script(std::string path, std::string text) {
  return make_script(std::move(path), Dialect::Oracle, std::move(text));
}

// Fails any chunk containing the marker; counts every call.
class FlakyBackend : public TranslatorBackend {
public:
  explicit FlakyBackend(std::string marker) : marker_(std::move(marker)) {}
  TranslateResult translate(const TranslateRequest& req) override {
    ++calls;
    if (req.chunk_text.find(marker_) != std::string::npos)
      return {false, "", "injected failure", 3, 0.0};
    return {true, req.chunk_text, "", 1, 0.0};
  }
  std::string name() const override { return "flaky"; }
  int calls = 0;

private:
  std::string marker_;
};

KnowledgeBase pair_kb(const std::vector<std::pair<std::string, std::string>>& pairs) {
  KnowledgeBase kb;
  std::vector<KbEntry> entries;
  for (const auto& [ora, pg] : pairs) {
    KbEntry e;
    e.store = StoreKind::PairExamples;
    e.text = ora;
    e.pair_target = pg;
    entries.push_back(e);
  }
  kb.put(build_index(entries, std::make_shared<TrigramEmbedder>()));
  return kb;
}

KnowledgeBase triple_kb() {
  KnowledgeBase kb;
  auto e = std::make_shared<TrigramEmbedder>();
  auto mk = [&](StoreKind kind, std::vector<std::string> texts) {
    std::vector<KbEntry> entries;
    for (auto& t : texts) {
      KbEntry ke;
      ke.store = kind;
      ke.text = std::move(t);
      entries.push_back(ke);
    }
    return build_index(entries, e);
  };
  kb.put(mk(StoreKind::OracleContext, {"SELECT a FROM emp;", "BEGIN NULL; END;"}));
  kb.put(mk(StoreKind::PgDocs, {"NUMERIC replaces NUMBER.", "Use COALESCE for NVL."}));
  kb.put(VectorIndex::empty(StoreKind::SmeRules, e));
  return kb;
}

}  // namespace

// ------------------------------------------------------------------ prompts

TEST(Prompt, StrategyTemplatesDeclareTheirPlaceholders) {
  TemplateSet set;
  EXPECT_EQ(placeholders_in(set.text(TemplateId::StrategyA)),
            (std::set<std::string>{"ORACLE_CONTEXT", "POSTGRES_DOCS",
                                   "CONVERTING_RULES", "CURRENT_CHUNK"}));
  EXPECT_EQ(placeholders_in(set.text(TemplateId::StrategyB)),
            (std::set<std::string>{"RETRIEVED_EXAMPLES", "CURRENT_CHUNK"}));
  EXPECT_EQ(placeholders_in(set.text(TemplateId::Direct)),
            (std::set<std::string>{"CURRENT_CHUNK"}));
  EXPECT_EQ(placeholders_in(set.text(TemplateId::History)),
            (std::set<std::string>{"HISTORY", "CURRENT_CHUNK"}));
}

TEST(Prompt, StrategyBFillContainsChunkVerbatim) {
  auto spec = build_prompt(TemplateId::StrategyB,
                           {{"RETRIEVED_EXAMPLES", "Oracle:\nA\nPostgreSQL:\nB"},
                            {"CURRENT_CHUNK", "SELECT SYSDATE FROM dual;"}});
  EXPECT_NE(spec.filled_text.find("SELECT SYSDATE FROM dual;"), std::string::npos);
  EXPECT_EQ(spec.placeholders_bound.size(), 2u);
}

TEST(Prompt, MissingBindingNamesThePlaceholder) {
  try {
    build_prompt(TemplateId::StrategyB, {{"RETRIEVED_EXAMPLES", "x"}});
    FAIL() << "expected UnboundPlaceholder";
  } catch (const UnboundPlaceholder& e) {
    EXPECT_EQ(e.placeholder, "CURRENT_CHUNK");
  }
}

TEST(Prompt, NoRecursiveExpansion) {
  auto spec = build_prompt(TemplateId::Direct,
                           {{"CURRENT_CHUNK", "a {CURRENT_CHUNK} b"}});
  size_t count = 0, pos = 0;
  while ((pos = spec.filled_text.find("{CURRENT_CHUNK}", pos)) != std::string::npos) {
    ++count;
    pos += 1;
  }
  EXPECT_EQ(count, 1u);  // the literal from the binding, substituted once
}

TEST(Prompt, ShippedTemplateFilesMatchBuiltins) {
  fs::path dir = fs::path(MIGKIT_SOURCE_DIR) / "templates";
  TemplateSet builtin;
  for (TemplateId id : {TemplateId::Direct, TemplateId::History, TemplateId::StrategyA,
                        TemplateId::StrategyB}) {
    fs::path p = dir / (std::string(template_name(id)) + ".txt");
    ASSERT_TRUE(fs::exists(p)) << p;
    EXPECT_EQ(read_file(p), builtin.text(id)) << p << " drifted from built-in";
  }
}

TEST(Prompt, TemplateSetLoadOverrides) {
  auto dir = temp_dir("tpl");
  write_file(dir / "direct.txt", "custom {CURRENT_CHUNK}\n");
  auto set = TemplateSet::load(dir);
  EXPECT_EQ(set.text(TemplateId::Direct), "custom {CURRENT_CHUNK}\n");
  EXPECT_EQ(set.text(TemplateId::History), TemplateSet().text(TemplateId::History));
  fs::remove_all(dir);
}

// ----------------------------------------------------------------- backends

TEST(Backend, EchoReturnsChunkUnchanged) {
  EchoBackend echo;
  auto res = echo.translate({"prompt text", "SELECT 1;\n"});
  EXPECT_TRUE(res.ok);
  EXPECT_EQ(res.text, "SELECT 1;\n");
}

TEST(Backend, RuleBaselineRewritesExactlyMappedTokens) {
  RuleBaselineBackend rules;
  std::string src =
      "CREATE TABLE t (a NUMBER, b VARCHAR2(10));\n"
      "SELECT NVL(x, SYSDATE), 'NUMBER' FROM t; -- NUMBER stays in comment\n";
  std::string expected =
      "CREATE TABLE t (a NUMERIC, b VARCHAR(10));\n"
      "SELECT COALESCE(x, CURRENT_TIMESTAMP), 'NUMBER' FROM t; -- NUMBER stays in comment\n";
  auto res = rules.translate({"", src});
  EXPECT_EQ(res.text, expected);
}

TEST(Backend, StripCodeFences) {
  EXPECT_EQ(strip_code_fences("```sql\nSELECT 1;\n```"), "SELECT 1;");
  EXPECT_EQ(strip_code_fences("```\nX\n```"), "X");
  EXPECT_EQ(strip_code_fences("  ```sql\nSELECT 1;\n```  \n"), "SELECT 1;");
  EXPECT_EQ(strip_code_fences("SELECT 1;"), "SELECT 1;");
  EXPECT_EQ(strip_code_fences("`` not a fence ``"), "`` not a fence ``");
  // inner fences are left alone once the outer pair is removed
  EXPECT_EQ(strip_code_fences("```\nkeep ``` this\n```"), "keep ``` this");
}

// ---------------------------------------------------------------- pipelines

TEST(Pipeline, EchoIdempotentAcrossAllFour) {
  std::vector<SourceScript> corpus = {
      oracle_script("a.sql", "SELECT a FROM t;\nSELECT b FROM t;\n"),
      oracle_script("b.sql", "BEGIN\n  UPDATE t SET a = 1;\nEND;\n/\n"),
      oracle_script("c.sql", "INSERT INTO t VALUES (1);\n")};
  auto kbp = pair_kb({{"SELECT a FROM t;", "SELECT a FROM t;"}});
  auto kbt = triple_kb();
  EchoBackend echo;
  for (PipelineKind p : {PipelineKind::Conversion, PipelineKind::History,
                         PipelineKind::RagA, PipelineKind::RagB}) {
    RunConfig cfg;
    cfg.pipeline = p;
    const KnowledgeBase* kb = nullptr;
    if (p == PipelineKind::RagA) kb = &kbt;
    if (p == PipelineKind::RagB) kb = &kbp;
    auto run = run_pipeline(corpus, echo, cfg, kb);
    ASSERT_EQ(run.files.size(), corpus.size());
    for (const auto& f : run.files) {
      ASSERT_TRUE(f.converted) << f.rel_path << " via " << pipeline_name(p);
      const SourceScript* src = nullptr;
      for (const auto& s : corpus)
        if (fs::path(s.path).filename() == f.rel_path) src = &s;
      ASSERT_NE(src, nullptr);
      EXPECT_EQ(f.output_text, src->text) << pipeline_name(p);
    }
    EXPECT_TRUE(run.not_converted.empty());
  }
}

TEST(Pipeline, RuleBaselineDiffersExactlyAtMappedTokens) {
  std::string src = "SELECT NVL(a, SYSDATE) FROM t;\nCREATE TABLE u (n NUMBER);\n";
  std::string expected =
      "SELECT COALESCE(a, CURRENT_TIMESTAMP) FROM t;\nCREATE TABLE u (n NUMERIC);\n";
  std::vector<SourceScript> corpus = {oracle_script("r.sql", src)};
  RuleBaselineBackend rules;
  RunConfig cfg;
  auto run = run_pipeline(corpus, rules, cfg);
  ASSERT_TRUE(run.files[0].converted);
  EXPECT_EQ(run.files[0].output_text, expected);
}

TEST(Pipeline, HistoryBindingsAccumulate) {
  std::string text = "SELECT 1 FROM a;\nSELECT 2 FROM b;\nSELECT 3 FROM c;\n";
  std::vector<SourceScript> corpus = {oracle_script("h.sql", text)};
  EchoBackend echo;
  RunConfig cfg;
  cfg.pipeline = PipelineKind::History;
  cfg.statement_per_chunk = true;
  auto run = run_pipeline(corpus, echo, cfg);
  ASSERT_TRUE(run.files[0].converted);
  const auto& chunks = run.files[0].chunks;
  ASSERT_EQ(chunks.size(), 3u);
  // first chunk has no history: direct template
  EXPECT_EQ(chunks[0].template_id, TemplateId::Direct);
  EXPECT_EQ(chunks[0].bindings.count("HISTORY"), 0u);
  // second chunk sees first output
  ASSERT_EQ(chunks[1].template_id, TemplateId::History);
  EXPECT_NE(chunks[1].bindings.at("HISTORY").find("SELECT 1 FROM a;"),
            std::string::npos);
  // third sees both, most recent first
  const std::string& h2 = chunks[2].bindings.at("HISTORY");
  auto pos2 = h2.find("SELECT 2 FROM b;");
  auto pos1 = h2.find("SELECT 1 FROM a;");
  ASSERT_NE(pos2, std::string::npos);
  ASSERT_NE(pos1, std::string::npos);
  EXPECT_LT(pos2, pos1);
  // completion order strictly increasing by index
  for (size_t i = 0; i < chunks.size(); ++i) EXPECT_EQ(chunks[i].index, i);
}

TEST(Pipeline, HistoryTruncatedFromOldestEnd) {
  std::string stmt0 = "SELECT '" + std::string(80, 'x') + "' FROM a;\n";  // 92 bytes
  std::string stmt1 = "SELECT 2 FROM b;\n";
  std::vector<SourceScript> corpus = {oracle_script("t.sql", stmt0 + stmt1)};
  EchoBackend echo;
  RunConfig cfg;
  cfg.pipeline = PipelineKind::History;
  cfg.statement_per_chunk = true;
  cfg.history_budget_bytes = 40;
  auto run = run_pipeline(corpus, echo, cfg);
  const auto& chunks = run.files[0].chunks;
  ASSERT_EQ(chunks.size(), 2u);
  std::string expected_window =
      "-- [chunk 0]\n" + stmt0.substr(stmt0.size() - 40) + "\n";
  EXPECT_EQ(chunks[1].bindings.at("HISTORY"), expected_window);
}

TEST(Pipeline, InjectedFailureIsolatesFiles) {
  std::vector<SourceScript> corpus = {
      oracle_script("a.sql", "SELECT a FROM t;\n"),
      oracle_script("b.sql", "SELECT 1;\nSELECT FAIL_ME FROM t;\nSELECT 3;\n"),
      oracle_script("c.sql", "INSERT INTO t VALUES (2);\n")};
  FlakyBackend flaky("FAIL_ME");
  RunConfig cfg;
  cfg.statement_per_chunk = true;
  auto run = run_pipeline(corpus, flaky, cfg);

  EchoBackend echo;
  auto clean = run_pipeline(corpus, echo, cfg);

  ASSERT_EQ(run.files.size(), 3u);
  EXPECT_EQ(run.not_converted, std::vector<std::string>{"b.sql"});
  for (size_t i = 0; i < run.files.size(); ++i) {
    if (run.files[i].rel_path == "b.sql") {
      EXPECT_FALSE(run.files[i].converted);
      EXPECT_NE(run.files[i].cause.find("chunk 1"), std::string::npos);
    } else {
      EXPECT_TRUE(run.files[i].converted);
      EXPECT_EQ(run.files[i].output_text, clean.files[i].output_text);
    }
  }
}

TEST(Pipeline, EveryInputAppearsExactlyOnce) {
  std::vector<SourceScript> corpus = {oracle_script("x.sql", "SELECT 1;\n"),
                                      oracle_script("y.sql", "SELECT FAIL_ME;\n")};
  FlakyBackend flaky("FAIL_ME");
  RunConfig cfg;
  auto run = run_pipeline(corpus, flaky, cfg);
  ASSERT_EQ(run.files.size(), 2u);
  std::set<std::string> seen;
  for (auto& f : run.files) seen.insert(f.rel_path);
  EXPECT_EQ(seen.size(), 2u);
  EXPECT_EQ(run.not_converted.size(), 1u);
}

TEST(Pipeline, ReproducibleModuloTimestamps) {
  std::vector<SourceScript> corpus = {
      oracle_script("a.sql", "SELECT a FROM t;\nBEGIN NULL; END;\n/\n"),
      oracle_script("b.sql", "INSERT INTO t VALUES (1);\n")};
  EchoBackend echo;
  RunConfig cfg;
  cfg.jobs = 4;
  auto r1 = run_pipeline(corpus, echo, cfg);
  auto r2 = run_pipeline(corpus, echo, cfg);
  EXPECT_EQ(r1.run_id, r2.run_id);

  auto d1 = temp_dir("repro1");
  auto d2 = temp_dir("repro2");
  write_migration_run(r1, d1);
  write_migration_run(r2, d2);
  auto m1 = json::parse(read_file(d1 / "manifest.json"));
  auto m2 = json::parse(read_file(d2 / "manifest.json"));
  m1.erase("started_at");
  m1.erase("finished_at");
  m2.erase("started_at");
  m2.erase("finished_at");
  EXPECT_EQ(m1, m2);
  EXPECT_EQ(read_file(d1 / "provenance.jsonl"), read_file(d2 / "provenance.jsonl"));
  EXPECT_EQ(read_file(d1 / "outputs/a.sql"), read_file(d2 / "outputs/a.sql"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Pipeline, RagBPromptCarriesTopPairs) {
  auto kb = pair_kb({{"SELECT a FROM emp;", "SELECT a FROM emp;"},
                     {"SELECT SYSDATE FROM dual;", "SELECT CURRENT_TIMESTAMP;"},
                     {"DELETE FROM logs;", "DELETE FROM logs;"},
                     {"UPDATE t SET x = 1;", "UPDATE t SET x = 1;"},
                     {"BEGIN NULL; END;", "DO $$ BEGIN END $$;"}});
  std::vector<SourceScript> corpus = {
      oracle_script("q.sql", "SELECT SYSDATE FROM dual;\n")};
  EchoBackend echo;
  RunConfig cfg;
  cfg.pipeline = PipelineKind::RagB;
  cfg.retrieval_k = 2;
  auto run = run_pipeline(corpus, echo, cfg, &kb);
  const auto& rec = run.files[0].chunks[0];
  const std::string& bound = rec.bindings.at("RETRIEVED_EXAMPLES");
  // rank 1 is the exact match; its PostgreSQL side must be present
  EXPECT_NE(bound.find("SELECT SYSDATE FROM dual;"), std::string::npos);
  EXPECT_NE(bound.find("SELECT CURRENT_TIMESTAMP;"), std::string::npos);
  ASSERT_TRUE(rec.retrieval.contains("pair_examples"));
  EXPECT_EQ(rec.retrieval["pair_examples"].size(), 2u);
  EXPECT_NEAR(rec.retrieval["pair_examples"][0]["similarity"].get<double>(), 1.0,
              1e-9);
}

TEST(Pipeline, RagAEmptyRulesBindNoContentMarker) {
  auto kb = triple_kb();  // SmeRules store is empty
  std::vector<SourceScript> corpus = {oracle_script("q.sql", "SELECT a FROM emp;\n")};
  EchoBackend echo;
  RunConfig cfg;
  cfg.pipeline = PipelineKind::RagA;
  cfg.retrieval_k = 1;
  auto run = run_pipeline(corpus, echo, cfg, &kb);
  const auto& rec = run.files[0].chunks[0];
  EXPECT_EQ(rec.bindings.at("CONVERTING_RULES"), kNoContentMarker);
  EXPECT_NE(rec.bindings.at("ORACLE_CONTEXT"), kNoContentMarker);
  EXPECT_TRUE(run.files[0].converted);
}

TEST(Pipeline, RagBAbstentionBindsMarkerAndProceeds) {
  auto kb = pair_kb({{"SELECT a FROM emp;", "SELECT a FROM emp;"}});
  // chunk shares no trigrams with the stored pair; threshold forces abstention
  std::vector<SourceScript> corpus = {oracle_script("q.sql", "zzz qqq;\n")};
  EchoBackend echo;
  RunConfig cfg;
  cfg.pipeline = PipelineKind::RagB;
  cfg.min_similarity_b = 0.99;
  auto run = run_pipeline(corpus, echo, cfg, &kb);
  ASSERT_TRUE(run.files[0].converted);
  const auto& rec = run.files[0].chunks[0];
  EXPECT_EQ(rec.bindings.at("RETRIEVED_EXAMPLES"), kNoContentMarker);
  EXPECT_EQ(rec.retrieval["pair_examples"].size(), 0u);
  EXPECT_EQ(run.files[0].output_text, "zzz qqq;\n");
}

TEST(Pipeline, RagWithoutStoresAbortsBeforeTranslation) {
  std::vector<SourceScript> corpus = {oracle_script("q.sql", "SELECT 1;\n")};
  FlakyBackend counting("never");
  RunConfig cfg;
  cfg.pipeline = PipelineKind::RagB;
  EXPECT_THROW(run_pipeline(corpus, counting, cfg, nullptr), StoreMissing);
  KnowledgeBase kb_without_pairs;
  EXPECT_THROW(run_pipeline(corpus, counting, cfg, &kb_without_pairs), StoreMissing);
  EXPECT_EQ(counting.calls, 0);
}

TEST(Pipeline, NamedEntryPoints) {
  std::vector<SourceScript> corpus = {oracle_script("n.sql", "SELECT 1;\n")};
  EchoBackend echo;
  EXPECT_EQ(run_conversion(corpus, echo).pipeline, PipelineKind::Conversion);
  EXPECT_EQ(run_history(corpus, echo).pipeline, PipelineKind::History);
  auto kb = pair_kb({{"SELECT 1;", "SELECT 1;"}});
  auto rag = run_rag(corpus, echo, kb, RagStrategy::B, 1);
  EXPECT_EQ(rag.pipeline, PipelineKind::RagB);
  EXPECT_TRUE(rag.files[0].converted);
}

TEST(Pipeline, RunDirectoryLayout) {
  std::vector<SourceScript> corpus = {oracle_script("a.sql", "SELECT 1;\n")};
  EchoBackend echo;
  RunConfig cfg;
  auto run = run_pipeline(corpus, echo, cfg);
  auto dir = temp_dir("layout");
  write_migration_run(run, dir);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "provenance.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "outputs/a.sql"));
  auto manifest = json::parse(read_file(dir / "manifest.json"));
  EXPECT_EQ(manifest["files"][0]["status"], "converted");
  fs::remove_all(dir);
}
