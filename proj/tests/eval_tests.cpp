#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "migkit/evaluate.hpp"
#include "migkit/metrics.hpp"
#include "migkit/validator.hpp"

using namespace migkit;

namespace {

fs::path temp_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("migkit_eval_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Brute-force chrF oracle: naive substring maps, F-beta per order, averaged.
double brute_chrf(std::string cand, std::string ref) {
  auto collapse = [](std::string s) {
    std::string out;
    bool ws = false;
    for (char c : s) {
      if (c == '\t' || c == '\n' || c == '\r') c = ' ';
      if (c == ' ' && ws) continue;
      ws = (c == ' ');
      out += c;
    }
    while (!out.empty() && out.front() == ' ') out.erase(out.begin());
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
  };
  cand = collapse(cand);
  ref = collapse(ref);
  double f_sum = 0;
  int orders = 0;
  for (size_t n = 1; n <= 6; ++n) {
    std::map<std::string, int> cg, rg;
    for (size_t i = 0; i + n <= cand.size(); ++i) ++cg[cand.substr(i, n)];
    for (size_t i = 0; i + n <= ref.size(); ++i) ++rg[ref.substr(i, n)];
    size_t ct = cand.size() >= n ? cand.size() - n + 1 : 0;
    size_t rt = ref.size() >= n ? ref.size() - n + 1 : 0;
    if (ct == 0 && rt == 0) continue;
    ++orders;
    int match = 0;
    for (auto& [g, c] : cg)
      if (rg.count(g)) match += std::min(c, rg[g]);
    double p = ct ? double(match) / ct : 0.0;
    double r = rt ? double(match) / rt : 0.0;
    if (p + r > 0) f_sum += 5.0 * p * r / (4.0 * p + r);
  }
  return orders ? f_sum / orders : 1.0;
}

}  // namespace

// ------------------------------------------------------------------- recall

TEST(Recall, IdenticalTextsScoreOne) {
  EXPECT_DOUBLE_EQ(token_recall("SELECT a FROM t;", "SELECT a FROM t;"), 1.0);
}

TEST(Recall, DisjointTokensScoreZero) {
  EXPECT_DOUBLE_EQ(token_recall("DELETE x", "SELECT y"), 0.0);
}

TEST(Recall, HalfOverlapHandCounted) {
  // ref tokens: SELECT a FROM t (4); cand: SELECT a (2) -> 2/4
  EXPECT_DOUBLE_EQ(token_recall("SELECT a", "SELECT a FROM t"), 0.5);
}

TEST(Recall, KeywordCaseFolded) {
  EXPECT_DOUBLE_EQ(token_recall("select a from t", "SELECT a FROM t"), 1.0);
  // identifiers are not folded
  EXPECT_LT(token_recall("SELECT A FROM T", "SELECT a FROM t"), 1.0);
}

TEST(Recall, EmptyReferenceDegenerateRule) {
  EXPECT_DOUBLE_EQ(token_recall("", ""), 1.0);
  EXPECT_DOUBLE_EQ(token_recall("SELECT 1;", ""), 0.0);
}

TEST(Recall, MultisetSemantics) {
  // ref has two 'a' identifiers; candidate only one -> 3 of 4
  EXPECT_DOUBLE_EQ(token_recall("a , b", "a , a b"), 0.75);
}

TEST(Recall, InvariantUnderDuplicationOfBothSides) {
  std::string cand = "SELECT a FROM t;";
  std::string ref = "SELECT a FROM u WHERE b;";
  double base = token_recall(cand, ref);
  double doubled = token_recall(cand + "\n" + cand, ref + "\n" + ref);
  EXPECT_DOUBLE_EQ(base, doubled);
}

// --------------------------------------------------------------------- bleu

TEST(Bleu, IdentityScoresExactlyOne) {
  EXPECT_DOUBLE_EQ(bleu("SELECT a FROM t;", "SELECT a FROM t;"), 1.0);
  EXPECT_DOUBLE_EQ(bleu("x", "x"), 1.0);  // shorter than n=4 still exact
}

TEST(Bleu, EmptyCandidateScoresZero) {
  EXPECT_DOUBLE_EQ(bleu("", "SELECT 1;"), 0.0);
}

TEST(Bleu, DisjointScoresZero) {
  EXPECT_DOUBLE_EQ(bleu("DELETE x", "SELECT y"), 0.0);
}

TEST(Bleu, FiveTokenSubstitutionMatchesHandComputation) {
  // cand: SELECT a FROM u ;   ref: SELECT a FROM t ;
  // p1 = 4/5
  // p2 = (2+1)/(4+1)  bigram hits: [SELECT a] [a FROM]
  // p3 = (1+1)/(3+1)  trigram hits: [SELECT a FROM]
  // p4 = (0+1)/(2+1)
  // BP = 1 (equal length)
  double expected = std::pow((4.0 / 5.0) * (3.0 / 5.0) * (2.0 / 4.0) * (1.0 / 3.0), 0.25);
  EXPECT_NEAR(bleu("SELECT a FROM u;", "SELECT a FROM t;"), expected, 1e-12);
}

TEST(Bleu, BrevityPenaltyApplies) {
  // cand (3 tokens) strictly shorter than ref (5): BP = exp(1 - 5/3)
  double no_bp =
      std::pow((3.0 / 3.0) * (3.0 / 3.0) * (2.0 / 2.0) * (1.0 / 1.0), 0.25);
  double expected = std::exp(1.0 - 5.0 / 3.0) * no_bp;
  EXPECT_NEAR(bleu("SELECT a FROM", "SELECT a FROM t;"), expected, 1e-12);
}

TEST(Bleu, BoundedInUnitInterval) {
  std::mt19937 rng(3);
  const char* words[] = {"SELECT", "a", "FROM", "t", ";", "WHERE", "b", "=", "1"};
  for (int i = 0; i < 100; ++i) {
    std::string c, r;
    for (unsigned j = 0; j < 1 + rng() % 8; ++j)
      c += std::string(words[rng() % 9]) + " ";
    for (unsigned j = 0; j < 1 + rng() % 8; ++j)
      r += std::string(words[rng() % 9]) + " ";
    double v = bleu(c, r);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

// --------------------------------------------------------------------- chrf

TEST(Chrf, IdentityScoresOne) {
  EXPECT_DOUBLE_EQ(chrf("SELECT a FROM t;", "SELECT a FROM t;"), 1.0);
  EXPECT_DOUBLE_EQ(chrf("ab", "ab"), 1.0);
}

TEST(Chrf, NoSharedNgramsScoresZero) {
  EXPECT_DOUBLE_EQ(chrf("aaaa", "zzzz"), 0.0);
}

TEST(Chrf, MatchesBruteForceOracle) {
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"SELECT a", "SELECT b"},
      {"SELECT a FROM t;", "SELECT a FROM u;"},
      {"BEGIN END", "BEGIN  END"},  // whitespace collapse
      {"xy", "xyz"},
      {"INSERT INTO t VALUES (1);", "INSERT INTO t VALUES (2);"}};
  for (auto& [c, r] : pairs)
    EXPECT_NEAR(chrf(c, r), brute_chrf(c, r), 1e-12) << c << " vs " << r;
}

TEST(Chrf, RecallWeightedSubsetScoresBelowOne) {
  EXPECT_LT(chrf("SELECT a", "SELECT a FROM t"), 1.0);
  // beta=2 weights recall: dropping reference content hurts more than adding
  double drop = chrf("SELECT a", "SELECT a FROM t");
  double add = chrf("SELECT a FROM t", "SELECT a");
  EXPECT_LT(drop, add);
}

TEST(Chrf, WhitespaceCollapsed) {
  EXPECT_DOUBLE_EQ(chrf("SELECT  a\n FROM\tt;", "SELECT a FROM t;"), 1.0);
}

// ---------------------------------------------------------------- validator

TEST(Validator, CleanStatementNoFindings) {
  BuiltinValidator v;
  EXPECT_TRUE(v.validate("", "SELECT 1;").empty());
}

TEST(Validator, MalformedKeywordOneErrorLineOne) {
  BuiltinValidator v;
  auto f = v.validate("", "SELEC 1;");
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].severity, Severity::Error);
  EXPECT_EQ(f[0].line, 1u);
}

TEST(Validator, MiddleStatementFlaggedByIndex) {
  BuiltinValidator v;
  auto f = v.validate("", "SELECT 1;\nSELEC 2;\nSELECT 3;\n");
  size_t errors = 0;
  for (auto& x : f)
    if (x.severity == Severity::Error) {
      ++errors;
      EXPECT_EQ(x.statement_index, 1u);
      EXPECT_EQ(x.line, 2u);
    }
  EXPECT_EQ(errors, 1u);
}

TEST(Validator, OneErrorPerFailedStatement) {
  BuiltinValidator v;
  // malformed start AND unbalanced paren: still one error
  auto f = v.validate("", "SELEC (1;\n");
  size_t errors = 0;
  for (auto& x : f)
    if (x.severity == Severity::Error) ++errors;
  EXPECT_EQ(errors, 1u);
}

TEST(Validator, ParenBalanceChecked) {
  BuiltinValidator v;
  auto f = v.validate("", "SELECT (1;\n");
  ASSERT_FALSE(f.empty());
  EXPECT_EQ(f[0].severity, Severity::Error);
}

TEST(Validator, UnterminatedLiteralIsError) {
  BuiltinValidator v;
  auto f = v.validate("", "SELECT 'abc;\n");
  bool found = false;
  for (auto& x : f)
    if (x.severity == Severity::Error && x.message.find("unterminated") != std::string::npos)
      found = true;
  EXPECT_TRUE(found);
}

TEST(Validator, DoBlockBalancedPasses) {
  BuiltinValidator v;
  EXPECT_TRUE(v.validate("", "DO $$ BEGIN PERFORM 1; END $$;").empty());
}

TEST(Validator, DoBlockUnbalancedFails) {
  BuiltinValidator v;
  auto f = v.validate("", "DO $$ BEGIN IF x THEN PERFORM 1; END $$;");
  ASSERT_EQ(f.size(), 1u);
  EXPECT_NE(f[0].message.find("unbalanced"), std::string::npos);
}

TEST(Validator, PlpgsqlFunctionBodyChecked) {
  BuiltinValidator v;
  std::string good =
      "CREATE FUNCTION f() RETURNS integer AS $fn$ DECLARE x integer; "
      "BEGIN RETURN 1; END; $fn$ LANGUAGE plpgsql;";
  EXPECT_TRUE(v.validate("", good).empty());
  std::string bad =
      "CREATE FUNCTION f() RETURNS integer AS $fn$ RETURN 1; $fn$ LANGUAGE plpgsql;";
  auto f = v.validate("", bad);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_NE(f[0].message.find("no BEGIN"), std::string::npos);
}

TEST(Validator, OracleLeftoversWarn) {
  BuiltinValidator v;
  auto f = v.validate("", "SELECT NVL(a, b) FROM dual;\n");
  size_t warnings = 0;
  for (auto& x : f)
    if (x.severity == Severity::Warning) ++warnings;
  EXPECT_EQ(warnings, 2u);  // NVL and DUAL
  for (auto& x : f) EXPECT_EQ(x.severity, Severity::Warning);
}

TEST(Validator, MissingFinalTerminatorWarns) {
  BuiltinValidator v;
  auto f = v.validate("", "SELECT 1");
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].severity, Severity::Warning);
}

TEST(Validator, MetaCommandsAccepted) {
  BuiltinValidator v;
  EXPECT_TRUE(v.validate("", "\\timing\nSELECT 1;\n\\q\n").empty());
}

TEST(Validator, ExternalContractParsed) {
  auto dir = temp_dir("extval");
  fs::path script = dir / "checker.sh";
  write_file(script, "#!/bin/sh\nprintf 'error\\t3\\tbad thing\\n'\n"
                     "printf 'warning\\t1\\tcheck this\\n'\nexit 7\n");
  fs::permissions(script, fs::perms::owner_all);
  fs::path sql = dir / "x.sql";
  write_file(sql, "SELECT 1;\nSELECT 2;\nSELECT 3;\n");

  ExternalValidator v(script.string());
  auto f = v.validate(sql.string(), read_file(sql));  // exit 7 ignored
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].severity, Severity::Error);
  EXPECT_EQ(f[0].line, 3u);
  EXPECT_EQ(f[0].message, "bad thing");
  EXPECT_EQ(f[1].severity, Severity::Warning);
  fs::remove_all(dir);
}

TEST(Validator, MissingExternalToolFailsLoudly) {
  ExternalValidator v("/nonexistent/validator-xyz");
  EXPECT_THROW(v.validate("", "SELECT 1;"), ValidatorUnavailable);
}

// -------------------------------------------------------------- ser metrics

TEST(SerMetrics, CleanFile) {
  BuiltinValidator v;
  std::string text = "SELECT 1;\nSELECT 2;\n";
  auto m = ser_metrics(v.validate("", text), text);
  EXPECT_DOUBLE_EQ(m.ser, 0.0);
  EXPECT_TRUE(m.valid);
  EXPECT_EQ(m.statements, 2u);
}

TEST(SerMetrics, AllStatementsMalformed) {
  BuiltinValidator v;
  std::string text = "SELEC 1;\nSELEC 2;\n";
  auto m = ser_metrics(v.validate("", text), text);
  EXPECT_DOUBLE_EQ(m.ser, 1.0);
  EXPECT_FALSE(m.valid);
}

TEST(SerMetrics, OneBadOfFour) {
  BuiltinValidator v;
  std::string text = "SELEC 1;\nSELECT 2;\nSELECT 3;\nSELECT 4;\n";
  auto m = ser_metrics(v.validate("", text), text);
  EXPECT_DOUBLE_EQ(m.ser, 0.25);
  EXPECT_DOUBLE_EQ(m.sepl, 0.25);  // 1 error over 4 lines
  EXPECT_EQ(m.errors, 1u);
}

TEST(SerMetrics, WarningsNormalizedPerStatement) {
  BuiltinValidator v;
  std::string text = "SELECT NVL(a, b) FROM t;\nSELECT 1;\n";
  auto m = ser_metrics(v.validate("", text), text);
  EXPECT_DOUBLE_EQ(m.warnings_norm, 0.5);
  EXPECT_TRUE(m.valid);
}

TEST(SerMetrics, EmptyTextZeroStatements) {
  auto m = ser_metrics({}, "");
  EXPECT_DOUBLE_EQ(m.ser, 0.0);
  EXPECT_TRUE(m.valid);
  EXPECT_EQ(m.statements, 0u);
}

TEST(SerMetrics, LineOnlyFindingsMappedToStatements) {
  std::string text = "SELECT 1;\nSELECT 2;\nSELECT 3;\nSELECT 4;\n";
  std::vector<SyntaxFinding> external = {{"f", 2, Severity::Error, "boom", SIZE_MAX}};
  auto m = ser_metrics(external, text);
  EXPECT_DOUBLE_EQ(m.ser, 0.25);
}

// ----------------------------------------------------------------- coverage

TEST(Coverage, ExactReproductionIsFull) {
  FeatureProfile e, g;
  e.counts = {{"CORE_SQL", 10}, {"PL_PG_SQL", 4}};
  e.total_hits = 14;
  g = e;
  auto cov = feature_coverage(e, g);
  EXPECT_DOUBLE_EQ(cov.at("CORE_SQL"), 1.0);
  EXPECT_DOUBLE_EQ(cov.at("PL_PG_SQL"), 1.0);
}

TEST(Coverage, ZeroGenerated) {
  FeatureProfile e, g;
  e.counts = {{"CORE_SQL", 10}};
  e.total_hits = 10;
  auto cov = feature_coverage(e, g);
  EXPECT_DOUBLE_EQ(cov.at("CORE_SQL"), 0.0);
}

TEST(Coverage, PartialRatio) {
  FeatureProfile e, g;
  e.counts = {{"A", 10}};
  e.total_hits = 10;
  g.counts = {{"A", 7}};
  g.total_hits = 7;
  EXPECT_DOUBLE_EQ(feature_coverage(e, g).at("A"), 0.7);
}

TEST(Coverage, CappedAtOneAndOmitsZeroExpectation) {
  FeatureProfile e, g;
  e.counts = {{"A", 5}, {"B", 0}};
  e.total_hits = 5;
  g.counts = {{"A", 9}, {"B", 3}};
  g.total_hits = 12;
  auto cov = feature_coverage(e, g);
  EXPECT_DOUBLE_EQ(cov.at("A"), 1.0);
  EXPECT_EQ(cov.count("B"), 0u);
}

// -------------------------------------------------------------- correlation

TEST(Correlation, PerfectAgreement) {
  std::vector<std::pair<double, double>> pts = {{1, 1}, {2, 2}, {5, 5}};
  auto r = pearson(pts);
  ASSERT_TRUE(r.defined);
  EXPECT_NEAR(r.r, 1.0, 1e-12);
}

TEST(Correlation, ZeroVarianceUndefined) {
  std::vector<std::pair<double, double>> pts = {{1, 3}, {2, 3}, {5, 3}};
  EXPECT_FALSE(pearson(pts).defined);
}

TEST(Correlation, FivePointClosedForm) {
  // points (1,2),(2,4),(3,5),(4,4),(5,5): r = 6/sqrt(10*6) = sqrt(0.6)
  std::vector<std::pair<double, double>> pts = {{1, 2}, {2, 4}, {3, 5}, {4, 4}, {5, 5}};
  auto r = pearson(pts);
  ASSERT_TRUE(r.defined);
  EXPECT_NEAR(r.r, std::sqrt(0.6), 1e-12);
}

// ------------------------------------------------------------- error groups

TEST(ErrorGroups, CleanFullyCoveredAllZero) {
  FeatureProfile e, g;
  e.counts = {{"CORE_SQL", 4}};
  e.total_hits = 4;
  g = e;
  auto rep = categorize_errors({}, feature_coverage(e, g), e, g, 4, 4, true);
  EXPECT_EQ(rep.syntax, 0u);
  EXPECT_EQ(rep.structural, 0u);
  EXPECT_EQ(rep.missing_feature, 0u);
  EXPECT_EQ(rep.semantic_flagged, 0u);
}

TEST(ErrorGroups, EmptyOutputIsStructural) {
  FeatureProfile e, g;
  e.counts = {{"CORE_SQL", 50}};
  e.total_hits = 50;
  auto rep = categorize_errors({}, feature_coverage(e, g), e, g, 20, 0, true);
  EXPECT_GE(rep.structural, 1u);
}

TEST(ErrorGroups, MissingFeatureAndSemanticFlag) {
  FeatureProfile e, g;
  e.counts = {{"CORE_SQL", 2}, {"PL_PG_SQL", 8}};
  e.total_hits = 10;
  g.counts = {{"CORE_SQL", 2}};
  g.total_hits = 2;
  auto rep = categorize_errors({}, feature_coverage(e, g), e, g, 5, 5, true);
  EXPECT_GE(rep.missing_feature, 1u);
  EXPECT_GE(rep.semantic_flagged, 1u);
  EXPECT_EQ(rep.syntax, 0u);
}

TEST(ErrorGroups, SyntaxCountEqualsValidatorErrors) {
  std::vector<SyntaxFinding> f = {{"x", 1, Severity::Error, "a", 0},
                                  {"x", 2, Severity::Warning, "b", 1},
                                  {"x", 3, Severity::Error, "c", 2}};
  FeatureProfile e, g;
  auto rep = categorize_errors(f, {}, e, g, 1, 1, true);
  EXPECT_EQ(rep.syntax, 2u);
  EXPECT_EQ(rep.semantic_flagged, 0u);  // not flagged when syntax errors exist
}

// ----------------------------------------------------------- run evaluation

TEST(EvaluateRun, EchoRunAgainstItselfScoresPerfect) {
  auto dir = temp_dir("run_eval");
  fs::path inputs = dir / "inputs";
  fs::path refs = dir / "refs";
  std::vector<SourceScript> corpus;
  std::vector<std::pair<std::string, std::string>> files = {
      {"a.sql", "SELECT 1;\nSELECT 2;\n"},
      {"b.sql", "INSERT INTO t VALUES (1);\n"}};
  for (auto& [name, text] : files) {
    write_file(inputs / name, text);
    write_file(refs / name, text);
    corpus.push_back(make_script((inputs / name).string(), Dialect::Oracle, text));
  }
  EchoBackend echo;
  RunConfig cfg;
  cfg.input_root = inputs.string();
  auto run = run_pipeline(corpus, echo, cfg);
  fs::path run_dir = dir / "run";
  write_migration_run(run, run_dir);

  auto report = evaluate_run(run_dir, refs);
  ASSERT_EQ(report.files.size(), 2u);
  for (const auto& f : report.files) {
    ASSERT_TRUE(f.scored);
    EXPECT_DOUBLE_EQ(f.recall, 1.0);
    EXPECT_DOUBLE_EQ(f.bleu_score, 1.0);
    EXPECT_DOUBLE_EQ(f.chrf_score, 1.0);
    EXPECT_TRUE(f.ser.valid);
  }
  EXPECT_DOUBLE_EQ(report.file_efficiency, 100.0);
  EXPECT_EQ(report.not_converted, 0u);
  fs::remove_all(dir);
}

TEST(EvaluateRun, MissingReferenceLeavesFileUnscored) {
  auto dir = temp_dir("run_unscored");
  fs::path inputs = dir / "inputs";
  fs::path refs = dir / "refs";
  write_file(inputs / "a.sql", "SELECT 1;\n");
  write_file(inputs / "b.sql", "SELECT 2;\n");
  write_file(refs / "a.sql", "SELECT 1;\n");  // no reference for b.sql
  std::vector<SourceScript> corpus = {
      make_script((inputs / "a.sql").string(), Dialect::Oracle, "SELECT 1;\n"),
      make_script((inputs / "b.sql").string(), Dialect::Oracle, "SELECT 2;\n")};
  EchoBackend echo;
  RunConfig cfg;
  cfg.input_root = inputs.string();
  auto run = run_pipeline(corpus, echo, cfg);
  write_migration_run(run, dir / "run");

  auto report = evaluate_run(dir / "run", refs);
  EXPECT_EQ(report.unscored, 1u);
  for (const auto& f : report.files)
    if (f.rel_path == "b.sql") EXPECT_FALSE(f.scored);
  // unscored files still validate
  EXPECT_DOUBLE_EQ(report.file_efficiency, 100.0);
  fs::remove_all(dir);
}

TEST(EvaluateRun, AggregatesRecomputableFromRows) {
  MetricReport r;
  auto mk = [](bool valid, double ser, size_t errors, SizeClass sz) {
    FileEvaluation f;
    f.scored = true;
    f.ser.valid = valid;
    f.ser.ser = ser;
    f.ser.errors = errors;
    f.size_class = sz;
    return f;
  };
  r.files = {mk(true, 0.0, 0, SizeClass::S), mk(false, 0.5, 2, SizeClass::S),
             mk(true, 0.0, 0, SizeClass::L)};
  aggregate_report(r);
  EXPECT_NEAR(r.file_efficiency, 100.0 * 2 / 3, 1e-12);
  EXPECT_NEAR(r.ser_db, 100.0 * (0.5 / 3), 1e-12);
  EXPECT_EQ(r.error_files, 1u);
  EXPECT_EQ(r.total_errors, 2u);
  // size efficiency: S -> 50%, L -> 100%, mean 75%
  EXPECT_NEAR(r.size_efficiency, 75.0, 1e-12);
}
