#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "migkit/metrics.hpp"
#include "migkit/pipeline.hpp"
#include "migkit/profile.hpp"
#include "migkit/validator.hpp"

namespace migkit {

// Tunable thresholds of the error-group heuristics.
struct ErrorGroupConfig {
  double missing_feature_threshold = 0.5;  // coverage below this flags the class
  double structural_ratio = 0.3;           // statement-count collapse factor
  double deviation_threshold = 0.4;        // profile mass shift flagging semantics
};

struct ErrorGroupReport {
  size_t syntax = 0;
  size_t structural = 0;
  size_t missing_feature = 0;
  size_t semantic_flagged = 0;  // heuristic only; no execution-level check

  json to_json() const {
    return json{{"syntax", syntax},
                {"structural", structural},
                {"missing_feature", missing_feature},
                {"semantic_flagged", semantic_flagged}};
  }
};

// Per class: min(generated, expected) / expected. Classes the expectation
// does not contain are omitted.
inline std::map<std::string, double> feature_coverage(const FeatureProfile& expected,
                                                      const FeatureProfile& generated) {
  std::map<std::string, double> out;
  for (const auto& [cls, exp_count] : expected.counts) {
    if (exp_count <= 0) continue;
    double gen = 0;
    if (auto it = generated.counts.find(cls); it != generated.counts.end())
      gen = it->second;
    out[cls] = std::min(gen, exp_count) / exp_count;
  }
  return out;
}

struct PearsonResult {
  bool defined = false;  // false when either side has zero variance
  double r = 0.0;
};

inline PearsonResult pearson(const std::vector<std::pair<double, double>>& points) {
  PearsonResult res;
  const size_t n = points.size();
  if (n < 2) return res;
  double mx = 0, my = 0;
  for (auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (auto& [x, y] : points) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0 || syy == 0) return res;
  res.defined = true;
  res.r = sxy / std::sqrt(sxx * syy);
  return res;
}

// Expected-vs-generated count pairs per feature class, across files.
inline std::map<std::string, PearsonResult> feature_correlation(
    const std::map<std::string, std::vector<std::pair<double, double>>>& per_class) {
  std::map<std::string, PearsonResult> out;
  for (const auto& [cls, points] : per_class) out[cls] = pearson(points);
  return out;
}

// Buckets a file's problems into the four coverage groups. Only the syntax
// count is exact (validator errors); the rest are labeled heuristics.
inline ErrorGroupReport categorize_errors(const std::vector<SyntaxFinding>& findings,
                                          const std::map<std::string, double>& coverage,
                                          const FeatureProfile& expected,
                                          const FeatureProfile& generated,
                                          size_t input_statements,
                                          size_t output_statements,
                                          bool input_nonempty,
                                          const ErrorGroupConfig& cfg = {}) {
  ErrorGroupReport report;
  for (const auto& f : findings)
    if (f.severity == Severity::Error) ++report.syntax;

  for (const auto& [cls, cov] : coverage)
    if (cov < cfg.missing_feature_threshold) ++report.missing_feature;

  if (input_nonempty && generated.total_hits == 0 && output_statements == 0)
    ++report.structural;
  if (input_statements > 0 &&
      static_cast<double>(output_statements) <
          cfg.structural_ratio * static_cast<double>(input_statements))
    ++report.structural;

  if (report.syntax == 0) {
    auto e = expected.percentages();
    auto g = generated.percentages();
    double l1 = 0;
    for (const auto& [cls, ep] : e) {
      double gp = g.count(cls) ? g.at(cls) : 0.0;
      l1 += std::abs(ep - gp);
    }
    for (const auto& [cls, gp] : g)
      if (!e.count(cls)) l1 += gp;
    if (l1 / 2.0 > cfg.deviation_threshold) ++report.semantic_flagged;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Whole-run evaluation
// ---------------------------------------------------------------------------

struct FileEvaluation {
  std::string rel_path;
  bool not_converted = false;
  bool scored = false;  // reference was present
  double recall = 0, bleu_score = 0, chrf_score = 0;
  SerMetrics ser;
  std::map<std::string, double> coverage;    // PostgreSQL classes
  FeatureProfile oracle_profile;             // input side
  FeatureProfile expected_profile;           // predicted PostgreSQL mix
  FeatureProfile generated_profile;          // actual output mix
  ErrorGroupReport groups;
  SizeClass size_class = SizeClass::S;

  json to_json() const {
    json j{{"file", rel_path},
           {"not_converted", not_converted},
           {"scored", scored},
           {"size_class", size_class_name(size_class)},
           {"ser", ser.ser},
           {"sepl", ser.sepl},
           {"warnings_norm", ser.warnings_norm},
           {"valid", ser.valid},
           {"errors", ser.errors},
           {"warnings", ser.warnings},
           {"statements", ser.statements},
           {"lines", ser.lines},
           {"coverage", coverage},
           {"expected_counts", expected_profile.counts},
           {"generated_counts", generated_profile.counts},
           {"oracle_counts", oracle_profile.counts},
           {"error_groups", groups.to_json()}};
    if (scored) {
      j["recall"] = recall;
      j["bleu"] = bleu_score;
      j["chrf"] = chrf_score;
    }
    return j;
  }

  static FileEvaluation from_json(const json& j) {
    FileEvaluation f;
    f.rel_path = j.at("file").get<std::string>();
    f.not_converted = j.value("not_converted", false);
    f.scored = j.value("scored", false);
    std::string sz = j.value("size_class", "S");
    f.size_class = sz == "L" ? SizeClass::L : sz == "M" ? SizeClass::M : SizeClass::S;
    f.ser.ser = j.value("ser", 0.0);
    f.ser.sepl = j.value("sepl", 0.0);
    f.ser.warnings_norm = j.value("warnings_norm", 0.0);
    f.ser.valid = j.value("valid", true);
    f.ser.errors = j.value("errors", size_t{0});
    f.ser.warnings = j.value("warnings", size_t{0});
    f.ser.statements = j.value("statements", size_t{0});
    f.ser.lines = j.value("lines", size_t{0});
    if (f.scored) {
      f.recall = j.value("recall", 0.0);
      f.bleu_score = j.value("bleu", 0.0);
      f.chrf_score = j.value("chrf", 0.0);
    }
    auto load_counts = [&](const char* key, FeatureProfile& p) {
      if (!j.contains(key)) return;
      for (const auto& [cls, v] : j.at(key).items()) {
        p.counts[cls] = v.get<double>();
        p.total_hits += v.get<double>();
      }
    };
    load_counts("expected_counts", f.expected_profile);
    load_counts("generated_counts", f.generated_profile);
    load_counts("oracle_counts", f.oracle_profile);
    if (j.contains("coverage"))
      for (const auto& [cls, v] : j.at("coverage").items())
        f.coverage[cls] = v.get<double>();
    if (j.contains("error_groups")) {
      const auto& g = j.at("error_groups");
      f.groups.syntax = g.value("syntax", size_t{0});
      f.groups.structural = g.value("structural", size_t{0});
      f.groups.missing_feature = g.value("missing_feature", size_t{0});
      f.groups.semantic_flagged = g.value("semantic_flagged", size_t{0});
    }
    return f;
  }
};

struct FeatureQualityScore {
  double recall = 0, bleu = 0, chrf = 0;
  double syntax_correctness = 0;  // mean(1 - ser)
  double aggregated = 0;          // mean of the four above
  size_t file_count = 0;
};

struct MetricReport {
  std::vector<FileEvaluation> files;
  double file_efficiency = 0;   // percent
  double class_efficiency = 0;  // percent
  double size_efficiency = 0;   // percent
  double ser_db = 0;            // percent, mean per-file ser
  double sepl_mean = 0;
  size_t error_files = 0;
  size_t total_errors = 0;
  size_t total_warnings = 0;
  size_t not_converted = 0;
  size_t unscored = 0;
  std::map<std::string, double> class_coverage_mean;       // PostgreSQL classes
  std::map<std::string, double> size_class_efficiency;     // percent per S/M/L
  std::map<std::string, FeatureQualityScore> feature_quality;  // Oracle classes
  std::map<std::string, PearsonResult> correlation;        // PostgreSQL classes
  ErrorGroupReport group_totals;

  json to_json() const {
    json files_json = json::array();
    for (const auto& f : files) files_json.push_back(f.to_json());
    json fq = json::object();
    for (const auto& [cls, q] : feature_quality)
      fq[cls] = {{"recall", q.recall},
                 {"bleu", q.bleu},
                 {"chrf", q.chrf},
                 {"syntax_correctness", q.syntax_correctness},
                 {"aggregated", q.aggregated},
                 {"file_count", q.file_count}};
    json corr = json::object();
    for (const auto& [cls, p] : correlation)
      corr[cls] = p.defined ? json(p.r) : json(nullptr);
    return json{{"files", files_json},
                {"file_efficiency", file_efficiency},
                {"class_efficiency", class_efficiency},
                {"size_efficiency", size_efficiency},
                {"ser_db", ser_db},
                {"sepl_mean", sepl_mean},
                {"error_files", error_files},
                {"total_errors", total_errors},
                {"total_warnings", total_warnings},
                {"not_converted", not_converted},
                {"unscored", unscored},
                {"class_coverage_mean", class_coverage_mean},
                {"size_class_efficiency", size_class_efficiency},
                {"feature_quality", fq},
                {"correlation", corr},
                {"error_groups", group_totals.to_json()}};
  }
};

// Rebuilds the per-file rows from a metrics.json payload; aggregates are
// recomputed by aggregate_report, never trusted from the file.
inline MetricReport metric_report_from_json(const json& j);

// Recomputes every run-level number from the per-file evaluations; emitters
// and tests rely on these aggregates being derivable from the rows.
inline void aggregate_report(MetricReport& report) {
  const size_t total = report.files.size();
  if (total == 0) return;
  size_t valid = 0;
  double ser_sum = 0, sepl_sum = 0;
  size_t ser_files = 0;
  std::map<std::string, std::pair<double, size_t>> cov_acc;
  std::map<std::string, std::pair<size_t, size_t>> size_acc;  // valid/total
  std::map<std::string, std::vector<std::pair<double, double>>> corr_points;
  struct QualityAcc {
    double r = 0, b = 0, c = 0, syn = 0;
    size_t scored = 0, conv = 0;
  };
  std::map<std::string, QualityAcc> qual;

  for (const auto& f : report.files) {
    bool file_valid = !f.not_converted && f.ser.valid;
    if (file_valid) ++valid;
    auto& sz = size_acc[size_class_name(f.size_class)];
    ++sz.second;
    if (file_valid) ++sz.first;
    if (!f.not_converted) {
      ser_sum += f.ser.ser;
      sepl_sum += f.ser.sepl;
      ++ser_files;
      if (f.ser.errors > 0) ++report.error_files;
      report.total_errors += f.ser.errors;
      report.total_warnings += f.ser.warnings;
      for (const auto& [cls, cov] : f.coverage) {
        cov_acc[cls].first += cov;
        cov_acc[cls].second += 1;
      }
      for (const auto& [cls, exp] : f.expected_profile.counts) {
        double gen = f.generated_profile.counts.count(cls)
                         ? f.generated_profile.counts.at(cls)
                         : 0.0;
        corr_points[cls].push_back({exp, gen});
      }
    } else {
      ++report.not_converted;
    }
    if (!f.scored && !f.not_converted) ++report.unscored;
    report.group_totals.syntax += f.groups.syntax;
    report.group_totals.structural += f.groups.structural;
    report.group_totals.missing_feature += f.groups.missing_feature;
    report.group_totals.semantic_flagged += f.groups.semantic_flagged;

    for (const auto& [cls, cnt] : f.oracle_profile.counts) {
      if (cnt <= 0) continue;
      auto& q = qual[cls];
      if (f.scored) {
        q.r += f.recall;
        q.b += f.bleu_score;
        q.c += f.chrf_score;
        ++q.scored;
      }
      if (!f.not_converted) {
        q.syn += 1.0 - f.ser.ser;
        ++q.conv;
      }
    }
  }

  report.file_efficiency = 100.0 * static_cast<double>(valid) / total;
  report.ser_db = ser_files ? 100.0 * ser_sum / ser_files : 0.0;
  report.sepl_mean = ser_files ? sepl_sum / ser_files : 0.0;

  double cov_mean_sum = 0;
  for (const auto& [cls, acc] : cov_acc) {
    double mean = acc.second ? acc.first / acc.second : 0.0;
    report.class_coverage_mean[cls] = mean;
    cov_mean_sum += mean;
  }
  report.class_efficiency =
      cov_acc.empty() ? 0.0 : 100.0 * cov_mean_sum / cov_acc.size();

  double size_sum = 0;
  for (const auto& [name, acc] : size_acc) {
    double eff = acc.second ? 100.0 * static_cast<double>(acc.first) / acc.second : 0.0;
    report.size_class_efficiency[name] = eff;
    size_sum += eff;
  }
  report.size_efficiency = size_acc.empty() ? 0.0 : size_sum / size_acc.size();

  for (const auto& [cls, q] : qual) {
    FeatureQualityScore s;
    s.file_count = std::max(q.scored, q.conv);
    if (q.scored) {
      s.recall = q.r / q.scored;
      s.bleu = q.b / q.scored;
      s.chrf = q.c / q.scored;
    }
    if (q.conv) s.syntax_correctness = q.syn / q.conv;
    s.aggregated = (s.recall + s.bleu + s.chrf + s.syntax_correctness) / 4.0;
    report.feature_quality[cls] = s;
  }
  report.correlation = feature_correlation(corr_points);
}

inline MetricReport metric_report_from_json(const json& j) {
  MetricReport report;
  for (const auto& jf : j.at("files")) report.files.push_back(FileEvaluation::from_json(jf));
  aggregate_report(report);
  return report;
}

struct EvaluateOptions {
  ValidatorRef validator = std::make_shared<BuiltinValidator>();
  const FeatureTaxonomy* oracle_taxonomy = nullptr;
  const FeatureTaxonomy* postgres_taxonomy = nullptr;
  FeatureMapping mapping = default_feature_mapping();
  ErrorGroupConfig groups;
};

namespace detail {
inline size_t count_oracle_statements(std::string_view text,
                                      std::span<const Token> tokens) {
  return scan_units(text, tokens).size();
}
}  // namespace detail

// Scores one translated file. Passing no reference leaves it unscored on the
// NLP metrics while syntax and feature checks still run.
inline FileEvaluation evaluate_file(const std::string& rel_path,
                                    const std::string& oracle_text,
                                    const std::string& output_text,
                                    const std::optional<std::string>& reference_text,
                                    const EvaluateOptions& opt,
                                    const std::string& output_path = "") {
  const FeatureTaxonomy& ora_tax =
      opt.oracle_taxonomy ? *opt.oracle_taxonomy : default_taxonomy(Dialect::Oracle);
  const FeatureTaxonomy& pg_tax = opt.postgres_taxonomy
                                      ? *opt.postgres_taxonomy
                                      : default_taxonomy(Dialect::PostgreSQL);
  FileEvaluation ev;
  ev.rel_path = rel_path;
  ev.size_class = size_class_for_lines(count_lines(oracle_text));

  auto ora_script = make_script(rel_path, Dialect::Oracle, oracle_text);
  ev.oracle_profile = profile(ora_script, ora_tax);
  ev.expected_profile = predict_expected_features(ev.oracle_profile, opt.mapping);
  auto out_script = make_script(rel_path, Dialect::PostgreSQL, output_text);
  ev.generated_profile = profile(out_script, pg_tax);
  ev.coverage = feature_coverage(ev.expected_profile, ev.generated_profile);

  auto findings = opt.validator->validate(output_path, output_text);
  ev.ser = ser_metrics(findings, output_text);

  if (reference_text) {
    ev.scored = true;
    ev.recall = token_recall(output_text, *reference_text);
    ev.bleu_score = bleu(output_text, *reference_text);
    ev.chrf_score = chrf(output_text, *reference_text);
  }

  auto in_lexed = tokenize(oracle_text, Dialect::Oracle);
  size_t input_statements = detail::count_oracle_statements(oracle_text, in_lexed.tokens);
  ev.groups = categorize_errors(findings, ev.coverage, ev.expected_profile,
                                ev.generated_profile, input_statements,
                                ev.ser.statements, !oracle_text.empty(), opt.groups);
  return ev;
}

// Evaluates a whole migration run directory against a reference tree. Files
// whose reference is missing are reported unscored; not-converted files count
// against file efficiency.
inline MetricReport evaluate_run(const fs::path& run_dir, const fs::path& references,
                                 const EvaluateOptions& opt = {}) {
  json manifest = json::parse(read_file(run_dir / "manifest.json"));
  std::string input_root = manifest["config"].value("input_root", "");
  MetricReport report;

  for (const auto& jf : manifest.at("files")) {
    std::string rel = jf.at("input").get<std::string>();
    bool converted = jf.at("status").get<std::string>() == "converted";
    std::string oracle_text;
    fs::path input_path = input_root.empty() ? fs::path(rel) : fs::path(input_root) / rel;
    if (fs::exists(input_path)) oracle_text = read_file(input_path);

    if (!converted) {
      FileEvaluation ev;
      ev.rel_path = rel;
      ev.not_converted = true;
      ev.ser.valid = false;
      ev.size_class = size_class_for_lines(count_lines(oracle_text));
      if (!oracle_text.empty()) {
        const FeatureTaxonomy& ora_tax = opt.oracle_taxonomy
                                             ? *opt.oracle_taxonomy
                                             : default_taxonomy(Dialect::Oracle);
        auto s = make_script(rel, Dialect::Oracle, oracle_text);
        ev.oracle_profile = profile(s, ora_tax);
      }
      report.files.push_back(std::move(ev));
      continue;
    }

    fs::path out_path = run_dir / jf.at("output").get<std::string>();
    std::string output_text = read_file(out_path);
    std::optional<std::string> reference_text;
    fs::path ref_path = references / rel;
    if (fs::exists(ref_path)) reference_text = read_file(ref_path);

    report.files.push_back(evaluate_file(rel, oracle_text, output_text,
                                         reference_text, opt, out_path.string()));
  }
  aggregate_report(report);
  return report;
}

}  // namespace migkit
