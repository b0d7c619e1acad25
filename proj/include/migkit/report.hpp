#pragma once

#include <string>
#include <vector>

#include "migkit/evaluate.hpp"
#include "migkit/gap.hpp"

namespace migkit {

inline std::string per_file_csv(const MetricReport& report) {
  std::string out =
      "file,size_class,scored,recall,bleu,chrf,ser,sepl,warnings_norm,valid,"
      "errors,warnings,statements,lines,not_converted\n";
  char buf[512];
  for (const auto& f : report.files) {
    std::snprintf(buf, sizeof(buf),
                  "%s,%s,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%zu,%zu,%zu,%zu,%d\n",
                  f.rel_path.c_str(), size_class_name(f.size_class), f.scored ? 1 : 0,
                  f.recall, f.bleu_score, f.chrf_score, f.ser.ser, f.ser.sepl,
                  f.ser.warnings_norm, f.ser.valid ? 1 : 0, f.ser.errors,
                  f.ser.warnings, f.ser.statements, f.ser.lines,
                  f.not_converted ? 1 : 0);
    out += buf;
  }
  return out;
}

// One row per run, shaped like the error-analysis summary table.
inline std::string summary_csv(const MetricReport& report, const std::string& pipeline) {
  std::string out =
      "pipeline,file_efficiency,class_efficiency,size_efficiency,ser_db,"
      "error_files,total_errors,not_converted\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f,%.4f,%.4f,%zu,%zu,%zu\n",
                pipeline.c_str(), report.file_efficiency, report.class_efficiency,
                report.size_efficiency, report.ser_db, report.error_files,
                report.total_errors, report.not_converted);
  out += buf;
  return out;
}

// Expected-vs-generated scatter points, one row per (class, file).
inline std::string correlation_points_csv(const MetricReport& report) {
  std::string out = "class,file,expected,generated\n";
  char buf[512];
  for (const auto& f : report.files) {
    if (f.not_converted) continue;
    for (const auto& [cls, exp] : f.expected_profile.counts) {
      double gen = f.generated_profile.counts.count(cls)
                       ? f.generated_profile.counts.at(cls)
                       : 0.0;
      std::snprintf(buf, sizeof(buf), "%s,%s,%.1f,%.1f\n", cls.c_str(),
                    f.rel_path.c_str(), exp, gen);
      out += buf;
    }
  }
  return out;
}

inline std::string error_groups_csv(const MetricReport& report) {
  std::string out = "file,syntax,structural,missing_feature,semantic_flagged\n";
  char buf[512];
  for (const auto& f : report.files) {
    std::snprintf(buf, sizeof(buf), "%s,%zu,%zu,%zu,%zu\n", f.rel_path.c_str(),
                  f.groups.syntax, f.groups.structural, f.groups.missing_feature,
                  f.groups.semantic_flagged);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "TOTAL,%zu,%zu,%zu,%zu\n",
                report.group_totals.syntax, report.group_totals.structural,
                report.group_totals.missing_feature,
                report.group_totals.semantic_flagged);
  out += buf;
  return out;
}

// Per-feature quality keyed by pipeline; the file cli gap consumes.
inline json feature_quality_json(const MetricReport& report,
                                 const std::string& pipeline) {
  json features = json::object();
  for (const auto& [cls, q] : report.feature_quality)
    features[cls] = {{"recall", q.recall},
                     {"bleu", q.bleu},
                     {"chrf", q.chrf},
                     {"syntax_correctness", q.syntax_correctness},
                     {"aggregated", q.aggregated},
                     {"file_count", q.file_count}};
  return json{{"pipelines", {{pipeline, features}}}};
}

// Flat key=value export for any external experiment tracker.
inline std::string metrics_kv(const MetricReport& report, const std::string& pipeline) {
  char buf[128];
  std::string out;
  auto kv = [&](const std::string& key, double v) {
    std::snprintf(buf, sizeof(buf), "%s=%.6f\n", key.c_str(), v);
    out += buf;
  };
  out += "pipeline=" + pipeline + "\n";
  kv("file_efficiency", report.file_efficiency);
  kv("class_efficiency", report.class_efficiency);
  kv("size_efficiency", report.size_efficiency);
  kv("ser_db", report.ser_db);
  kv("sepl_mean", report.sepl_mean);
  kv("error_files", static_cast<double>(report.error_files));
  kv("total_errors", static_cast<double>(report.total_errors));
  kv("total_warnings", static_cast<double>(report.total_warnings));
  kv("not_converted", static_cast<double>(report.not_converted));
  for (const auto& [cls, q] : report.feature_quality) {
    kv("feature." + cls + ".recall", q.recall);
    kv("feature." + cls + ".bleu", q.bleu);
    kv("feature." + cls + ".chrf", q.chrf);
    kv("feature." + cls + ".syntax_correctness", q.syntax_correctness);
    kv("feature." + cls + ".aggregated", q.aggregated);
  }
  return out;
}

// Writes the full evaluation artifact set; returns the artifact file names.
inline std::vector<std::string> write_metric_artifacts(const MetricReport& report,
                                                       const fs::path& out_dir,
                                                       const std::string& pipeline) {
  fs::create_directories(out_dir);
  write_file(out_dir / "metrics.json", report.to_json().dump(2) + "\n");
  write_file(out_dir / "per_file.csv", per_file_csv(report));
  write_file(out_dir / "summary.csv", summary_csv(report, pipeline));
  write_file(out_dir / "correlation_points.csv", correlation_points_csv(report));
  write_file(out_dir / "error_groups.csv", error_groups_csv(report));
  write_file(out_dir / "feature_quality.json",
             feature_quality_json(report, pipeline).dump(2) + "\n");
  write_file(out_dir / "metrics.kv", metrics_kv(report, pipeline));
  return {"metrics.json",   "per_file.csv",        "summary.csv",
          "correlation_points.csv", "error_groups.csv", "feature_quality.json",
          "metrics.kv"};
}

// Command-level manifest: enough to re-run the command and a proof that every
// artifact it names was actually produced.
inline void write_cli_manifest(const fs::path& out_dir, const std::string& command,
                               const json& config, const std::string& input_fingerprint,
                               std::vector<std::string> artifacts,
                               const std::string& started_at) {
  for (const auto& a : artifacts)
    if (!fs::exists(out_dir / a)) throw IoError("manifest artifact missing: " + a);
  json manifest{{"run_id", to_hex(fnv1a64(command + config.dump() + input_fingerprint))},
                {"command", command},
                {"config", config},
                {"input_fingerprint", input_fingerprint},
                {"started_at", started_at},
                {"finished_at", detail::iso_now()},
                {"artifacts", artifacts}};
  write_file(out_dir / "run_manifest.json", manifest.dump(2) + "\n");
}

}  // namespace migkit
