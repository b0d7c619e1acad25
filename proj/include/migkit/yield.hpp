#pragma once

#include <string>
#include <vector>

#include "migkit/io.hpp"

namespace migkit {

// Economic projection of migration yield: per feature group, how many files
// convert successfully at the observed coverage and quality, against a
// baseline tool's converted-file counts. File counts must already be
// de-overlapped; the assumptions used are carried through into the report.
struct YieldFeatureInput {
  std::string name;
  double coverage_pct = 0;   // expected feature coverage, percent
  double files = 0;          // de-overlapped file count for this feature
  double quality_pct = -1;   // per-feature override; <0 uses the run default
  double baseline_files = 0; // files the baseline tool converts
};

struct YieldInputs {
  std::vector<YieldFeatureInput> features;
  double default_quality_pct = 82.0;
  double samples_per_day = 150.0;  // one SME's daily sample output
  std::vector<std::string> overlap_notes;

  static YieldInputs from_json(const json& j) {
    YieldInputs in;
    in.default_quality_pct = j.value("quality_pct", in.default_quality_pct);
    in.samples_per_day = j.value("samples_per_day", in.samples_per_day);
    if (j.contains("overlap_notes"))
      in.overlap_notes = j["overlap_notes"].get<std::vector<std::string>>();
    for (const auto& f : j.at("features")) {
      YieldFeatureInput row;
      row.name = f.at("name").get<std::string>();
      row.coverage_pct = f.at("coverage_pct").get<double>();
      row.files = f.at("files").get<double>();
      row.quality_pct = f.value("quality_pct", -1.0);
      row.baseline_files = f.value("baseline_files", 0.0);
      return_check(row);
      in.features.push_back(std::move(row));
    }
    return in;
  }

private:
  static void return_check(const YieldFeatureInput& row) {
    if (row.coverage_pct < 0 || row.coverage_pct > 100)
      throw std::invalid_argument("coverage_pct out of range for " + row.name);
    if (row.files < 0) throw std::invalid_argument("negative files for " + row.name);
  }
};

struct YieldRow {
  std::string name;
  double coverage_pct = 0;
  double files = 0;
  double quality_pct = 0;
  double success_rate_pct = 0;  // coverage x quality
  double success_files = 0;
  double baseline_files = 0;
};

struct YieldReport {
  std::vector<YieldRow> rows;
  double total_success = 0;
  double total_baseline = 0;
  double difference = 0;
  double samples_per_day = 0;
  double person_days = 0;  // manual effort the difference replaces
  std::vector<std::string> overlap_notes;

  json to_json() const {
    json rows_json = json::array();
    for (const auto& r : rows)
      rows_json.push_back({{"feature", r.name},
                           {"coverage_pct", r.coverage_pct},
                           {"files", r.files},
                           {"quality_pct", r.quality_pct},
                           {"success_rate_pct", r.success_rate_pct},
                           {"success_files", r.success_files},
                           {"baseline_files", r.baseline_files}});
    return json{{"rows", rows_json},
                {"total_success", total_success},
                {"total_baseline", total_baseline},
                {"difference", difference},
                {"samples_per_day", samples_per_day},
                {"person_days", person_days},
                {"overlap_notes", overlap_notes}};
  }

  std::string to_csv() const {
    std::string out =
        "feature,coverage_pct,files,quality_pct,success_rate_pct,success_files,"
        "baseline_files\n";
    char buf[256];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof(buf), "%s,%.2f,%.0f,%.2f,%.4f,%.1f,%.0f\n",
                    r.name.c_str(), r.coverage_pct, r.files, r.quality_pct,
                    r.success_rate_pct, r.success_files, r.baseline_files);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), "TOTAL,,,,,%.1f,%.0f\n", total_success,
                  total_baseline);
    out += buf;
    return out;
  }
};

inline YieldReport project_yield(const YieldInputs& in) {
  YieldReport report;
  report.samples_per_day = in.samples_per_day;
  report.overlap_notes = in.overlap_notes;
  for (const auto& f : in.features) {
    YieldRow row;
    row.name = f.name;
    row.coverage_pct = f.coverage_pct;
    row.files = f.files;
    row.quality_pct = f.quality_pct >= 0 ? f.quality_pct : in.default_quality_pct;
    row.success_rate_pct = f.coverage_pct * row.quality_pct / 100.0;
    row.success_files = f.files * row.success_rate_pct / 100.0;
    row.baseline_files = f.baseline_files;
    report.total_success += row.success_files;
    report.total_baseline += row.baseline_files;
    report.rows.push_back(std::move(row));
  }
  report.difference = report.total_success - report.total_baseline;
  report.person_days =
      in.samples_per_day > 0 ? report.difference / in.samples_per_day : 0.0;
  return report;
}

}  // namespace migkit
