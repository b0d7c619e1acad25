#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "migkit/taxonomy.hpp"

namespace migkit {

class EmptyCounts : public std::runtime_error {
public:
  EmptyCounts() : std::runtime_error("gap_dict: no feature has a positive count") {}
};

class InvalidWeights : public std::runtime_error {
public:
  explicit InvalidWeights(const std::string& msg) : std::runtime_error(msg) {}
};

class SingularityError : public std::runtime_error {
public:
  explicit SingularityError(double x)
      : std::runtime_error("gap_feature: denominator 2-x is not positive (x=" +
                           std::to_string(x) + ")") {}
};

struct GapWeights {
  double recall = 0.2;
  double bleu = 0.2;
  double chrf = 0.2;
  double ser = 0.2;  // applied to the syntax-correctness score
  double agg = 0.4;
  double beta = 0.3;

  double weight_sum() const { return recall + bleu + chrf + ser + agg; }

  void validate() const {
    if (recall < 0 || bleu < 0 || chrf < 0 || ser < 0 || agg < 0)
      throw InvalidWeights("weights must be non-negative");
    if (weight_sum() <= 0) throw InvalidWeights("weight sum must be positive");
    if (beta < 0) throw InvalidWeights("beta must be non-negative");
    // with (1+beta^2) >= 2 a perfectly scored feature hits the 2-x singularity
    if (1.0 + beta * beta >= 2.0)
      throw InvalidWeights("beta too large: (1+beta^2) must stay below 2");
  }

  json to_json() const {
    return json{{"recall", recall}, {"bleu", bleu},   {"chrf", chrf},
                {"ser", ser},       {"agg", agg},     {"beta", beta}};
  }

  static GapWeights from_json(const json& j) {
    GapWeights w;
    w.recall = j.value("recall", w.recall);
    w.bleu = j.value("bleu", w.bleu);
    w.chrf = j.value("chrf", w.chrf);
    w.ser = j.value("ser", w.ser);
    w.agg = j.value("agg", w.agg);
    w.beta = j.value("beta", w.beta);
    w.validate();
    return w;
  }
};

// Dataset-representation gap: 1 - count(f) / max count. The most frequent
// feature scores exactly 0, an unseen feature exactly 1.
inline std::map<std::string, double> gap_dict(
    const std::map<std::string, double>& train_counts) {
  double max_count = 0;
  for (const auto& [_, c] : train_counts) max_count = std::max(max_count, c);
  if (max_count <= 0) throw EmptyCounts();
  std::map<std::string, double> out;
  for (const auto& [f, c] : train_counts) out[f] = 1.0 - c / max_count;
  return out;
}

// Measured per-feature conversion quality, every score in [0,1].
// syntax_correctness is already a correctness score (1 - error rate), which is
// the operand the weighted sum consumes.
struct FeatureQuality {
  std::string feature;
  double recall = 0;
  double bleu = 0;
  double chrf = 0;
  double syntax_correctness = 0;
  double aggregated = 0;
  double train_count = 0;
};

struct QualityScore {
  double q_raw = 0;
  double q_norm = 0;
  double gap_quality = 0;
};

inline QualityScore quality_score(const FeatureQuality& q, const GapWeights& w) {
  w.validate();
  for (double v : {q.recall, q.bleu, q.chrf, q.syntax_correctness, q.aggregated})
    if (v < 0.0 || v > 1.0)
      throw std::invalid_argument("quality_score: scores must lie in [0,1]");
  QualityScore s;
  s.q_raw = w.recall * q.recall + w.bleu * q.bleu + w.chrf * q.chrf +
            w.ser * q.syntax_correctness + w.agg * q.aggregated;
  s.q_norm = s.q_raw / w.weight_sum();
  s.gap_quality = 1.0 - s.q_norm;
  return s;
}

// Combined per-feature improvement target in percent:
//   x = (1 + beta^2)(1 - gap_quality)(1 - gap_dict)
//   gap_feature = (1 - 1/(2 - x)) * 100
// Monotone decreasing in x; ceiling 50% at x = 0.
inline double gap_feature(double gap_quality, double gap_dict_value, double beta) {
  double x = (1.0 + beta * beta) * (1.0 - gap_quality) * (1.0 - gap_dict_value);
  if (2.0 - x <= 0.0) throw SingularityError(x);
  return (1.0 - 1.0 / (2.0 - x)) * 100.0;
}

struct GapRecord {
  std::string pipeline;
  std::string feature;
  double train_count = 0;
  double gap_dict = 0;
  double q_norm = 0;
  double gap_quality = 0;
  double gap_feature_pct = 0;
  uint64_t samples_requested = 0;
  double target_quality = 0;
  bool met_target = false;
  bool new_feature = false;  // no training presence at all
};

struct GapConfig {
  GapWeights weights;
  // GAP_Dict is quantized by truncation to this many decimals before entering
  // the GAP_Feature formula. Truncation, not rounding: a feature with 0.07%
  // representation must keep gap_dict 0.99, not jump to 1.00. Set -1 to keep
  // full precision.
  int gap_dict_decimals = 2;
  // sample-request policy: proportional to the gap against the best-covered
  // feature, floored at zero
  bool request_samples = true;
};

struct GapEstimate {
  std::vector<GapRecord> records;  // sorted by gap_feature_pct descending
  std::vector<std::string> notes;
};

namespace detail {

inline double quantize_trunc(double v, int decimals) {
  if (decimals < 0) return v;
  double scale = std::pow(10.0, decimals);
  return std::floor(v * scale + 1e-9) / scale;
}

}  // namespace detail

// Combines training counts, taxonomy targets and per-pipeline per-feature
// quality into one GapRecord per (pipeline, feature). Features the dataset
// has never seen get gap_dict = 1; with no scores they land on the formula's
// 50% ceiling, which is also recorded as a note.
inline GapEstimate estimate_dataset(
    const std::map<std::string, double>& train_counts,
    const std::map<std::string, std::map<std::string, FeatureQuality>>& per_pipeline,
    const FeatureTaxonomy& taxonomy, const GapConfig& cfg = {}) {
  cfg.weights.validate();

  std::map<std::string, double> counts;
  for (const auto& cls : taxonomy.classes) counts[cls.name] = 0;
  for (const auto& [f, c] : train_counts) counts[f] = c;
  auto dict = gap_dict(counts);
  double max_count = 0;
  for (const auto& [_, c] : counts) max_count = std::max(max_count, c);

  GapEstimate est;
  bool saw_new = false;
  for (const auto& [pipeline, features] : per_pipeline) {
    for (const auto& [fname, count] : counts) {
      GapRecord rec;
      rec.pipeline = pipeline;
      rec.feature = fname;
      rec.train_count = count;
      rec.new_feature = (count == 0);
      saw_new = saw_new || rec.new_feature;
      rec.gap_dict = detail::quantize_trunc(dict.at(fname), cfg.gap_dict_decimals);

      FeatureQuality q;  // unseen features keep all-zero scores
      if (auto it = features.find(fname); it != features.end()) q = it->second;
      auto qs = quality_score(q, cfg.weights);
      rec.q_norm = qs.q_norm;
      rec.gap_quality = qs.gap_quality;
      rec.gap_feature_pct = gap_feature(rec.gap_quality, rec.gap_dict, cfg.weights.beta);

      if (const FeatureClass* cls = taxonomy.find(fname)) {
        rec.target_quality = cls->target_quality;
        rec.met_target = rec.q_norm >= cls->target_quality;
      }
      if (cfg.request_samples && rec.gap_feature_pct > 0) {
        double want = std::ceil(rec.gap_feature_pct / 100.0 * max_count) - count;
        rec.samples_requested = want > 0 ? static_cast<uint64_t>(want) : 0;
      }
      est.records.push_back(std::move(rec));
    }
  }
  std::sort(est.records.begin(), est.records.end(),
            [](const GapRecord& a, const GapRecord& b) {
              if (a.gap_feature_pct != b.gap_feature_pct)
                return a.gap_feature_pct > b.gap_feature_pct;
              if (a.pipeline != b.pipeline) return a.pipeline < b.pipeline;
              return a.feature < b.feature;
            });
  if (saw_new)
    est.notes.push_back(
        "features with no training samples sit at the formula ceiling of 50% "
        "(x=0), not at 100%");
  return est;
}

inline std::string gap_csv(const GapEstimate& est) {
  std::string out =
      "pipeline,feature,train_count,gap_dict,q_norm,gap_quality,gap_feature_pct,"
      "samples_requested\n";
  char buf[256];
  for (const auto& r : est.records) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.0f,%.6f,%.8f,%.8f,%.4f,%llu\n",
                  r.pipeline.c_str(), r.feature.c_str(), r.train_count, r.gap_dict,
                  r.q_norm, r.gap_quality, r.gap_feature_pct,
                  static_cast<unsigned long long>(r.samples_requested));
    out += buf;
  }
  return out;
}

inline json gap_report_json(const GapEstimate& est, const GapWeights& w) {
  json records = json::array();
  for (const auto& r : est.records)
    records.push_back({{"pipeline", r.pipeline},
                       {"feature", r.feature},
                       {"train_count", r.train_count},
                       {"gap_dict", r.gap_dict},
                       {"q_norm", r.q_norm},
                       {"gap_quality", r.gap_quality},
                       {"gap_feature_pct", r.gap_feature_pct},
                       {"samples_requested", r.samples_requested},
                       {"target_quality", r.target_quality},
                       {"met_target", r.met_target},
                       {"new_feature", r.new_feature}});
  return json{{"weights", w.to_json()}, {"records", records}, {"notes", est.notes}};
}

}  // namespace migkit
