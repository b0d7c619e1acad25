#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "migkit/profile.hpp"

namespace migkit {

enum class SampleKind { Descriptive, Pair };
enum class Split { Train, Test };

inline const char* sample_kind_name(SampleKind k) {
  return k == SampleKind::Descriptive ? "descriptive" : "pair";
}
inline const char* split_name(Split s) { return s == Split::Train ? "train" : "test"; }

struct DatasetSample {
  std::string id;
  SampleKind kind = SampleKind::Pair;
  std::string oracle_text;
  std::string counterpart;  // description (dataset 1) or PostgreSQL code (dataset 2)
  std::vector<std::string> feature_tags;
  Split split = Split::Train;
  SizeClass size_class = SizeClass::S;

  json to_json() const {
    return json{{"id", id},
                {"kind", sample_kind_name(kind)},
                {"oracle_text", oracle_text},
                {"counterpart", counterpart},
                {"feature_tags", feature_tags},
                {"split", split_name(split)},
                {"size_class", size_class_name(size_class)}};
  }
};

// One row of the pairing manifest (JSONL):
//   {"oracle": "path.sql", "postgres": "path.sql", "description": "text",
//    "description_path": "path.txt"}
// postgres and description are both optional, but a row with neither has no
// counterpart to pair with.
struct PairingRow {
  std::string oracle_path;
  std::optional<std::string> postgres_path;
  std::optional<std::string> description;
  std::optional<std::string> description_path;

  static PairingRow from_json(const json& j) {
    PairingRow r;
    r.oracle_path = j.at("oracle").get<std::string>();
    if (j.contains("postgres") && !j["postgres"].is_null())
      r.postgres_path = j["postgres"].get<std::string>();
    if (j.contains("description") && !j["description"].is_null())
      r.description = j["description"].get<std::string>();
    if (j.contains("description_path") && !j["description_path"].is_null())
      r.description_path = j["description_path"].get<std::string>();
    return r;
  }
};

// Train fraction matching a 30K/2K corpus: 30000/32000.
inline constexpr double kDefaultTrainFraction = 0.9375;

struct DatasetBuildResult {
  std::vector<DatasetSample> dataset1;  // code : description
  std::vector<DatasetSample> dataset2;  // oracle : postgresql pairs
  std::vector<std::string> missing;     // collected MissingCounterpart reports
  FeatureProfile oracle_train, oracle_test;  // Oracle-side distribution per split
  FeatureProfile pg_train, pg_test;          // PostgreSQL-side (dataset 2 only)
};

namespace detail {

struct StratumKey {
  SampleKind kind;
  std::string dominant;
  bool operator<(const StratumKey& o) const {
    if (kind != o.kind) return kind < o.kind;
    return dominant < o.dominant;
  }
};

inline std::string dominant_class(const FeatureProfile& p) {
  std::string best = "NONE";
  double best_count = 0;
  for (const auto& [cls, c] : p.counts) {
    if (c > best_count) {
      best_count = c;
      best = cls;
    }
  }
  return best;
}

// Deterministic stratified split: within each (kind, dominant feature)
// stratum samples are ordered by a seeded content hash and the train fraction
// is rounded per stratum. Same corpus + seed => identical assignment.
inline void assign_splits(std::vector<DatasetSample*>& samples,
                          const std::map<std::string, FeatureProfile>& profiles,
                          double train_fraction, uint64_t seed) {
  std::map<StratumKey, std::vector<DatasetSample*>> strata;
  for (auto* s : samples) {
    StratumKey key{s->kind, dominant_class(profiles.at(s->id))};
    strata[key].push_back(s);
  }
  for (auto& [key, members] : strata) {
    std::sort(members.begin(), members.end(),
              [&](const DatasetSample* a, const DatasetSample* b) {
                uint64_t ha = fnv1a64(a->id, seed * 1099511628211ull + 17);
                uint64_t hb = fnv1a64(b->id, seed * 1099511628211ull + 17);
                if (ha != hb) return ha < hb;
                return a->id < b->id;
              });
    size_t train_n = static_cast<size_t>(
        std::llround(train_fraction * static_cast<double>(members.size())));
    train_n = std::min(train_n, members.size());
    for (size_t i = 0; i < members.size(); ++i)
      members[i]->split = i < train_n ? Split::Train : Split::Test;
  }
}

}  // namespace detail

// Builds Dataset 1 (code : description) and Dataset 2 (oracle : postgres)
// from a pairing manifest. Rows with unreadable or absent counterparts are
// collected as MissingCounterpart reports, never fatal.
inline DatasetBuildResult build_datasets(const std::vector<PairingRow>& rows,
                                         const fs::path& corpus_root,
                                         const FeatureTaxonomy& oracle_taxonomy,
                                         const FeatureTaxonomy& postgres_taxonomy,
                                         double train_fraction = kDefaultTrainFraction,
                                         uint64_t seed = 0) {
  DatasetBuildResult result;
  std::map<std::string, FeatureProfile> profiles;       // sample id -> oracle profile
  std::map<std::string, std::string> pg_texts;          // dataset2 id -> pg text

  auto resolve = [&](const std::string& p) { return corpus_root / p; };

  for (const auto& row : rows) {
    fs::path oracle_path = resolve(row.oracle_path);
    if (!fs::exists(oracle_path)) {
      result.missing.push_back("MissingCounterpart: oracle file not found: " +
                               row.oracle_path);
      continue;
    }
    std::string oracle_text = read_file(oracle_path);
    auto script = make_script(row.oracle_path, Dialect::Oracle, oracle_text);
    auto prof = profile(script, oracle_taxonomy);
    std::vector<std::string> tags;
    for (const auto& [cls, c] : prof.counts)
      if (c > 0) tags.push_back(cls);

    if (row.description || row.description_path) {
      std::string desc;
      if (row.description_path) {
        fs::path dp = resolve(*row.description_path);
        if (!fs::exists(dp)) {
          result.missing.push_back("MissingCounterpart: description file not found: " +
                                   *row.description_path);
        } else {
          desc = read_file(dp);
        }
      } else {
        desc = *row.description;
      }
      if (!desc.empty()) {
        DatasetSample s;
        s.kind = SampleKind::Descriptive;
        s.oracle_text = oracle_text;
        s.counterpart = desc;
        s.feature_tags = tags;
        s.size_class = script.size_class;
        s.id = content_id("descriptive\x1f" + oracle_text + "\x1f" + desc);
        profiles[s.id] = prof;
        result.dataset1.push_back(std::move(s));
      }
    }
    if (row.postgres_path) {
      fs::path pp = resolve(*row.postgres_path);
      if (!fs::exists(pp)) {
        result.missing.push_back("MissingCounterpart: postgres file not found: " +
                                 *row.postgres_path);
      } else if (std::string pg_text = read_file(pp); pg_text.empty()) {
        result.missing.push_back("MissingCounterpart: postgres file is empty: " +
                                 *row.postgres_path);
      } else {
        DatasetSample s;
        s.kind = SampleKind::Pair;
        s.oracle_text = oracle_text;
        s.counterpart = pg_text;
        s.feature_tags = tags;
        s.size_class = script.size_class;
        s.id = content_id("pair\x1f" + oracle_text + "\x1f" + pg_text);
        profiles[s.id] = prof;
        pg_texts[s.id] = pg_text;
        result.dataset2.push_back(std::move(s));
      }
    }
    // rows with a postgres/description path that failed to resolve already
    // collected their specific message above
    if (!row.postgres_path && !row.description && !row.description_path)
      result.missing.push_back("MissingCounterpart: row has neither postgres nor "
                               "description: " + row.oracle_path);
  }

  std::vector<DatasetSample*> all;
  for (auto& s : result.dataset1) all.push_back(&s);
  for (auto& s : result.dataset2) all.push_back(&s);
  if (!all.empty()) detail::assign_splits(all, profiles, train_fraction, seed);

  for (const auto& cls : oracle_taxonomy.classes) {
    result.oracle_train.counts[cls.name] = 0;
    result.oracle_test.counts[cls.name] = 0;
  }
  for (const auto& cls : postgres_taxonomy.classes) {
    result.pg_train.counts[cls.name] = 0;
    result.pg_test.counts[cls.name] = 0;
  }
  for (auto* s : all) {
    auto& target = s->split == Split::Train ? result.oracle_train : result.oracle_test;
    target.add(profiles.at(s->id));
  }
  for (auto& s : result.dataset2) {
    auto pg_script = make_script(s.id, Dialect::PostgreSQL, pg_texts.at(s.id));
    auto prof = profile(pg_script, postgres_taxonomy);
    (s.split == Split::Train ? result.pg_train : result.pg_test).add(prof);
  }
  return result;
}

inline DatasetBuildResult build_datasets_from_manifest(
    const fs::path& manifest_path, const fs::path& corpus_root,
    const FeatureTaxonomy& oracle_taxonomy, const FeatureTaxonomy& postgres_taxonomy,
    double train_fraction = kDefaultTrainFraction, uint64_t seed = 0) {
  std::vector<PairingRow> rows;
  for (const auto& j : read_jsonl(manifest_path)) rows.push_back(PairingRow::from_json(j));
  return build_datasets(rows, corpus_root, oracle_taxonomy, postgres_taxonomy,
                        train_fraction, seed);
}

inline void write_dataset_jsonl(const fs::path& path,
                                std::span<const DatasetSample> samples) {
  std::vector<json> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(s.to_json());
  write_jsonl(path, rows);
}

// Aggregate keyword-hit counts per feature over the train split; the numbers
// gap_dict consumes.
inline std::map<std::string, double> train_feature_counts(const DatasetBuildResult& r) {
  std::map<std::string, double> counts;
  for (const auto& [cls, c] : r.oracle_train.counts) counts[cls] = c;
  return counts;
}

// Tables I/II-shaped distribution: feature,train_pct,test_pct with percent
// values. When one split is empty its column is all zero.
inline std::string distribution_csv(const FeatureProfile& train,
                                    const FeatureProfile& test) {
  std::string out = "feature,train_pct,test_pct\n";
  auto tp = train.percentages();
  auto ep = test.percentages();
  char buf[160];
  for (const auto& [cls, _] : train.counts) {
    double t = tp.count(cls) ? tp.at(cls) * 100.0 : 0.0;
    double e = ep.count(cls) ? ep.at(cls) * 100.0 : 0.0;
    std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f\n", cls.c_str(), t, e);
    out += buf;
  }
  return out;
}

}  // namespace migkit
