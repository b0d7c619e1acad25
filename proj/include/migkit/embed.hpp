#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "migkit/io.hpp"

namespace migkit {

class EmbedderUnavailable : public std::runtime_error {
public:
  explicit EmbedderUnavailable(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmbeddingVector {
  std::vector<float> values;
  size_t dim = 0;
  std::string embedder_id;
};

inline double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

class Embedder {
public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::string id() const = 0;
  virtual size_t dim() const = 0;
  virtual json to_json() const = 0;
};

using EmbedderRef = std::shared_ptr<const Embedder>;

// Character-trigram hashed TF-IDF embedder. Inverse document frequencies come
// from the fitted corpus, so vectors are bit-reproducible for fixed corpus
// statistics; an unfitted embedder degrades to plain hashed TF.
class TrigramEmbedder : public Embedder {
public:
  static constexpr size_t kDefaultDim = 1024;

  explicit TrigramEmbedder(size_t dim = kDefaultDim)
      : dim_(dim), doc_count_(0), doc_freq_(dim, 0) {}

  static TrigramEmbedder fit(std::span<const std::string> corpus,
                             size_t dim = kDefaultDim) {
    TrigramEmbedder e(dim);
    std::vector<uint8_t> seen(dim);
    for (const auto& doc : corpus) {
      std::fill(seen.begin(), seen.end(), 0);
      for_each_bucket(doc, dim, [&](size_t b) { seen[b] = 1; });
      for (size_t b = 0; b < dim; ++b)
        if (seen[b]) ++e.doc_freq_[b];
      ++e.doc_count_;
    }
    return e;
  }

  EmbeddingVector embed(std::string_view text) const override {
    EmbeddingVector v;
    v.dim = dim_;
    v.embedder_id = id();
    v.values.assign(dim_, 0.0f);
    std::vector<double> acc(dim_, 0.0);
    for_each_bucket(text, dim_, [&](size_t b) { acc[b] += 1.0; });
    double norm_sq = 0;
    for (size_t b = 0; b < dim_; ++b) {
      if (acc[b] == 0) continue;
      acc[b] *= idf(b);
      norm_sq += acc[b] * acc[b];
    }
    if (norm_sq > 0) {
      double inv = 1.0 / std::sqrt(norm_sq);
      for (size_t b = 0; b < dim_; ++b)
        v.values[b] = static_cast<float>(acc[b] * inv);
    }
    return v;
  }

  std::string id() const override {
    std::string stats;
    stats.reserve(doc_freq_.size() * 4 + 8);
    stats += std::to_string(doc_count_);
    for (auto df : doc_freq_) {
      stats += ',';
      stats += std::to_string(df);
    }
    return "trigram-tfidf-" + std::to_string(dim_) + ":" + content_id(stats);
  }

  size_t dim() const override { return dim_; }

  json to_json() const override {
    return json{{"kind", "trigram-tfidf"},
                {"dim", dim_},
                {"doc_count", doc_count_},
                {"doc_freq", doc_freq_}};
  }

  static TrigramEmbedder from_json(const json& j) {
    TrigramEmbedder e(j.at("dim").get<size_t>());
    e.doc_count_ = j.at("doc_count").get<uint64_t>();
    e.doc_freq_ = j.at("doc_freq").get<std::vector<uint64_t>>();
    if (e.doc_freq_.size() != e.dim_)
      throw IoError("embedder stats dimension mismatch");
    return e;
  }

private:
  double idf(size_t bucket) const {
    if (doc_count_ == 0) return 1.0;
    return std::log(1.0 + static_cast<double>(doc_count_) / (1.0 + doc_freq_[bucket]));
  }

  // lowercases, collapses whitespace runs, then hashes every 3-char window;
  // texts shorter than 3 chars contribute their whole normalized form
  template <typename Fn>
  static void for_each_bucket(std::string_view text, size_t dim, Fn&& fn) {
    std::string norm;
    norm.reserve(text.size());
    bool in_ws = false;
    for (char raw : text) {
      char c = raw;
      if (c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') c = ' ';
      if (c == ' ') {
        if (in_ws) continue;
        in_ws = true;
      } else {
        in_ws = false;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      norm += c;
    }
    while (!norm.empty() && norm.front() == ' ') norm.erase(norm.begin());
    while (!norm.empty() && norm.back() == ' ') norm.pop_back();
    if (norm.empty()) return;
    if (norm.size() < 3) {
      fn(fnv1a64(norm) % dim);
      return;
    }
    for (size_t i = 0; i + 3 <= norm.size(); ++i)
      fn(fnv1a64(std::string_view(norm).substr(i, 3)) % dim);
  }

  size_t dim_;
  uint64_t doc_count_;
  std::vector<uint64_t> doc_freq_;
};

inline EmbedderRef make_trigram_embedder(std::span<const std::string> corpus,
                                         size_t dim = TrigramEmbedder::kDefaultDim) {
  return std::make_shared<TrigramEmbedder>(TrigramEmbedder::fit(corpus, dim));
}

}  // namespace migkit
