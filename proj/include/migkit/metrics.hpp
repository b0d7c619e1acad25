#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "migkit/token.hpp"

namespace migkit {

// Lexical basis shared by all text metrics: the SQL tokenizer with keyword
// tokens case-folded to upper, everything else (identifiers, literals,
// operators) taken verbatim.
inline std::vector<std::string> metric_tokens(std::string_view text,
                                              Dialect dialect = Dialect::PostgreSQL) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(text, dialect).tokens)
    out.push_back(t.kind == TokenKind::Keyword ? upper_copy(t.text) : t.text);
  return out;
}

namespace detail {

inline std::map<std::string, size_t> count_multiset(const std::vector<std::string>& v) {
  std::map<std::string, size_t> m;
  for (const auto& s : v) ++m[s];
  return m;
}

inline std::map<std::string, size_t> ngram_counts(const std::vector<std::string>& toks,
                                                  size_t n) {
  std::map<std::string, size_t> m;
  if (toks.size() < n) return m;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key;
    for (size_t j = 0; j < n; ++j) {
      key += toks[i + j];
      key += '\x1f';
    }
    ++m[key];
  }
  return m;
}

inline size_t clipped_matches(const std::map<std::string, size_t>& cand,
                              const std::map<std::string, size_t>& ref) {
  size_t matches = 0;
  for (const auto& [gram, c] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) matches += std::min(c, it->second);
  }
  return matches;
}

inline std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool ws = false;
  for (char raw : text) {
    char c = raw;
    if (c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') c = ' ';
    if (c == ' ') {
      if (ws) continue;
      ws = true;
    } else {
      ws = false;
    }
    out += c;
  }
  while (!out.empty() && out.front() == ' ') out.erase(out.begin());
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

inline std::map<std::string, size_t> char_ngrams(const std::string& s, size_t n) {
  std::map<std::string, size_t> m;
  if (s.size() < n) return m;
  for (size_t i = 0; i + n <= s.size(); ++i) ++m[s.substr(i, n)];
  return m;
}

}  // namespace detail

// |multiset intersection| / |reference tokens|. An empty reference scores 1.0
// against an empty candidate and 0.0 against anything else.
inline double token_recall(std::string_view candidate, std::string_view reference,
                           Dialect dialect = Dialect::PostgreSQL) {
  auto cand = detail::count_multiset(metric_tokens(candidate, dialect));
  auto ref_tokens = metric_tokens(reference, dialect);
  if (ref_tokens.empty()) return cand.empty() ? 1.0 : 0.0;
  auto ref = detail::count_multiset(ref_tokens);
  size_t inter = detail::clipped_matches(cand, ref);
  return static_cast<double>(inter) / static_cast<double>(ref_tokens.size());
}

// BLEU over SQL tokens: modified n-gram precision up to n=4, uniform weights,
// brevity penalty, add-one smoothing on orders 2..4 so that short chunks do
// not zero out. Identity pairs score exactly 1.0.
inline double bleu(std::string_view candidate, std::string_view reference,
                   Dialect dialect = Dialect::PostgreSQL) {
  auto cand = metric_tokens(candidate, dialect);
  auto ref = metric_tokens(reference, dialect);
  if (cand.empty()) return ref.empty() ? 1.0 : 0.0;
  if (ref.empty()) return 0.0;

  double product = 1.0;
  for (size_t n = 1; n <= 4; ++n) {
    auto cgrams = detail::ngram_counts(cand, n);
    auto rgrams = detail::ngram_counts(ref, n);
    size_t total = cand.size() >= n ? cand.size() - n + 1 : 0;
    size_t matches = detail::clipped_matches(cgrams, rgrams);
    double p;
    if (n == 1) {
      if (matches == 0) return 0.0;
      p = static_cast<double>(matches) / static_cast<double>(total);
    } else {
      p = static_cast<double>(matches + 1) / static_cast<double>(total + 1);
    }
    product *= p;
  }
  double bp = 1.0;
  if (cand.size() < ref.size())
    bp = std::exp(1.0 - static_cast<double>(ref.size()) / cand.size());
  return bp * std::pow(product, 0.25);
}

// Character n-gram F-score, orders 1..6 averaged, beta = 2 (recall-weighted),
// with whitespace runs collapsed first. Orders where neither side has grams
// are skipped so short identical strings still score 1.0.
inline double chrf(std::string_view candidate, std::string_view reference) {
  const std::string cand = detail::collapse_whitespace(candidate);
  const std::string ref = detail::collapse_whitespace(reference);
  constexpr double beta_sq = 4.0;
  double f_sum = 0.0;
  size_t orders = 0;
  for (size_t n = 1; n <= 6; ++n) {
    auto cg = detail::char_ngrams(cand, n);
    auto rg = detail::char_ngrams(ref, n);
    size_t ctotal = cand.size() >= n ? cand.size() - n + 1 : 0;
    size_t rtotal = ref.size() >= n ? ref.size() - n + 1 : 0;
    if (ctotal == 0 && rtotal == 0) continue;
    ++orders;
    size_t matches = detail::clipped_matches(cg, rg);
    double precision = ctotal ? static_cast<double>(matches) / ctotal : 0.0;
    double recall = rtotal ? static_cast<double>(matches) / rtotal : 0.0;
    if (precision + recall == 0.0) continue;  // F stays 0 for this order
    f_sum += (1.0 + beta_sq) * precision * recall / (beta_sq * precision + recall);
  }
  if (orders == 0) return 1.0;  // both sides empty
  return f_sum / static_cast<double>(orders);
}

}  // namespace migkit
