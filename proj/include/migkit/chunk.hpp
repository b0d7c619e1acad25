#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "migkit/profile.hpp"

namespace migkit {

class MissingChunk : public std::runtime_error {
public:
  explicit MissingChunk(size_t index)
      : std::runtime_error("missing chunk index " + std::to_string(index)) {}
};

class DuplicateChunk : public std::runtime_error {
public:
  explicit DuplicateChunk(size_t index)
      : std::runtime_error("duplicate chunk index " + std::to_string(index)) {}
};

enum class ChunkBoundary { Statement, Block, Forced };

inline const char* boundary_name(ChunkBoundary b) {
  switch (b) {
    case ChunkBoundary::Statement: return "statement";
    case ChunkBoundary::Block: return "block";
    default: return "forced";
  }
}

struct Chunk {
  std::string script_path;
  size_t index = 0;
  size_t begin = 0;  // byte span into the original script
  size_t end = 0;
  std::string text;
  FeatureProfile features;
  ChunkBoundary boundary = ChunkBoundary::Statement;

  json to_json() const {
    return json{{"script", script_path}, {"index", index},
                {"start", begin},        {"end", end},
                {"boundary_kind", boundary_name(boundary)},
                {"features", features.to_json()}};
  }
};

struct ChunkConfig {
  size_t max_chunk_bytes = 8192;
  bool statement_per_chunk = false;  // debugging aid: one statement/block per chunk
  const FeatureTaxonomy* taxonomy = nullptr;  // optional feature annotation
};

namespace detail {

struct Unit {
  size_t begin = 0;
  size_t end = 0;
  bool is_block = false;
  size_t first_token = 0;  // indexes into the script token vector
  size_t token_count = 0;
};

inline bool only_ws(std::string_view text, size_t from, size_t to) {
  for (size_t i = from; i < to; ++i) {
    char c = text[i];
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

inline bool only_ws_or_newlines(std::string_view text, size_t from, size_t to) {
  for (size_t i = from; i < to; ++i) {
    char c = text[i];
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
  }
  return true;
}

// A '/' token terminates a unit only when it sits alone on its line.
inline bool slash_on_own_line(std::string_view text, const Token& t) {
  if (t.text != "/") return false;
  size_t ls = 0;
  if (t.begin > 0) {
    size_t nl = text.rfind('\n', t.begin - 1);
    ls = nl == std::string_view::npos ? 0 : nl + 1;
  }
  if (!only_ws(text, ls, t.begin)) return false;
  size_t le = text.find('\n', t.end);
  if (le == std::string_view::npos) le = text.size();
  return only_ws(text, t.end, le);
}

// Extends a terminator position over trailing spaces and the line break, so
// that a chunk normally carries its own newline.
inline size_t extend_past_line(std::string_view text, size_t pos) {
  size_t j = pos;
  while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
  if (j < text.size() && text[j] == '\n') return j + 1;
  if (j == text.size()) return j;
  return pos;
}

// Does this unit open a PL/SQL-style block whose inner semicolons must not
// split it? Matched BEGIN...END; pairs and stored-program CREATEs qualify.
inline bool unit_opens_block(std::span<const Token> tokens, size_t i) {
  auto word_at = [&](size_t k) -> std::string {
    return k < tokens.size() && is_word_token(tokens[k]) ? upper_copy(tokens[k].text)
                                                         : std::string();
  };
  std::string first = word_at(i);
  if (first == "DECLARE") return true;
  if (first == "BEGIN") {
    // BEGIN; / BEGIN WORK; open a transaction, not a block
    if (i + 1 < tokens.size() && tokens[i + 1].text == ";") return false;
    std::string next = word_at(i + 1);
    return next != "WORK" && next != "TRANSACTION" && next != "ISOLATION";
  }
  if (first != "CREATE") return false;
  for (size_t k = i + 1; k < tokens.size() && k <= i + 5; ++k) {
    std::string w = word_at(k);
    if (w == "FUNCTION" || w == "PROCEDURE" || w == "PACKAGE" || w == "TRIGGER")
      return true;
    if (w == "TYPE") return word_at(k + 1) == "BODY";
    if (w != "OR" && w != "REPLACE" && w != "EDITIONABLE" && w != "NONEDITIONABLE")
      return false;
  }
  return false;
}

// Splits the script into statement/block units whose spans partition the
// text exactly. Inside blocks BEGIN/IF/CASE/LOOP...END nesting is tracked so
// inner semicolons do not terminate the unit; a lone '/' line always does.
inline std::vector<Unit> scan_units(std::string_view text, std::span<const Token> tokens) {
  std::vector<Unit> units;
  size_t ti = 0;
  size_t cursor = 0;

  while (cursor < text.size()) {
    if (ti >= tokens.size()) {
      // trailing trivia joins the previous unit, or forms one of its own
      if (!units.empty())
        units.back().end = text.size();
      else
        units.push_back({cursor, text.size(), false, ti, 0});
      cursor = text.size();
      break;
    }

    Unit unit;
    unit.begin = cursor;
    unit.first_token = ti;
    const bool plsql = unit_opens_block(tokens, ti);
    int depth = 0;
    bool saw_close = false;
    bool after_end = false;
    size_t term_end = std::string_view::npos;

    for (; ti < tokens.size(); ++ti) {
      const Token& t = tokens[ti];
      if (t.kind == TokenKind::Operator && slash_on_own_line(text, t)) {
        term_end = t.end;
        ++ti;
        break;
      }
      if (is_word_token(t)) {
        std::string up = upper_copy(t.text);
        if (plsql) {
          if (up == "BEGIN") {
            bool txn = (ti + 1 < tokens.size() && tokens[ti + 1].text == ";");
            if (!txn) ++depth;
          } else if (up == "IF" || up == "CASE" || up == "LOOP") {
            if (!after_end) ++depth;
          } else if (up == "END") {
            depth = std::max(0, depth - 1);
            saw_close = true;
            after_end = true;
            continue;
          }
        }
        after_end = false;
        continue;
      }
      after_end = false;
      if (t.kind == TokenKind::Literal && !t.text.empty() && t.text.front() == '$')
        saw_close = true;  // dollar-quoted routine body stands in for END
      if (t.kind == TokenKind::Punctuation && t.text == ";") {
        if (!plsql || (depth == 0 && saw_close)) {
          term_end = t.end;
          ++ti;
          break;
        }
      }
    }

    if (term_end == std::string_view::npos) {  // ran to EOF unterminated
      unit.end = text.size();
      unit.token_count = ti - unit.first_token;
      unit.is_block = plsql;
      units.push_back(unit);
      cursor = unit.end;
      break;
    }

    // absorb an immediately following lone '/' (SQL*Plus run terminator)
    if (ti < tokens.size() && tokens[ti].kind == TokenKind::Operator &&
        slash_on_own_line(text, tokens[ti]) &&
        only_ws_or_newlines(text, term_end, tokens[ti].begin)) {
      term_end = tokens[ti].end;
      ++ti;
    }

    unit.end = extend_past_line(text, term_end);
    unit.token_count = ti - unit.first_token;
    unit.is_block = plsql;
    units.push_back(unit);
    cursor = unit.end;
  }

  if (!units.empty() && units.back().end < text.size() &&
      only_ws_or_newlines(text, units.back().end, text.size()))
    units.back().end = text.size();
  return units;
}

// Break positions inside an oversized unit, in ascending order: positions
// just after inner ';' tokens (line-extended) first; token ends as fallback.
struct ForcedBreaks {
  std::vector<size_t> statement_points;
  std::vector<size_t> token_points;
};

inline ForcedBreaks collect_breaks(std::string_view text, std::span<const Token> tokens,
                                   const Unit& unit) {
  ForcedBreaks fb;
  for (size_t k = unit.first_token; k < unit.first_token + unit.token_count; ++k) {
    const Token& t = tokens[k];
    if (t.end <= unit.begin || t.end >= unit.end) continue;
    fb.token_points.push_back(t.end);
    if (t.kind == TokenKind::Punctuation && t.text == ";") {
      size_t p = std::min(extend_past_line(text, t.end), unit.end);
      fb.statement_points.push_back(p);
    }
  }
  std::sort(fb.statement_points.begin(), fb.statement_points.end());
  fb.statement_points.erase(
      std::unique(fb.statement_points.begin(), fb.statement_points.end()),
      fb.statement_points.end());
  return fb;
}

inline size_t pick_break(const std::vector<size_t>& points, size_t from, size_t limit) {
  // largest point in (from, limit], or 0 if none
  auto it = std::upper_bound(points.begin(), points.end(), limit);
  if (it == points.begin()) return 0;
  --it;
  return *it > from ? *it : 0;
}

inline size_t pick_next(const std::vector<size_t>& points, size_t from) {
  auto it = std::upper_bound(points.begin(), points.end(), from);
  return it == points.end() ? 0 : *it;
}

}  // namespace detail

// Splits a script into statement-aligned chunks no larger than
// config.max_chunk_bytes (a single oversized statement or block degrades to
// forced boundaries instead of failing). Chunk spans are contiguous and
// concatenate to exactly the original text.
inline std::vector<Chunk> chunk(const SourceScript& script, const ChunkConfig& config) {
  if (config.max_chunk_bytes < 256)
    throw std::invalid_argument("max_chunk_bytes must be at least 256");
  if (config.taxonomy && config.taxonomy->dialect != script.dialect)
    throw DialectMismatch("chunk: taxonomy dialect does not match script");

  const std::string_view text = script.text;
  auto lexed = tokenize(text, script.dialect);
  const auto& tokens = lexed.tokens;
  auto units = detail::scan_units(text, tokens);

  struct Piece {
    size_t begin, end;
    ChunkBoundary boundary;
  };
  std::vector<Piece> pieces;

  size_t open_begin = std::string_view::npos;  // current greedy chunk start
  ChunkBoundary open_kind = ChunkBoundary::Statement;
  auto flush_open = [&](size_t end) {
    if (open_begin != std::string_view::npos && end > open_begin) {
      pieces.push_back({open_begin, end, open_kind});
      open_begin = std::string_view::npos;
    }
  };

  size_t open_end = 0;
  for (const auto& unit : units) {
    size_t unit_size = unit.end - unit.begin;
    if (unit_size > config.max_chunk_bytes) {
      flush_open(open_end);
      auto breaks = detail::collect_breaks(text, tokens, unit);
      size_t pos = unit.begin;
      while (pos < unit.end) {
        if (unit.end - pos <= config.max_chunk_bytes) {
          pieces.push_back({pos, unit.end, ChunkBoundary::Forced});
          break;
        }
        size_t limit = pos + config.max_chunk_bytes;
        size_t cut = detail::pick_break(breaks.statement_points, pos, limit);
        if (!cut) cut = detail::pick_break(breaks.token_points, pos, limit);
        if (!cut) {
          cut = detail::pick_next(breaks.statement_points, pos);
          size_t tp = detail::pick_next(breaks.token_points, pos);
          if (!cut || (tp && tp < cut)) cut = tp;
          if (!cut || cut > unit.end) cut = unit.end;
        }
        pieces.push_back({pos, cut, ChunkBoundary::Forced});
        pos = cut;
      }
      continue;
    }
    ChunkBoundary kind = unit.is_block ? ChunkBoundary::Block : ChunkBoundary::Statement;
    if (config.statement_per_chunk) {
      pieces.push_back({unit.begin, unit.end, kind});
      continue;
    }
    if (open_begin == std::string_view::npos) {
      open_begin = unit.begin;
      open_end = unit.end;
      open_kind = kind;
    } else if (unit.end - open_begin <= config.max_chunk_bytes) {
      open_end = unit.end;
      open_kind = kind;
    } else {
      flush_open(open_end);
      open_begin = unit.begin;
      open_end = unit.end;
      open_kind = kind;
    }
  }
  flush_open(open_end);

  const bool rman_mode = detail::detect_rman_mode(tokens);
  std::vector<Chunk> chunks;
  chunks.reserve(pieces.size());
  size_t tok_cursor = 0;
  for (size_t i = 0; i < pieces.size(); ++i) {
    Chunk c;
    c.script_path = script.path;
    c.index = i;
    c.begin = pieces[i].begin;
    c.end = pieces[i].end;
    c.text = std::string(text.substr(c.begin, c.end - c.begin));
    c.boundary = pieces[i].boundary;
    if (config.taxonomy) {
      while (tok_cursor < tokens.size() && tokens[tok_cursor].begin < c.begin) ++tok_cursor;
      size_t tok_end = tok_cursor;
      while (tok_end < tokens.size() && tokens[tok_end].end <= c.end) ++tok_end;
      c.features = profile_tokens(
          std::span<const Token>(tokens.data() + tok_cursor, tok_end - tok_cursor),
          *config.taxonomy, rman_mode);
      tok_cursor = tok_end;
    }
    chunks.push_back(std::move(c));
  }
  return chunks;
}

// Minimal view of a translated chunk for re-assembly.
struct ChunkOutput {
  std::string script_path;
  size_t index = 0;
  std::string text;
};

// Joins translated chunk texts in index order. A newline separator is only
// inserted when the preceding text does not already end with one, so chunk
// streams that carry their own line breaks reassemble byte-exactly.
inline std::string assemble(std::span<const ChunkOutput> chunks) {
  if (chunks.empty()) return {};
  for (const auto& c : chunks)
    if (c.script_path != chunks.front().script_path)
      throw std::invalid_argument("assemble: chunks from different scripts");
  std::vector<const ChunkOutput*> ordered(chunks.size(), nullptr);
  for (const auto& c : chunks) {
    if (c.index < chunks.size() && ordered[c.index]) throw DuplicateChunk(c.index);
    if (c.index < chunks.size()) ordered[c.index] = &c;
  }
  for (size_t i = 0; i < ordered.size(); ++i)
    if (!ordered[i]) throw MissingChunk(i);  // covers gaps and out-of-range indexes

  std::string out;
  for (size_t i = 0; i < ordered.size(); ++i) {
    if (i > 0 && !out.empty() && out.back() != '\n') out += '\n';
    out += ordered[i]->text;
  }
  return out;
}

inline void dump_chunks_jsonl(const fs::path& path, std::span<const Chunk> chunks) {
  std::vector<json> rows;
  rows.reserve(chunks.size());
  for (const auto& c : chunks) rows.push_back(c.to_json());
  write_jsonl(path, rows);
}

}  // namespace migkit
