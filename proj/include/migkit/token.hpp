#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "migkit/io.hpp"

namespace migkit {

enum class Dialect { Oracle, PostgreSQL };

inline const char* dialect_name(Dialect d) {
  return d == Dialect::Oracle ? "oracle" : "postgresql";
}

inline Dialect dialect_from_name(std::string_view name) {
  std::string n = lower_copy(name);
  if (n == "oracle") return Dialect::Oracle;
  if (n == "postgresql" || n == "postgres" || n == "pg") return Dialect::PostgreSQL;
  throw std::invalid_argument("unknown dialect: " + std::string(name));
}

enum class TokenKind { Keyword, Identifier, Literal, Operator, Punctuation };

struct Token {
  TokenKind kind;
  std::string text;  // raw bytes of the span; quoted identifiers keep their quotes
  size_t begin = 0;  // byte offsets into the source
  size_t end = 0;
  size_t line = 1;
};

struct LexIssue {
  std::string message;
  size_t line = 1;
};

struct TokenizeResult {
  std::vector<Token> tokens;
  std::vector<LexIssue> issues;  // UnterminatedLiteral reports; lexing always completes
};

namespace detail {

// Words the lexer itself knows. The profiler matches patterns against any
// word token, so taxonomy edits do not require touching this inventory.
inline const std::unordered_set<std::string>& keyword_inventory(Dialect d) {
  static const std::unordered_set<std::string> oracle = {
      "SELECT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER", "INSERT", "INTO",
      "VALUES", "UPDATE", "SET", "DELETE", "MERGE", "USING", "CREATE", "TABLE", "VIEW",
      "INDEX", "SEQUENCE", "SYNONYM", "DROP", "TRUNCATE", "ALTER", "ADD", "MODIFY",
      "RENAME", "JOIN", "INNER", "OUTER", "LEFT", "RIGHT", "FULL", "CROSS", "ON",
      "UNION", "INTERSECT", "MINUS", "ALL", "DISTINCT", "AND", "OR", "NOT", "IN",
      "EXISTS", "BETWEEN", "LIKE", "IS", "NULL", "AS", "CASE", "WHEN", "THEN", "ELSE",
      "GRANT", "REVOKE", "COMMIT", "ROLLBACK", "SAVEPOINT", "WITH", "CONSTRAINT",
      "PRIMARY", "FOREIGN", "KEY", "REFERENCES", "UNIQUE", "CHECK", "DEFAULT",
      "VARCHAR2", "NUMBER", "DATE", "TIMESTAMP", "CHAR", "CLOB", "BLOB", "DESC", "ASC",
      "DECLARE", "BEGIN", "END", "EXCEPTION", "RAISE", "CURSOR", "LOOP", "WHILE",
      "FOR", "EXIT", "CONTINUE", "IF", "ELSIF", "PROCEDURE", "FUNCTION", "PACKAGE",
      "BODY", "TRIGGER", "RETURN", "TYPE", "ROWTYPE", "OPEN", "FETCH", "CLOSE",
      "EXECUTE", "IMMEDIATE", "OUT", "REPLACE", "TO", "OF", "SPOOL", "DEFINE",
      "UNDEFINE", "PROMPT", "ACCEPT", "COLUMN", "TTITLE", "BTITLE", "BREAK",
      "COMPUTE", "SHOW", "CONNECT", "DISCONNECT", "DESCRIBE", "WHENEVER", "SQLERROR",
      "OSERROR", "EXEC", "REM", "REMARK", "PAUSE", "HOST", "CLEAR", "SERVEROUTPUT",
      "ECHO", "FEEDBACK", "PAGESIZE", "LINESIZE", "VERIFY", "TIMING", "TERMOUT",
      "HEADING", "TRIMSPOOL", "SYSTEM", "SESSION", "DATABASE", "USER", "TABLESPACE",
      "DATAFILE", "SHUTDOWN", "STARTUP", "MOUNT", "NOMOUNT", "ARCHIVELOG",
      "NOARCHIVELOG", "PROFILE", "ROLE", "FLASHBACK", "PFILE", "SPFILE", "BACKUP",
      "RESTORE", "RECOVER", "RMAN", "CROSSCHECK", "CATALOG", "DUPLICATE", "ALLOCATE",
      "CHANNEL", "OBSOLETE", "INCREMENTAL", "BACKUPSET", "TARGET", "SYSDATE", "DUAL",
      "ROWNUM", "NVL", "DECODE"};
  static const std::unordered_set<std::string> postgres = {
      "SELECT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER", "INSERT", "INTO",
      "VALUES", "UPDATE", "SET", "DELETE", "USING", "CREATE", "TABLE", "VIEW", "INDEX",
      "SEQUENCE", "DROP", "TRUNCATE", "ALTER", "ADD", "RENAME", "JOIN", "INNER",
      "OUTER", "LEFT", "RIGHT", "FULL", "CROSS", "ON", "UNION", "INTERSECT", "EXCEPT",
      "ALL", "DISTINCT", "AND", "OR", "NOT", "IN", "EXISTS", "BETWEEN", "LIKE",
      "ILIKE", "IS", "NULL", "AS", "CASE", "WHEN", "THEN", "ELSE", "GRANT", "REVOKE",
      "COMMIT", "ROLLBACK", "SAVEPOINT", "WITH", "CONSTRAINT", "PRIMARY", "FOREIGN",
      "KEY", "REFERENCES", "UNIQUE", "CHECK", "DEFAULT", "RETURNING", "NUMERIC",
      "VARCHAR", "TEXT", "INTEGER", "BIGINT", "BOOLEAN", "SERIAL", "TIMESTAMP",
      "DATE", "COALESCE", "LIMIT", "OFFSET", "CONFLICT", "DESC", "ASC", "DECLARE",
      "BEGIN", "END", "EXCEPTION", "RAISE", "LOOP", "WHILE", "FOR", "EXIT",
      "CONTINUE", "IF", "ELSIF", "FUNCTION", "PROCEDURE", "TRIGGER", "RETURN",
      "RETURNS", "LANGUAGE", "PLPGSQL", "DO", "PERFORM", "EXECUTE", "OPEN", "FETCH",
      "CLOSE", "CURSOR", "RECORD", "ROWTYPE", "STRICT", "NOTICE", "REPLACE", "TO",
      "OF", "VACUUM", "ANALYZE", "REINDEX", "CLUSTER", "CHECKPOINT", "TABLESPACE",
      "ROLE", "USER", "DATABASE", "SYSTEM", "SESSION", "SHOW", "COPY", "CALL",
      "EXPLAIN", "COMMENT", "WORK", "TRANSACTION", "ISOLATION", "ABORT", "START",
      "PREPARE", "DEALLOCATE", "LOCK", "LISTEN", "NOTIFY", "UNLISTEN", "MOVE",
      "DISCARD", "REFRESH", "MATERIALIZED", "CONCURRENTLY", "CASCADE", "RESTRICT"};
  return d == Dialect::Oracle ? oracle : postgres;
}

inline bool is_word_token(const Token& t) {
  return t.kind == TokenKind::Keyword || t.kind == TokenKind::Identifier;
}

inline bool is_word_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

inline bool is_word_char(char c) {
  return is_word_start(c) || (c >= '0' && c <= '9') || c == '$' || c == '#';
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

// q'[...]' alternative quoting: returns the closing delimiter for an opener.
inline char q_quote_closer(char opener) {
  switch (opener) {
    case '[': return ']';
    case '{': return '}';
    case '(': return ')';
    case '<': return '>';
    default: return opener;
  }
}

}  // namespace detail

// Lexes SQL text into keyword/identifier/literal/operator/punctuation tokens.
// Comments are skipped entirely; string literals come back as single Literal
// tokens so that their content can never be mistaken for keywords. An unclosed
// quote is reported as an issue and recovery resumes at the end of that line.
inline TokenizeResult tokenize(std::string_view text, Dialect dialect) {
  TokenizeResult result;
  const auto& keywords = detail::keyword_inventory(dialect);
  size_t i = 0, line = 1;
  const size_t n = text.size();

  auto push = [&](TokenKind kind, size_t begin, size_t end) {
    result.tokens.push_back(
        {kind, std::string(text.substr(begin, end - begin)), begin, end, line});
  };
  auto advance_lines = [&](size_t begin, size_t end) {
    for (size_t j = begin; j < end; ++j)
      if (text[j] == '\n') ++line;
  };

  while (i < n) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
      ++i;
      continue;
    }
    // line comment
    if (c == '-' && i + 1 < n && text[i + 1] == '-') {
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    // block comment; PostgreSQL allows nesting
    if (c == '/' && i + 1 < n && text[i + 1] == '*') {
      size_t depth = 1;
      size_t j = i + 2;
      while (j < n && depth > 0) {
        if (text[j] == '*' && j + 1 < n && text[j + 1] == '/') {
          --depth;
          j += 2;
        } else if (dialect == Dialect::PostgreSQL && text[j] == '/' && j + 1 < n &&
                   text[j + 1] == '*') {
          ++depth;
          j += 2;
        } else {
          ++j;
        }
      }
      advance_lines(i, j);
      i = j;
      continue;
    }
    // string literal with '' escape
    if (c == '\'') {
      size_t start = i;
      size_t start_line = line;
      size_t j = i + 1;
      bool closed = false;
      while (j < n) {
        if (text[j] == '\'') {
          if (j + 1 < n && text[j + 1] == '\'') {
            j += 2;
            continue;
          }
          closed = true;
          ++j;
          break;
        }
        ++j;
      }
      if (!closed) {
        result.issues.push_back({"unterminated string literal", start_line});
        j = start;
        while (j < n && text[j] != '\n') ++j;  // recover at end of line
      }
      advance_lines(start, j);
      result.tokens.push_back({TokenKind::Literal,
                               std::string(text.substr(start, j - start)), start, j,
                               start_line});
      i = j;
      continue;
    }
    // Oracle alternative quoting q'[...]'
    if (dialect == Dialect::Oracle && (c == 'q' || c == 'Q') && i + 2 < n &&
        text[i + 1] == '\'') {
      char closer = detail::q_quote_closer(text[i + 2]);
      size_t start = i;
      size_t start_line = line;
      size_t j = i + 3;
      bool closed = false;
      while (j + 1 < n + 1 && j < n) {
        if (text[j] == closer && j + 1 < n && text[j + 1] == '\'') {
          closed = true;
          j += 2;
          break;
        }
        ++j;
      }
      if (!closed) {
        result.issues.push_back({"unterminated string literal", start_line});
        j = start;
        while (j < n && text[j] != '\n') ++j;
      }
      advance_lines(start, j);
      result.tokens.push_back({TokenKind::Literal,
                               std::string(text.substr(start, j - start)), start, j,
                               start_line});
      i = j;
      continue;
    }
    // dollar-quoted literal ($$..$$ or $tag$..$tag$), PostgreSQL only
    if (dialect == Dialect::PostgreSQL && c == '$') {
      size_t j = i + 1;
      while (j < n && detail::is_word_char(text[j]) && text[j] != '$') ++j;
      if (j < n && text[j] == '$') {
        std::string tag(text.substr(i, j - i + 1));
        size_t start = i;
        size_t start_line = line;
        size_t body = j + 1;
        size_t close = text.find(tag, body);
        size_t tok_end;
        if (close == std::string_view::npos) {
          result.issues.push_back({"unterminated dollar-quoted literal", start_line});
          tok_end = n;  // nothing to resync on; consume the rest
        } else {
          tok_end = close + tag.size();
        }
        advance_lines(start, tok_end);
        result.tokens.push_back({TokenKind::Literal,
                                 std::string(text.substr(start, tok_end - start)),
                                 start, tok_end, start_line});
        i = tok_end;
        continue;
      }
    }
    // quoted identifier; keeps its quotes so it never matches a keyword pattern
    if (c == '"') {
      size_t start = i;
      size_t start_line = line;
      size_t j = i + 1;
      bool closed = false;
      while (j < n) {
        if (text[j] == '"') {
          if (j + 1 < n && text[j + 1] == '"') {
            j += 2;
            continue;
          }
          closed = true;
          ++j;
          break;
        }
        ++j;
      }
      if (!closed) {
        result.issues.push_back({"unterminated quoted identifier", start_line});
        j = start;
        while (j < n && text[j] != '\n') ++j;
      }
      advance_lines(start, j);
      result.tokens.push_back({TokenKind::Identifier,
                               std::string(text.substr(start, j - start)), start, j,
                               start_line});
      i = j;
      continue;
    }
    // psql/SQL*Plus style backslash command: one keyword token per \word
    if (c == '\\') {
      size_t j = i + 1;
      while (j < n && (detail::is_word_char(text[j]) || text[j] == '?' || text[j] == '!' ||
                       text[j] == '+'))
        ++j;
      push(j > i + 1 ? TokenKind::Keyword : TokenKind::Operator, i, j == i + 1 ? i + 1 : j);
      i = (j == i + 1) ? i + 1 : j;
      continue;
    }
    // number literal
    if (detail::is_digit(c) ||
        (c == '.' && i + 1 < n && detail::is_digit(text[i + 1]))) {
      size_t j = i;
      while (j < n && detail::is_digit(text[j])) ++j;
      if (j < n && text[j] == '.') {
        ++j;
        while (j < n && detail::is_digit(text[j])) ++j;
      }
      if (j < n && (text[j] == 'e' || text[j] == 'E')) {
        size_t k = j + 1;
        if (k < n && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < n && detail::is_digit(text[k])) {
          j = k;
          while (j < n && detail::is_digit(text[j])) ++j;
        }
      }
      push(TokenKind::Literal, i, j);
      i = j;
      continue;
    }
    // word: keyword if in the lexer inventory, identifier otherwise
    if (detail::is_word_start(c)) {
      size_t j = i;
      while (j < n && detail::is_word_char(text[j])) ++j;
      std::string up = upper_copy(text.substr(i, j - i));
      push(keywords.count(up) ? TokenKind::Keyword : TokenKind::Identifier, i, j);
      i = j;
      continue;
    }
    // multi-char operators, longest first
    static const char* two_char_ops[] = {"<=", ">=", "<>", "!=", "||", ":=", "=>",
                                         "..", "**", "->", "::"};
    if (i + 1 < n) {
      std::string_view pair = text.substr(i, 2);
      bool matched = false;
      for (const char* op : two_char_ops) {
        if (pair == op) {
          push(TokenKind::Operator, i, i + 2);
          i += 2;
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (c == '(' || c == ')' || c == ',' || c == ';' || c == '.') {
      push(TokenKind::Punctuation, i, i + 1);
      ++i;
      continue;
    }
    push(TokenKind::Operator, i, i + 1);
    ++i;
  }
  return result;
}

}  // namespace migkit
