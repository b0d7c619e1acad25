#pragma once

#include <sys/wait.h>

#include <cstdio>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "migkit/token.hpp"

namespace migkit {

class ValidatorUnavailable : public std::runtime_error {
public:
  explicit ValidatorUnavailable(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Severity { Error, Warning };

inline const char* severity_name(Severity s) {
  return s == Severity::Error ? "error" : "warning";
}

struct SyntaxFinding {
  std::string file;
  size_t line = 1;
  Severity severity = Severity::Error;
  std::string message;
  size_t statement_index = SIZE_MAX;  // SIZE_MAX when only a line is known
};

struct StatementSpan {
  size_t first_token = 0;
  size_t token_count = 0;
  size_t first_line = 1;
  size_t last_line = 1;
  bool terminated = false;  // saw its ';' (or is a psql meta-command line)
};

namespace detail {

inline bool is_meta_command(const Token& t) {
  return t.kind == TokenKind::Keyword && !t.text.empty() && t.text.front() == '\\';
}

}  // namespace detail

// Splits a PostgreSQL script into statements at depth-0 semicolons. Dollar-
// quoted bodies are single literal tokens, so semicolons inside DO blocks and
// function bodies never split. psql meta-commands are line statements.
inline std::vector<StatementSpan> split_statements(std::span<const Token> tokens) {
  std::vector<StatementSpan> spans;
  size_t i = 0;
  while (i < tokens.size()) {
    StatementSpan span;
    span.first_token = i;
    span.first_line = tokens[i].line;
    if (detail::is_meta_command(tokens[i])) {
      size_t line = tokens[i].line;
      while (i < tokens.size() && tokens[i].line == line) ++i;
      span.token_count = i - span.first_token;
      span.last_line = line;
      span.terminated = true;
      spans.push_back(span);
      continue;
    }
    while (i < tokens.size()) {
      if (tokens[i].kind == TokenKind::Punctuation && tokens[i].text == ";") {
        ++i;
        span.terminated = true;
        break;
      }
      if (detail::is_meta_command(tokens[i]) && tokens[i].line != tokens[span.first_token].line)
        break;  // a meta-command on a new line starts its own statement
      ++i;
    }
    span.token_count = i - span.first_token;
    span.last_line = tokens[i - 1].line;
    spans.push_back(span);
  }
  return spans;
}

class Validator {
public:
  virtual ~Validator() = default;
  virtual std::vector<SyntaxFinding> validate(const std::string& file,
                                              const std::string& text) const = 0;
  virtual std::string name() const = 0;
};

using ValidatorRef = std::shared_ptr<const Validator>;

// Statement-level PostgreSQL-dialect checker for a documented subset:
//   - statements must begin with a known PostgreSQL statement keyword
//     (psql meta-commands pass);
//   - parentheses must balance inside each statement;
//   - string literals must terminate;
//   - DO / LANGUAGE plpgsql bodies must contain a balanced BEGIN...END block.
// A statement that fails yields exactly one error finding. Heuristic warnings
// flag Oracle leftovers, SQL*Plus slash terminators and a missing final ';'.
class BuiltinValidator : public Validator {
public:
  std::vector<SyntaxFinding> validate(const std::string& file,
                                      const std::string& text) const override {
    std::vector<SyntaxFinding> findings;
    auto lexed = tokenize(text, Dialect::PostgreSQL);
    auto spans = split_statements(lexed.tokens);

    for (size_t si = 0; si < spans.size(); ++si) {
      const auto& span = spans[si];
      std::span<const Token> toks(lexed.tokens.data() + span.first_token,
                                  span.token_count);
      if (toks.empty()) continue;
      bool has_error = false;
      auto error = [&](size_t line, std::string msg) {
        if (has_error) return;  // one error per failed statement
        findings.push_back({file, line, Severity::Error, std::move(msg), si});
        has_error = true;
      };
      auto warn = [&](size_t line, std::string msg) {
        findings.push_back({file, line, Severity::Warning, std::move(msg), si});
      };

      if (!detail::is_meta_command(toks[0])) {
        // statement-start keyword
        if (toks[0].kind != TokenKind::Keyword ||
            !starters().count(upper_copy(toks[0].text))) {
          error(toks[0].line, "unknown statement start '" + toks[0].text + "'");
        }
        // unterminated literals reported by the lexer inside this span
        for (const auto& issue : lexed.issues)
          if (issue.line >= span.first_line && issue.line <= span.last_line)
            error(issue.line, issue.message);
        // parenthesis balance
        long depth = 0;
        for (const auto& t : toks) {
          if (t.kind != TokenKind::Punctuation) continue;
          if (t.text == "(") ++depth;
          if (t.text == ")") --depth;
          if (depth < 0) {
            error(t.line, "unbalanced ')'");
            break;
          }
        }
        if (depth > 0) error(toks[0].line, "unclosed '('");

        check_plpgsql_body(file, toks, si, error);
        emit_warnings(toks, span, si, warn);
        if (!span.terminated && si + 1 == spans.size())
          warn(span.last_line, "missing statement terminator");
      }
    }
    return findings;
  }

  std::string name() const override { return "builtin"; }

private:
  static const std::set<std::string>& starters() {
    static const std::set<std::string> s = {
        "SELECT",  "INSERT",  "UPDATE",   "DELETE",     "CREATE",   "DROP",
        "ALTER",   "TRUNCATE", "GRANT",   "REVOKE",     "COMMENT",  "BEGIN",
        "COMMIT",  "ROLLBACK", "SAVEPOINT", "SET",      "RESET",    "SHOW",
        "DO",      "WITH",    "EXPLAIN",  "VACUUM",     "ANALYZE",  "COPY",
        "CALL",    "VALUES",  "TABLE",    "PREPARE",    "EXECUTE",  "DEALLOCATE",
        "DECLARE", "FETCH",   "CLOSE",    "MOVE",       "LOCK",     "LISTEN",
        "NOTIFY",  "UNLISTEN", "CLUSTER", "REINDEX",    "CHECKPOINT", "DISCARD",
        "REFRESH", "ABORT",   "END",      "START",      "RELEASE",  "MERGE"};
    return s;
  }

  template <typename ErrorFn>
  static void check_plpgsql_body(const std::string&, std::span<const Token> toks,
                                 size_t, ErrorFn&& error) {
    bool is_do = upper_copy(toks[0].text) == "DO";
    bool is_plpgsql = false;
    const Token* body = nullptr;
    for (size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].kind == TokenKind::Literal && !toks[i].text.empty() &&
          toks[i].text.front() == '$')
        body = &toks[i];
      if (i + 1 < toks.size() && upper_copy(toks[i].text) == "LANGUAGE" &&
          upper_copy(toks[i + 1].text) == "PLPGSQL")
        is_plpgsql = true;
    }
    if (!is_do && !is_plpgsql) return;
    if (!body) {
      error(toks[0].line, is_do ? "DO block without a dollar-quoted body"
                                : "plpgsql routine without a dollar-quoted body");
      return;
    }
    // unwrap $tag$ ... $tag$
    std::string_view raw = body->text;
    size_t open = raw.find('$', 1);
    if (open == std::string_view::npos || raw.size() < 2 * (open + 1)) return;
    std::string_view inner = raw.substr(open + 1, raw.size() - 2 * (open + 1));
    auto lexed = tokenize(inner, Dialect::PostgreSQL);
    long depth = 0;
    bool saw_begin = false, after_end = false;
    for (size_t i = 0; i < lexed.tokens.size(); ++i) {
      const Token& t = lexed.tokens[i];
      if (!detail::is_word_token(t)) {
        after_end = false;
        continue;
      }
      std::string up = upper_copy(t.text);
      if (up == "BEGIN") {
        saw_begin = true;
        ++depth;
      } else if (up == "IF" || up == "CASE" || up == "LOOP") {
        if (!after_end) ++depth;
      } else if (up == "END") {
        --depth;
        after_end = true;
        continue;
      }
      after_end = false;
    }
    if (!saw_begin)
      error(body->line, "plpgsql body has no BEGIN block");
    else if (depth != 0)
      error(body->line, "unbalanced BEGIN/END in plpgsql body");
  }

  template <typename WarnFn>
  static void emit_warnings(std::span<const Token> toks, const StatementSpan& span,
                            size_t, WarnFn&& warn) {
    static const std::set<std::string> oracle_leftovers = {
        "VARCHAR2", "SYSDATE", "NVL", "ROWNUM", "DECODE", "DUAL"};
    for (const auto& t : toks) {
      if (t.kind == TokenKind::Keyword || t.kind == TokenKind::Identifier) {
        std::string up = upper_copy(t.text);
        if (oracle_leftovers.count(up))
          warn(t.line, "Oracle construct '" + up + "' in PostgreSQL output");
      }
      if (t.kind == TokenKind::Operator && t.text == "/" && toks.size() == 1)
        warn(t.line, "SQL*Plus '/' terminator in PostgreSQL output");
    }
    (void)span;
  }
};

// Wraps an external checker command invoked per file. The command must print
// one finding per line as "severity<TAB>line<TAB>message"; its exit status is
// ignored for scoring, but a command that cannot be launched fails loudly.
class ExternalValidator : public Validator {
public:
  explicit ExternalValidator(std::string command) : command_(std::move(command)) {}

  std::vector<SyntaxFinding> validate(const std::string& file,
                                      const std::string& text) const override {
    std::string path = file;
    fs::path tmp;
    if (path.empty() || !fs::exists(path)) {
      tmp = fs::temp_directory_path() /
            ("migkit_validate_" + content_id(text) + ".sql");
      write_file(tmp, text);
      path = tmp.string();
    }
    std::string cmd = command_ + " '" + path + "' 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw ValidatorUnavailable("cannot launch validator: " + command_);
    std::string output;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
    int status = pclose(pipe);
    if (!tmp.empty()) fs::remove(tmp);
    if (WIFEXITED(status) && WEXITSTATUS(status) == 127)
      throw ValidatorUnavailable("validator command not found: " + command_);

    std::vector<SyntaxFinding> findings;
    size_t pos = 0;
    while (pos < output.size()) {
      size_t nl = output.find('\n', pos);
      std::string line =
          output.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
      pos = nl == std::string::npos ? output.size() : nl + 1;
      if (line.empty()) continue;
      size_t t1 = line.find('\t');
      size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
      if (t2 == std::string::npos) continue;  // malformed lines are skipped
      SyntaxFinding f;
      f.file = file;
      std::string sev = lower_copy(line.substr(0, t1));
      f.severity = sev == "warning" ? Severity::Warning : Severity::Error;
      try {
        f.line = std::stoul(line.substr(t1 + 1, t2 - t1 - 1));
      } catch (...) {
        continue;
      }
      f.message = line.substr(t2 + 1);
      findings.push_back(std::move(f));
    }
    return findings;
  }

  std::string name() const override { return "external:" + command_; }

private:
  std::string command_;
};

struct SerMetrics {
  double ser = 0.0;            // error statements / total statements
  double sepl = 0.0;           // error findings / line count
  double warnings_norm = 0.0;  // warning statements / total statements
  bool valid = true;
  size_t errors = 0;
  size_t warnings = 0;
  size_t statements = 0;
  size_t lines = 0;
};

// Normalized syntax-error rates for one script. Findings lacking a statement
// index (external validators report lines only) are mapped through the
// statement spans.
inline SerMetrics ser_metrics(const std::vector<SyntaxFinding>& findings,
                              const std::string& script_text) {
  SerMetrics m;
  auto lexed = tokenize(script_text, Dialect::PostgreSQL);
  auto spans = split_statements(lexed.tokens);
  m.statements = spans.size();
  m.lines = count_lines(script_text);

  auto statement_of_line = [&](size_t line) -> size_t {
    for (size_t i = 0; i < spans.size(); ++i)
      if (line >= spans[i].first_line && line <= spans[i].last_line) return i;
    return SIZE_MAX;
  };

  std::set<size_t> error_statements, warning_statements;
  for (const auto& f : findings) {
    size_t si = f.statement_index != SIZE_MAX ? f.statement_index
                                              : statement_of_line(f.line);
    if (f.severity == Severity::Error) {
      ++m.errors;
      if (si != SIZE_MAX) error_statements.insert(si);
    } else {
      ++m.warnings;
      if (si != SIZE_MAX) warning_statements.insert(si);
    }
  }
  if (m.statements > 0) {
    m.ser = static_cast<double>(error_statements.size()) / m.statements;
    m.warnings_norm = static_cast<double>(warning_statements.size()) / m.statements;
  }
  if (m.lines > 0) m.sepl = static_cast<double>(m.errors) / m.lines;
  m.valid = (m.errors == 0);
  return m;
}

}  // namespace migkit
