#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "migkit/token.hpp"

namespace migkit {

class TaxonomyError : public std::runtime_error {
public:
  explicit TaxonomyError(const std::string& msg) : std::runtime_error(msg) {}
};

// A keyword pattern is one or more words matched case-insensitively against
// consecutive word tokens ("ALTER SYSTEM" counts as a single hit).
struct KeywordPattern {
  std::vector<std::string> words;  // upper-cased

  std::string display() const {
    std::string out;
    for (size_t i = 0; i < words.size(); ++i) {
      if (i) out += ' ';
      out += words[i];
    }
    return out;
  }
};

struct FeatureClass {
  std::string name;
  std::vector<KeywordPattern> keyword_patterns;
  double target_quality = 0.85;
  bool rman_mode_only = false;  // active only when the script profiles as RMAN
};

struct FeatureTaxonomy {
  Dialect dialect = Dialect::Oracle;
  int version = 1;
  std::vector<FeatureClass> classes;

  const FeatureClass* find(const std::string& name) const {
    for (const auto& c : classes)
      if (c.name == name) return &c;
    return nullptr;
  }
  std::vector<std::string> class_names() const {
    std::vector<std::string> names;
    names.reserve(classes.size());
    for (const auto& c : classes) names.push_back(c.name);
    return names;
  }
};

namespace detail {

inline KeywordPattern parse_pattern(std::string_view line) {
  KeywordPattern p;
  std::istringstream in{std::string(line)};
  std::string w;
  while (in >> w) p.words.push_back(upper_copy(w));
  return p;
}

}  // namespace detail

// Parses the versioned taxonomy text format:
//
//   version 1
//   dialect oracle
//   [CLASS_NAME]
//   target_quality 0.85
//   mode rman            (optional)
//   KEYWORD
//   MULTI WORD KEYWORD
//
// '#' starts a comment line. Duplicate patterns across classes fail validation.
inline FeatureTaxonomy parse_taxonomy(std::string_view text) {
  FeatureTaxonomy tax;
  FeatureClass* current = nullptr;
  bool dialect_seen = false;
  size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
      line.pop_back();
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    line = line.substr(first);

    if (line.front() == '[') {
      auto close = line.find(']');
      if (close == std::string::npos)
        throw TaxonomyError("line " + std::to_string(lineno) + ": unclosed class header");
      tax.classes.push_back({});
      current = &tax.classes.back();
      current->name = upper_copy(std::string_view(line).substr(1, close - 1));
      if (current->name.empty())
        throw TaxonomyError("line " + std::to_string(lineno) + ": empty class name");
      continue;
    }
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    std::string head_low = lower_copy(head);
    if (!current) {
      if (head_low == "version") {
        ls >> tax.version;
      } else if (head_low == "dialect") {
        std::string d;
        ls >> d;
        tax.dialect = dialect_from_name(d);
        dialect_seen = true;
      } else {
        throw TaxonomyError("line " + std::to_string(lineno) +
                            ": expected version/dialect before first class");
      }
      continue;
    }
    if (head_low == "target_quality") {
      double q = -1;
      ls >> q;
      if (!(q >= 0.0 && q <= 1.0))
        throw TaxonomyError("line " + std::to_string(lineno) +
                            ": target_quality must be in [0,1]");
      current->target_quality = q;
      continue;
    }
    if (head_low == "mode") {
      std::string m;
      ls >> m;
      current->rman_mode_only = (lower_copy(m) == "rman");
      continue;
    }
    current->keyword_patterns.push_back(detail::parse_pattern(line));
  }
  if (!dialect_seen) throw TaxonomyError("taxonomy is missing a dialect line");
  if (tax.classes.empty()) throw TaxonomyError("taxonomy defines no classes");

  // validate: non-empty pattern lists, patterns disjoint across classes
  std::map<std::string, std::string> owner;
  for (const auto& cls : tax.classes) {
    if (cls.keyword_patterns.empty())
      throw TaxonomyError("class " + cls.name + " has no keyword patterns");
    for (const auto& p : cls.keyword_patterns) {
      auto [it, inserted] = owner.emplace(p.display(), cls.name);
      if (!inserted)
        throw TaxonomyError("pattern '" + p.display() + "' appears in both " +
                            it->second + " and " + cls.name);
    }
  }
  return tax;
}

inline FeatureTaxonomy load_taxonomy(const fs::path& path) {
  return parse_taxonomy(read_file(path));
}

// ---------------------------------------------------------------------------
// Default taxonomies. These are data, not code: the same text format the file
// loader reads, so a corrected copy on disk can replace them without a rebuild.
// ---------------------------------------------------------------------------

inline const char* default_oracle_taxonomy_text() {
  return R"(# Oracle feature taxonomy
version 1
dialect oracle

[CORE_SQL]
target_quality 0.85
SELECT
FROM
WHERE
GROUP BY
ORDER BY
HAVING
INSERT
INTO
VALUES
UPDATE
SET
DELETE
MERGE
CREATE
TABLE
VIEW
INDEX
SEQUENCE
SYNONYM
DROP
TRUNCATE
ALTER
JOIN
INNER
OUTER
LEFT
RIGHT
FULL
CROSS
ON
UNION
INTERSECT
MINUS
DISTINCT
AND
OR
NOT
IN
EXISTS
BETWEEN
LIKE
IS
NULL
AS
CASE
WHEN
THEN
ELSE
GRANT
REVOKE
COMMIT
ROLLBACK
SAVEPOINT
WITH
CONSTRAINT
PRIMARY KEY
FOREIGN KEY
REFERENCES
UNIQUE
DEFAULT
VARCHAR2
NUMBER
DATE
TIMESTAMP
CHAR
CLOB
BLOB
NVL
DECODE
SYSDATE
DUAL
ROWNUM
FOR UPDATE

[PL_SQL]
target_quality 0.85
DECLARE
BEGIN
END
EXCEPTION
RAISE
CURSOR
LOOP
WHILE
FOR
EXIT
ELSIF
IF
PROCEDURE
FUNCTION
PACKAGE
BODY
TRIGGER
RETURN
TYPE
ROWTYPE
OPEN
FETCH
CLOSE
EXECUTE IMMEDIATE
RAISE_APPLICATION_ERROR
DBMS_OUTPUT
PRAGMA

[SQL_PLUS]
target_quality 0.85
SPOOL
DEFINE
UNDEFINE
PROMPT
ACCEPT
TTITLE
BTITLE
BREAK ON
COMPUTE SUM
SHOW
CONNECT
DISCONNECT
DESCRIBE
WHENEVER SQLERROR
WHENEVER OSERROR
EXEC
PAUSE
HOST
SET SERVEROUTPUT
SET ECHO
SET FEEDBACK
SET PAGESIZE
SET LINESIZE
SET VERIFY
SET TIMING
SET TERMOUT
SET HEADING
SET TRIMSPOOL
SET DEFINE
SET LONG

[DATABASE_MANAGEMENT]
target_quality 0.85
ALTER SYSTEM
ALTER SESSION
ALTER DATABASE
ALTER USER
ALTER TABLESPACE
CREATE TABLESPACE
CREATE USER
CREATE PROFILE
CREATE ROLE
DROP TABLESPACE
DROP USER
TABLESPACE
DATAFILE
SHUTDOWN
STARTUP
MOUNT
NOMOUNT
ARCHIVELOG
NOARCHIVELOG
FLASHBACK
PFILE
SPFILE
V$SESSION
V$DATABASE
V$INSTANCE
DBA_USERS
DBA_TABLES
DBA_OBJECTS
SGA_TARGET
PGA_AGGREGATE_TARGET

# RMAN verbs are gated on RMAN file mode so that e.g. ALTER DATABASE BEGIN
# BACKUP in a management script does not count as an RMAN hit.
[RMAN]
target_quality 0.85
mode rman
RMAN
BACKUP
RESTORE
RECOVER
CROSSCHECK
CATALOG
DUPLICATE
ALLOCATE CHANNEL
DELETE OBSOLETE
BACKUPSET
INCREMENTAL
)";
}

inline const char* default_postgres_taxonomy_text() {
  return R"(# PostgreSQL feature taxonomy
version 1
dialect postgresql

[CORE_SQL]
target_quality 0.85
SELECT
FROM
WHERE
GROUP BY
ORDER BY
HAVING
INSERT
INTO
VALUES
UPDATE
SET
DELETE
CREATE
TABLE
VIEW
INDEX
SEQUENCE
DROP
TRUNCATE
ALTER
JOIN
INNER
OUTER
LEFT
RIGHT
FULL
CROSS
ON
UNION
INTERSECT
EXCEPT
DISTINCT
AND
OR
NOT
IN
EXISTS
BETWEEN
LIKE
ILIKE
IS
NULL
AS
CASE
WHEN
THEN
ELSE
GRANT
REVOKE
COMMIT
ROLLBACK
SAVEPOINT
WITH
CONSTRAINT
PRIMARY KEY
FOREIGN KEY
REFERENCES
UNIQUE
DEFAULT
RETURNING
NUMERIC
VARCHAR
TEXT
INTEGER
BIGINT
BOOLEAN
SERIAL
TIMESTAMP
DATE
COALESCE
LIMIT
OFFSET
ON CONFLICT

[PL_PG_SQL]
target_quality 0.85
DECLARE
BEGIN
END
EXCEPTION
RAISE
LOOP
WHILE
FOR
EXIT
ELSIF
IF
FUNCTION
PROCEDURE
TRIGGER
RETURN
RETURNS
LANGUAGE
PLPGSQL
DO
PERFORM
EXECUTE
OPEN
FETCH
CLOSE
CURSOR
RECORD
ROWTYPE
STRICT

[DATABASE_MANAGEMENT]
target_quality 0.85
ALTER SYSTEM
ALTER ROLE
ALTER DATABASE
ALTER USER
CREATE ROLE
CREATE USER
CREATE DATABASE
DROP DATABASE
CREATE TABLESPACE
TABLESPACE
VACUUM
ANALYZE
REINDEX
CLUSTER
CHECKPOINT
SHOW
PG_CATALOG
PG_STAT_ACTIVITY
PG_SETTINGS
PG_TABLES
PG_DATABASE
INFORMATION_SCHEMA
SHARED_BUFFERS
WORK_MEM
MAINTENANCE_WORK_MEM
MAX_CONNECTIONS

[PSQL]
target_quality 0.85
\C
\CONNECT
\D
\DT
\DI
\DV
\DF
\DN
\DU
\L
\I
\O
\ECHO
\SET
\TIMING
\COPY
\Q
\PSET
\X
\ENCODING
)";
}

inline const FeatureTaxonomy& default_taxonomy(Dialect d) {
  static const FeatureTaxonomy oracle = parse_taxonomy(default_oracle_taxonomy_text());
  static const FeatureTaxonomy postgres = parse_taxonomy(default_postgres_taxonomy_text());
  return d == Dialect::Oracle ? oracle : postgres;
}

// ---------------------------------------------------------------------------
// Class-to-class mapping used to predict the PostgreSQL feature mix an Oracle
// profile should turn into. Weights per source class must sum to 1.
// ---------------------------------------------------------------------------

class UnmappedClass : public std::runtime_error {
public:
  explicit UnmappedClass(const std::string& cls)
      : std::runtime_error("no mapping row for class " + cls), class_name(cls) {}
  std::string class_name;
};

struct FeatureMapping {
  // source class -> {target class -> weight}
  std::map<std::string, std::map<std::string, double>> rows;

  void validate() const {
    for (const auto& [src, targets] : rows) {
      double sum = 0;
      for (const auto& [_, w] : targets) sum += w;
      if (std::abs(sum - 1.0) > 1e-9)
        throw TaxonomyError("mapping weights for " + src + " sum to " +
                            std::to_string(sum) + ", expected 1");
    }
  }
};

inline const FeatureMapping& default_feature_mapping() {
  static const FeatureMapping m = [] {
    FeatureMapping map;
    map.rows["CORE_SQL"] = {{"CORE_SQL", 1.0}};
    map.rows["PL_SQL"] = {{"PL_PG_SQL", 1.0}};
    map.rows["SQL_PLUS"] = {{"PSQL", 1.0}};
    map.rows["DATABASE_MANAGEMENT"] = {{"DATABASE_MANAGEMENT", 1.0}};
    map.rows["RMAN"] = {{"DATABASE_MANAGEMENT", 1.0}};
    map.validate();
    return map;
  }();
  return m;
}

}  // namespace migkit
