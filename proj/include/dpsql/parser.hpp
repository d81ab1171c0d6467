#pragma once

#include <string>

#include "dpsql/ast.hpp"
#include "dpsql/error.hpp"

namespace dpsql {

// Parses the supported SPJA subset into a QueryAst. Unsupported syntax
// (subqueries, set operations, window functions, HAVING, non-equi ON
// conditions, multiple aggregates, ...) raises UnsupportedFeature;
// malformed input raises SyntaxError. The grammar is documented in
// docs/sql-grammar.md.
QueryAst parse(const std::string& sql_text);

} // namespace dpsql
