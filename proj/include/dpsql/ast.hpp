// Parsed SPJA query representation and the deterministic SQL renderer.
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dpsql/value.hpp"

namespace dpsql {

// Column reference as written; `qualifier` is the table name or alias
// if the reference was qualified. `slot` is filled by the binder and
// indexes into QueryAst::from.
struct ColumnRef {
    std::string qualifier;
    std::string column;
    int slot = -1;

    bool operator==(const ColumnRef& o) const {
        return qualifier == o.qualifier && column == o.column;
    }
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string cmp_op_text(CmpOp op);

// One side of a comparison: a column or a literal.
using Operand = std::variant<ColumnRef, Value>;

struct Comparison {
    Operand lhs;
    CmpOp op = CmpOp::Eq;
    Operand rhs;
};

// Conjunctions/disjunctions of comparisons.
struct Predicate {
    enum class Kind { Cmp, And, Or };
    Kind kind = Kind::Cmp;
    Comparison cmp;                    // when kind == Cmp
    std::vector<Predicate> children;   // when kind == And/Or
};

enum class AggFunc { Count, CountDistinct, Sum, Avg, Min, Max };

std::string agg_func_name(AggFunc f);

struct AggregateCall {
    AggFunc func = AggFunc::Count;
    std::optional<ColumnRef> argument;  // nullopt only for COUNT(*)
};

struct Projection {
    std::variant<ColumnRef, AggregateCall> expr;
    std::string alias;  // empty if none

    bool is_aggregate() const { return std::holds_alternative<AggregateCall>(expr); }
};

struct TableRef {
    std::string table;
    std::string alias;  // equals table when not aliased

    const std::string& binding_name() const { return alias.empty() ? table : alias; }
};

// Inner equi-join condition between two column refs. Comma-FROM with a
// WHERE equality is normalized into the same form by the binder.
struct JoinSpec {
    ColumnRef left;
    ColumnRef right;
    // Index of the FROM entry whose JOIN ... ON clause carried this
    // condition; -1 when the binder lifted it out of the WHERE clause.
    int on_table = -1;
};

struct QueryAst {
    std::vector<Projection> projections;
    std::vector<TableRef> from;
    std::vector<JoinSpec> joins;
    std::optional<Predicate> where;
    std::vector<ColumnRef> group_by;

    bool has_aggregate() const;
    const AggregateCall* aggregate() const;  // nullptr when none
    bool has_joins() const { return from.size() > 1; }
};

bool ast_equal(const QueryAst& a, const QueryAst& b);

// Deterministic SQL text for a (possibly bound) AST. With `qualify`,
// every column is emitted as binding_name.column; used for query
// fingerprints.
std::string render(const QueryAst& ast, bool qualify = false);

} // namespace dpsql
