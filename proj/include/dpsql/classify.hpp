// Name resolution and query taxonomy: scalar aggregate, finite-domain
// histogram, open-domain histogram, or data query.
#pragma once

#include <string>

#include "dpsql/ast.hpp"
#include "dpsql/catalog.hpp"

namespace dpsql {

struct QueryClass {
    enum class Kind { ScalarAggregate, HistogramFinite, HistogramInfinite, DataQuery, Unsupported };
    Kind kind = Kind::Unsupported;
    std::string reason;  // set when kind == Unsupported

    bool is_histogram() const {
        return kind == Kind::HistogramFinite || kind == Kind::HistogramInfinite;
    }
};

std::string query_class_name(const QueryClass& c);

// A bound, normalized query: every column ref carries its slot, date
// and numeric literals are coerced to the column type, and WHERE
// equalities between tables are lifted into the join list.
struct ClassifiedQuery {
    QueryAst ast;
    QueryClass cls;
};

ClassifiedQuery classify(const QueryAst& ast, const Catalog& catalog);

} // namespace dpsql
