// Exact in-memory evaluation of bound queries. `execute` is the
// production path (hash-free but indexed probes); `execute_bruteforce`
// is an independent nested-loop oracle sharing nothing but the AST.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dpsql/catalog.hpp"
#include "dpsql/classify.hpp"
#include "dpsql/database.hpp"

namespace dpsql {

struct ExactResult {
    enum class Kind { Scalar, Histogram, Rows };
    Kind kind = Kind::Scalar;

    double scalar = 0.0;
    // Categories unique, sorted ascending by value.
    std::vector<std::pair<Value, double>> histogram;
    // Data-query output (projection columns).
    std::vector<std::string> row_columns;
    std::vector<Row> rows;
};

ExactResult execute(const ClassifiedQuery& q, const Database& db);
ExactResult execute_bruteforce(const ClassifiedQuery& q, const Database& db);

// Exact equality for counts, relative tolerance for real-valued
// aggregates; data-query rows compared as multisets.
bool results_equal(const ExactResult& a, const ExactResult& b, double rel_tol = 1e-9);

// ---- shared row pipeline (used by execute, target_user_set and the
// bounded-contribution mechanism; not by the brute-force oracle) ----

// The filtered join result: one entry per surviving output row, each a
// vector of per-slot base row indexes (slot order == ast.from order).
struct RowSet {
    std::vector<const Table*> slot_tables;
    std::vector<std::vector<uint32_t>> rows;

    Value get(size_t row, const ColumnRef& c) const;
};

RowSet materialize(const ClassifiedQuery& q, const Database& db);

// Maps base-table rows to their owning PID by following the catalog's
// resolved PID paths through the live data.
class PidResolver {
public:
    PidResolver(const Catalog& catalog, const Database& db);

    bool table_has_pid(const std::string& table) const;
    // Owner of one base row; nullopt when the chain finds no match
    // (dangling foreign key). Throws NoPidPath if the table has no path.
    std::optional<Value> pid_of(const std::string& table, const Row& row) const;

private:
    const Catalog& catalog_;
    const Database& db_;
    // join index per (table, column): value -> first matching row
    mutable std::map<std::pair<std::string, std::string>, std::map<Value, const Row*>> index_;
};

// Distinct PIDs owning at least one row that survives selection and
// joins. Requires privacy_unit = User and a PID path for every table
// the query touches (NoPidPath otherwise).
std::set<Value> target_user_set(const ClassifiedQuery& q, const Database& db, const Catalog& catalog);

} // namespace dpsql
