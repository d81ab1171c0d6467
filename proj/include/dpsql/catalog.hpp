// Schemas plus all privacy metadata the mechanisms need: privacy unit,
// PID annotations, clipping ranges, enumerated domains.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpsql/error.hpp"
#include "dpsql/value.hpp"

namespace dpsql {

enum class PrivacyUnit { Tuple, User };

struct ColumnMeta {
    std::string name;
    Dtype dtype = Dtype::Int;
    std::optional<std::pair<Value, Value>> range;  // [lo, hi], numeric or date
    std::vector<Value> domain;                     // enumerated categories; empty = none

    bool has_domain() const { return !domain.empty(); }
};

struct ForeignKey {
    std::string local_column;
    std::string remote_table;
    std::string remote_column;
};

struct TableMeta {
    std::string name;
    std::vector<ColumnMeta> columns;
    std::vector<std::string> primary_key;
    std::vector<ForeignKey> foreign_keys;
    std::optional<std::string> pid_column;
    std::optional<int64_t> max_user_contribution;  // bound C on rows per user

    const ColumnMeta* find_column(const std::string& name) const;
    int column_index(const std::string& name) const;  // -1 if absent
};

// One hop on the path from a table to its PID ancestor.
struct PidStep {
    std::string local_column;
    std::string remote_table;
    std::string remote_column;
};

// How a table's rows map to a personal identifier: either a direct
// pid column, or a chain of foreign-key hops ending at one.
struct PidPath {
    std::vector<PidStep> hops;   // empty when the pid column is local
    std::string pid_table;
    std::string pid_column;
};

class Catalog {
public:
    PrivacyUnit privacy_unit = PrivacyUnit::Tuple;
    std::map<std::string, TableMeta> tables;

    const TableMeta* find_table(const std::string& name) const;
    const TableMeta& table(const std::string& name) const;  // throws UnknownTable

    // Resolved PID path for a table, if any. Populated by validate();
    // absence means the table is treated as public at user level.
    const PidPath* pid_path(const std::string& table) const;

    // Checks all structural invariants and resolves PID paths.
    // Throws CatalogError on violation.
    void validate();

private:
    std::map<std::string, PidPath> pid_paths_;
};

Catalog parse_catalog(const std::string& text);
Catalog load_catalog(const std::string& path);
std::string serialize_catalog(const Catalog& cat);

} // namespace dpsql
