// In-memory relational instance: named tables of typed rows, loaded
// from tab-separated .tbl files (header row, trailing tab tolerated).
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dpsql/catalog.hpp"
#include "dpsql/value.hpp"

namespace dpsql {

using Row = std::vector<Value>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<Dtype> types;
    std::vector<Row> rows;

    int column_index(const std::string& name) const;  // -1 if absent
};

class Database {
public:
    std::map<std::string, Table> tables;

    const Table* find_table(const std::string& name) const;
    const Table& table(const std::string& name) const;  // throws UnknownTable

    size_t total_rows() const;

    // Maximum multiplicity of any single value in the column; 0 for an
    // empty table. Cached per (table, column); the engine is
    // single-threaded, so the cache is not synchronized.
    size_t max_frequency(const std::string& table, const std::string& column) const;

    // Type-checks rows against the catalog and verifies primary key
    // uniqueness. Throws on violation.
    void validate(const Catalog& cat) const;

    // Order-independent 64-bit content hash; used for sticky seeding.
    uint64_t fingerprint() const;

private:
    mutable std::map<std::pair<std::string, std::string>, size_t> freq_cache_;
};

size_t max_frequency(const Database& db, const std::string& table, const std::string& column);

Database load_database(const std::string& dir, const Catalog& cat);
void write_database(const Database& db, const std::string& dir);

} // namespace dpsql
