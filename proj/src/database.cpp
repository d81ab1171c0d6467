#include "dpsql/database.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dpsql/rng.hpp"

namespace fs = std::filesystem;

namespace dpsql {

int Table::column_index(const std::string& n) const {
    for (size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == n) return static_cast<int>(i);
    }
    return -1;
}

const Table* Database::find_table(const std::string& name) const {
    auto it = tables.find(name);
    return it == tables.end() ? nullptr : &it->second;
}

const Table& Database::table(const std::string& name) const {
    const Table* t = find_table(name);
    if (!t) throw BindError(BindErrorKind::UnknownTable, "unknown table: " + name);
    return *t;
}

size_t Database::total_rows() const {
    size_t n = 0;
    for (const auto& [_, t] : tables) n += t.rows.size();
    return n;
}

size_t Database::max_frequency(const std::string& tname, const std::string& column) const {
    auto key = std::make_pair(tname, column);
    auto cached = freq_cache_.find(key);
    if (cached != freq_cache_.end()) return cached->second;

    const Table& t = table(tname);
    int ci = t.column_index(column);
    if (ci < 0) throw BindError(BindErrorKind::UnknownColumn, "unknown column: " + tname + "." + column);

    std::map<Value, size_t> counts;
    size_t best = 0;
    for (const auto& row : t.rows) {
        size_t c = ++counts[row[ci]];
        if (c > best) best = c;
    }
    freq_cache_[key] = best;
    return best;
}

size_t max_frequency(const Database& db, const std::string& table, const std::string& column) {
    return db.max_frequency(table, column);
}

void Database::validate(const Catalog& cat) const {
    for (const auto& [name, t] : tables) {
        const TableMeta& tm = cat.table(name);
        if (t.columns.size() != tm.columns.size())
            throw Error("table " + name + ": column count does not match catalog");
        for (size_t i = 0; i < t.columns.size(); ++i) {
            if (t.columns[i] != tm.columns[i].name)
                throw Error("table " + name + ": column " + t.columns[i] + " does not match catalog");
        }
        for (const auto& row : t.rows) {
            if (row.size() != t.columns.size()) throw Error("table " + name + ": ragged row");
            for (size_t i = 0; i < row.size(); ++i) {
                Dtype expect = tm.columns[i].dtype;
                Dtype got = row[i].type();
                if (got != expect)
                    throw ExecError(ExecErrorKind::TypeMismatch,
                                    "table " + name + "." + t.columns[i] + ": expected " +
                                        dtype_name(expect) + ", got " + dtype_name(got));
            }
        }
        if (!tm.primary_key.empty()) {
            std::vector<int> pk_idx;
            for (const auto& k : tm.primary_key) pk_idx.push_back(t.column_index(k));
            std::set<std::vector<std::string>> seen;
            for (const auto& row : t.rows) {
                std::vector<std::string> key;
                for (int i : pk_idx) key.push_back(row[i].to_string());
                if (!seen.insert(key).second)
                    throw Error("table " + name + ": duplicate primary key");
            }
        }
    }
}

uint64_t Database::fingerprint() const {
    uint64_t acc = 0;
    for (const auto& [name, t] : tables) {
        uint64_t tname_h = hash_string(name, 7);
        for (const auto& row : t.rows) {
            uint64_t h = tname_h;
            for (const auto& v : row) h = mix64(h, hash_value(v));
            acc ^= h;  // XOR keeps the digest row-order independent
        }
    }
    return acc;
}

// ---- tbl files: tab-separated, header row, trailing tab tolerated ----

static std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    if (!out.empty() && out.back().empty()) out.pop_back();  // trailing delimiter
    return out;
}

Database load_database(const std::string& dir, const Catalog& cat) {
    Database db;
    for (const auto& [name, tm] : cat.tables) {
        fs::path path = fs::path(dir) / (name + ".tbl");
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open data file: " + path.string());

        Table t;
        t.name = name;
        std::string line;
        if (!std::getline(in, line)) throw Error("empty data file: " + path.string());
        t.columns = split_tabs(line);
        for (const auto& col : t.columns) {
            const ColumnMeta* cm = tm.find_column(col);
            if (!cm)
                throw BindError(BindErrorKind::UnknownColumn,
                                path.string() + ": header column " + col + " not in catalog");
            t.types.push_back(cm->dtype);
        }
        size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto cells = split_tabs(line);
            if (cells.size() != t.columns.size())
                throw Error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.columns.size()) + " fields, got " +
                            std::to_string(cells.size()));
            Row row;
            row.reserve(cells.size());
            for (size_t i = 0; i < cells.size(); ++i) row.push_back(parse_value(t.types[i], cells[i]));
            t.rows.push_back(std::move(row));
        }
        db.tables.emplace(name, std::move(t));
    }
    db.validate(cat);
    return db;
}

void write_database(const Database& db, const std::string& dir) {
    fs::create_directories(dir);
    for (const auto& [name, t] : db.tables) {
        std::ofstream out(fs::path(dir) / (name + ".tbl"), std::ios::binary);
        for (size_t i = 0; i < t.columns.size(); ++i) {
            if (i) out << '\t';
            out << t.columns[i];
        }
        out << '\n';
        for (const auto& row : t.rows) {
            for (size_t i = 0; i < row.size(); ++i) {
                if (i) out << '\t';
                out << row[i].to_string();
            }
            out << '\n';
        }
    }
}

} // namespace dpsql
