#include "dpsql/executor.hpp"

#include <algorithm>
#include <cmath>

namespace dpsql {

Value RowSet::get(size_t row, const ColumnRef& c) const {
    const Table* t = slot_tables[c.slot];
    int ci = t->column_index(c.column);
    return t->rows[rows[row][c.slot]][ci];
}

namespace {

// Compare under the bound-query type rules: Eq/Ne by value equality,
// ordering by Value::operator<.
bool compare(const Value& a, CmpOp op, const Value& b) {
    switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return !(a == b);
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a < b || a == b;
    case CmpOp::Gt: return b < a;
    case CmpOp::Ge: return b < a || a == b;
    }
    return false;
}

struct RowCursor {
    const RowSet& rs;
    size_t row;

    Value operand_value(const Operand& o) const {
        if (std::holds_alternative<Value>(o)) return std::get<Value>(o);
        return rs.get(row, std::get<ColumnRef>(o));
    }
};

bool eval_predicate(const Predicate& p, const RowCursor& cur) {
    switch (p.kind) {
    case Predicate::Kind::Cmp:
        return compare(cur.operand_value(p.cmp.lhs), p.cmp.op, cur.operand_value(p.cmp.rhs));
    case Predicate::Kind::And:
        for (const auto& c : p.children) {
            if (!eval_predicate(c, cur)) return false;
        }
        return true;
    case Predicate::Kind::Or:
        for (const auto& c : p.children) {
            if (eval_predicate(c, cur)) return true;
        }
        return false;
    }
    return false;
}

} // namespace

RowSet materialize(const ClassifiedQuery& q, const Database& db) {
    const QueryAst& ast = q.ast;
    RowSet rs;
    for (const auto& t : ast.from) rs.slot_tables.push_back(&db.table(t.table));

    const size_t nslots = ast.from.size();
    std::vector<bool> placed(nslots, false);
    std::vector<bool> edge_used(ast.joins.size(), false);

    // seed with the first FROM entry
    placed[0] = true;
    rs.rows.reserve(rs.slot_tables[0]->rows.size());
    for (uint32_t i = 0; i < rs.slot_tables[0]->rows.size(); ++i) {
        std::vector<uint32_t> entry(nslots, 0);
        entry[0] = i;
        rs.rows.push_back(std::move(entry));
    }

    size_t placed_count = 1;
    while (placed_count < nslots) {
        // next FROM-order slot connected to the placed set
        int next = -1;
        std::vector<size_t> edges;
        for (size_t s = 1; s < nslots && next < 0; ++s) {
            if (placed[s]) continue;
            edges.clear();
            for (size_t e = 0; e < ast.joins.size(); ++e) {
                const JoinSpec& j = ast.joins[e];
                int other = -1;
                if (j.left.slot == static_cast<int>(s)) other = j.right.slot;
                else if (j.right.slot == static_cast<int>(s)) other = j.left.slot;
                if (other >= 0 && placed[other]) edges.push_back(e);
            }
            if (!edges.empty()) next = static_cast<int>(s);
        }
        if (next < 0)
            throw UnsupportedFeature("cross-join", "join graph is not connected");

        // Build a composite-key index over the new table, keyed by its
        // side of every applicable edge.
        const Table* nt = rs.slot_tables[next];
        std::vector<int> new_cols, old_slots, old_cols;
        for (size_t e : edges) {
            const JoinSpec& j = ast.joins[e];
            const ColumnRef& mine = j.left.slot == next ? j.left : j.right;
            const ColumnRef& theirs = j.left.slot == next ? j.right : j.left;
            new_cols.push_back(nt->column_index(mine.column));
            old_slots.push_back(theirs.slot);
            old_cols.push_back(rs.slot_tables[theirs.slot]->column_index(theirs.column));
            edge_used[e] = true;
        }

        std::map<std::vector<Value>, std::vector<uint32_t>> index;
        for (uint32_t r = 0; r < nt->rows.size(); ++r) {
            std::vector<Value> key;
            key.reserve(new_cols.size());
            for (int ci : new_cols) key.push_back(nt->rows[r][ci]);
            index[std::move(key)].push_back(r);
        }

        std::vector<std::vector<uint32_t>> joined;
        for (const auto& entry : rs.rows) {
            std::vector<Value> key;
            key.reserve(old_slots.size());
            for (size_t i = 0; i < old_slots.size(); ++i) {
                const Table* ot = rs.slot_tables[old_slots[i]];
                key.push_back(ot->rows[entry[old_slots[i]]][old_cols[i]]);
            }
            auto hit = index.find(key);
            if (hit == index.end()) continue;
            for (uint32_t r : hit->second) {
                std::vector<uint32_t> ext = entry;
                ext[next] = r;
                joined.push_back(std::move(ext));
            }
        }
        rs.rows = std::move(joined);
        placed[next] = true;
        ++placed_count;
    }

    // Edges between two slots that were already placed when the edge
    // was considered act as residual filters.
    for (size_t e = 0; e < ast.joins.size(); ++e) {
        if (edge_used[e]) continue;
        const JoinSpec& j = ast.joins[e];
        std::vector<std::vector<uint32_t>> kept;
        for (size_t r = 0; r < rs.rows.size(); ++r) {
            if (rs.get(r, j.left) == rs.get(r, j.right)) kept.push_back(rs.rows[r]);
        }
        rs.rows = std::move(kept);
    }

    if (ast.where) {
        std::vector<std::vector<uint32_t>> kept;
        kept.reserve(rs.rows.size());
        for (size_t r = 0; r < rs.rows.size(); ++r) {
            if (eval_predicate(*ast.where, RowCursor{rs, r})) kept.push_back(rs.rows[r]);
        }
        rs.rows = std::move(kept);
    }
    return rs;
}

namespace {

double aggregate_rows(const AggregateCall& agg, const RowSet& rs) {
    const size_t n = rs.rows.size();
    switch (agg.func) {
    case AggFunc::Count:
        return static_cast<double>(n);
    case AggFunc::CountDistinct: {
        std::set<Value> distinct;
        for (size_t r = 0; r < n; ++r) distinct.insert(rs.get(r, *agg.argument));
        return static_cast<double>(distinct.size());
    }
    case AggFunc::Sum: {
        double acc = 0.0;
        for (size_t r = 0; r < n; ++r) acc += rs.get(r, *agg.argument).numeric();
        return acc;  // SUM over the empty set is 0 by engine policy
    }
    case AggFunc::Avg: {
        if (n == 0) throw ExecError(ExecErrorKind::AvgOfEmpty, "AVG over zero rows");
        double acc = 0.0;
        for (size_t r = 0; r < n; ++r) acc += rs.get(r, *agg.argument).numeric();
        return acc / static_cast<double>(n);
    }
    case AggFunc::Min:
    case AggFunc::Max: {
        if (n == 0) throw ExecError(ExecErrorKind::EmptyAggregate,
                                    agg_func_name(agg.func) + " over zero rows");
        double best = rs.get(0, *agg.argument).numeric();
        for (size_t r = 1; r < n; ++r) {
            double v = rs.get(r, *agg.argument).numeric();
            if (agg.func == AggFunc::Min ? v < best : v > best) best = v;
        }
        return best;
    }
    }
    return 0.0;
}

Value group_key(const ClassifiedQuery& q, const RowSet& rs, size_t row) {
    if (q.ast.group_by.size() == 1) return rs.get(row, q.ast.group_by[0]);
    // Composite keys collapse to a single text category.
    std::string combined;
    for (size_t i = 0; i < q.ast.group_by.size(); ++i) {
        if (i) combined += "|";
        combined += rs.get(row, q.ast.group_by[i]).to_string();
    }
    return Value::from_text(combined);
}

} // namespace

ExactResult execute(const ClassifiedQuery& q, const Database& db) {
    RowSet rs = materialize(q, db);
    ExactResult res;

    if (q.cls.kind == QueryClass::Kind::DataQuery) {
        res.kind = ExactResult::Kind::Rows;
        for (const auto& p : q.ast.projections) {
            const ColumnRef& c = std::get<ColumnRef>(p.expr);
            res.row_columns.push_back(p.alias.empty() ? c.column : p.alias);
        }
        for (size_t r = 0; r < rs.rows.size(); ++r) {
            Row row;
            for (const auto& p : q.ast.projections) row.push_back(rs.get(r, std::get<ColumnRef>(p.expr)));
            res.rows.push_back(std::move(row));
        }
        return res;
    }

    const AggregateCall& agg = *q.ast.aggregate();

    if (q.ast.group_by.empty()) {
        res.kind = ExactResult::Kind::Scalar;
        res.scalar = aggregate_rows(agg, rs);
        if (!std::isfinite(res.scalar))
            throw ExecError(ExecErrorKind::TypeMismatch, "non-finite aggregate result");
        return res;
    }

    // Grouped: bucket row indexes per category, then aggregate each
    // bucket; std::map keys keep categories unique and sorted.
    res.kind = ExactResult::Kind::Histogram;
    std::map<Value, std::vector<std::vector<uint32_t>>> groups;
    for (size_t r = 0; r < rs.rows.size(); ++r) groups[group_key(q, rs, r)].push_back(rs.rows[r]);

    for (auto& [cat, rows] : groups) {
        RowSet sub;
        sub.slot_tables = rs.slot_tables;
        sub.rows = std::move(rows);
        res.histogram.emplace_back(cat, aggregate_rows(agg, sub));
    }
    return res;
}

bool results_equal(const ExactResult& a, const ExactResult& b, double rel_tol) {
    auto scalar_eq = [rel_tol](double x, double y) {
        if (x == y) return true;
        double denom = std::max(std::fabs(x), std::fabs(y));
        return std::fabs(x - y) <= rel_tol * denom;
    };
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case ExactResult::Kind::Scalar:
        return scalar_eq(a.scalar, b.scalar);
    case ExactResult::Kind::Histogram: {
        if (a.histogram.size() != b.histogram.size()) return false;
        for (size_t i = 0; i < a.histogram.size(); ++i) {
            if (!(a.histogram[i].first == b.histogram[i].first)) return false;
            if (!scalar_eq(a.histogram[i].second, b.histogram[i].second)) return false;
        }
        return true;
    }
    case ExactResult::Kind::Rows: {
        if (a.rows.size() != b.rows.size() || a.row_columns != b.row_columns) return false;
        auto canon = [](const std::vector<Row>& rows) {
            std::vector<std::string> out;
            for (const auto& r : rows) {
                std::string s;
                for (const auto& v : r) s += v.to_string() + "\x1f";
                out.push_back(std::move(s));
            }
            std::sort(out.begin(), out.end());
            return out;
        };
        return canon(a.rows) == canon(b.rows);
    }
    }
    return false;
}

// ---- PID resolution ----

PidResolver::PidResolver(const Catalog& catalog, const Database& db)
    : catalog_(catalog), db_(db) {}

bool PidResolver::table_has_pid(const std::string& table) const {
    return catalog_.pid_path(table) != nullptr;
}

std::optional<Value> PidResolver::pid_of(const std::string& table, const Row& row) const {
    const PidPath* path = catalog_.pid_path(table);
    if (!path) throw NoPidPath("table " + table + " has no PID resolution");

    const Row* cur = &row;
    std::string cur_table = table;
    for (const auto& hop : path->hops) {
        const Table& t = db_.table(cur_table);
        int li = t.column_index(hop.local_column);
        if (li < 0)
            throw BindError(BindErrorKind::UnknownColumn,
                            "unknown column: " + cur_table + "." + hop.local_column);
        const Value& key = (*cur)[li];

        auto idx_key = std::make_pair(hop.remote_table, hop.remote_column);
        auto it = index_.find(idx_key);
        if (it == index_.end()) {
            const Table& rt = db_.table(hop.remote_table);
            int ri = rt.column_index(hop.remote_column);
            std::map<Value, const Row*> m;
            for (const auto& r : rt.rows) m.emplace(r[ri], &r);
            it = index_.emplace(idx_key, std::move(m)).first;
        }
        auto hit = it->second.find(key);
        if (hit == it->second.end()) return std::nullopt;  // dangling foreign key
        cur = hit->second;
        cur_table = hop.remote_table;
    }
    const Table& pid_t = db_.table(path->pid_table);
    int pi = pid_t.column_index(path->pid_column);
    return (*cur)[pi];
}

std::set<Value> target_user_set(const ClassifiedQuery& q, const Database& db,
                                const Catalog& catalog) {
    if (catalog.privacy_unit != PrivacyUnit::User)
        throw Error("target_user_set requires a user-level catalog");
    for (const auto& t : q.ast.from) {
        if (!catalog.pid_path(t.table))
            throw NoPidPath("table " + t.table + " has no PID resolution");
    }
    PidResolver resolver(catalog, db);
    RowSet rs = materialize(q, db);
    std::set<Value> pids;
    for (size_t r = 0; r < rs.rows.size(); ++r) {
        for (size_t s = 0; s < rs.slot_tables.size(); ++s) {
            const Table* t = rs.slot_tables[s];
            auto pid = resolver.pid_of(t->name, t->rows[rs.rows[r][s]]);
            if (pid) pids.insert(*pid);
        }
    }
    return pids;
}

} // namespace dpsql
