// Naive nested-loop evaluation used as the correctness oracle for the
// production executor. Deliberately shares nothing with execute()
// beyond the AST and data types: joins are quadratic scans and every
// predicate/aggregate is re-implemented here.
#include <algorithm>
#include <cmath>
#include <set>

#include "dpsql/executor.hpp"

namespace dpsql {

namespace {

struct Scan {
    std::vector<const Table*> tables;           // one per FROM slot
    std::vector<std::vector<uint32_t>> tuples;  // per-slot row index

    Value cell(const std::vector<uint32_t>& tup, const ColumnRef& c) const {
        const Table* t = tables[c.slot];
        for (size_t i = 0; i < t->columns.size(); ++i) {
            if (t->columns[i] == c.column) return t->rows[tup[c.slot]][i];
        }
        throw BindError(BindErrorKind::UnknownColumn, "unknown column: " + c.column);
    }
};

bool value_cmp(const Value& a, CmpOp op, const Value& b) {
    bool eq = a == b;
    bool lt = a < b;
    switch (op) {
    case CmpOp::Eq: return eq;
    case CmpOp::Ne: return !eq;
    case CmpOp::Lt: return lt;
    case CmpOp::Le: return lt || eq;
    case CmpOp::Gt: return !lt && !eq;
    case CmpOp::Ge: return !lt;
    }
    return false;
}

bool pred_holds(const Predicate& p, const Scan& scan, const std::vector<uint32_t>& tup) {
    if (p.kind == Predicate::Kind::Cmp) {
        auto val = [&](const Operand& o) {
            if (std::holds_alternative<Value>(o)) return std::get<Value>(o);
            return scan.cell(tup, std::get<ColumnRef>(o));
        };
        return value_cmp(val(p.cmp.lhs), p.cmp.op, val(p.cmp.rhs));
    }
    if (p.kind == Predicate::Kind::And) {
        for (const auto& c : p.children) {
            if (!pred_holds(c, scan, tup)) return false;
        }
        return true;
    }
    for (const auto& c : p.children) {
        if (pred_holds(c, scan, tup)) return true;
    }
    return false;
}

// Left-deep nested-loop join: every candidate pairing is checked
// against every join condition whose sides are both available.
Scan nested_loop_join(const ClassifiedQuery& q, const Database& db) {
    Scan scan;
    for (const auto& t : q.ast.from) scan.tables.push_back(&db.table(t.table));
    size_t nslots = scan.tables.size();

    std::vector<bool> placed(nslots, false);
    placed[0] = true;
    for (uint32_t i = 0; i < scan.tables[0]->rows.size(); ++i) {
        std::vector<uint32_t> tup(nslots, 0);
        tup[0] = i;
        scan.tuples.push_back(std::move(tup));
    }

    size_t done = 1;
    while (done < nslots) {
        int next = -1;
        for (size_t s = 1; s < nslots && next < 0; ++s) {
            if (placed[s]) continue;
            for (const auto& j : q.ast.joins) {
                int a = j.left.slot, b = j.right.slot;
                if ((a == static_cast<int>(s) && placed[b]) ||
                    (b == static_cast<int>(s) && placed[a])) {
                    next = static_cast<int>(s);
                    break;
                }
            }
        }
        if (next < 0) throw UnsupportedFeature("cross-join", "join graph is not connected");

        std::vector<std::vector<uint32_t>> extended;
        for (const auto& tup : scan.tuples) {
            for (uint32_t r = 0; r < scan.tables[next]->rows.size(); ++r) {
                std::vector<uint32_t> cand = tup;
                cand[next] = r;
                bool ok = true;
                for (const auto& j : q.ast.joins) {
                    int a = j.left.slot, b = j.right.slot;
                    bool avail = (placed[a] || a == next) && (placed[b] || b == next);
                    bool touches = a == next || b == next;
                    if (!avail || !touches) continue;
                    if (!(scan.cell(cand, j.left) == scan.cell(cand, j.right))) {
                        ok = false;
                        break;
                    }
                }
                if (ok) extended.push_back(std::move(cand));
            }
        }
        scan.tuples = std::move(extended);
        placed[next] = true;
        ++done;
    }

    if (q.ast.where) {
        std::vector<std::vector<uint32_t>> kept;
        for (const auto& tup : scan.tuples) {
            if (pred_holds(*q.ast.where, scan, tup)) kept.push_back(tup);
        }
        scan.tuples = std::move(kept);
    }
    return scan;
}

double bf_aggregate(const AggregateCall& agg, const Scan& scan,
                    const std::vector<std::vector<uint32_t>>& tuples) {
    switch (agg.func) {
    case AggFunc::Count:
        return static_cast<double>(tuples.size());
    case AggFunc::CountDistinct: {
        std::vector<std::string> seen;
        for (const auto& tup : tuples) {
            std::string key = scan.cell(tup, *agg.argument).to_string();
            if (std::find(seen.begin(), seen.end(), key) == seen.end()) seen.push_back(key);
        }
        return static_cast<double>(seen.size());
    }
    case AggFunc::Sum: {
        double total = 0.0;
        for (const auto& tup : tuples) total += scan.cell(tup, *agg.argument).numeric();
        return total;
    }
    case AggFunc::Avg: {
        if (tuples.empty()) throw ExecError(ExecErrorKind::AvgOfEmpty, "AVG over zero rows");
        double total = 0.0;
        for (const auto& tup : tuples) total += scan.cell(tup, *agg.argument).numeric();
        return total / static_cast<double>(tuples.size());
    }
    case AggFunc::Min:
    case AggFunc::Max: {
        if (tuples.empty())
            throw ExecError(ExecErrorKind::EmptyAggregate,
                            agg_func_name(agg.func) + " over zero rows");
        double best = scan.cell(tuples[0], *agg.argument).numeric();
        for (const auto& tup : tuples) {
            double v = scan.cell(tup, *agg.argument).numeric();
            if (agg.func == AggFunc::Min) best = std::min(best, v);
            else best = std::max(best, v);
        }
        return best;
    }
    }
    return 0.0;
}

} // namespace

ExactResult execute_bruteforce(const ClassifiedQuery& q, const Database& db) {
    Scan scan = nested_loop_join(q, db);
    ExactResult res;

    if (q.cls.kind == QueryClass::Kind::DataQuery) {
        res.kind = ExactResult::Kind::Rows;
        for (const auto& p : q.ast.projections) {
            const ColumnRef& c = std::get<ColumnRef>(p.expr);
            res.row_columns.push_back(p.alias.empty() ? c.column : p.alias);
        }
        for (const auto& tup : scan.tuples) {
            Row row;
            for (const auto& p : q.ast.projections) row.push_back(scan.cell(tup, std::get<ColumnRef>(p.expr)));
            res.rows.push_back(std::move(row));
        }
        return res;
    }

    const AggregateCall& agg = *q.ast.aggregate();

    if (q.ast.group_by.empty()) {
        res.kind = ExactResult::Kind::Scalar;
        res.scalar = bf_aggregate(agg, scan, scan.tuples);
        return res;
    }

    res.kind = ExactResult::Kind::Histogram;
    auto key_of = [&](const std::vector<uint32_t>& tup) {
        if (q.ast.group_by.size() == 1) return scan.cell(tup, q.ast.group_by[0]);
        std::string combined;
        for (size_t i = 0; i < q.ast.group_by.size(); ++i) {
            if (i) combined += "|";
            combined += scan.cell(tup, q.ast.group_by[i]).to_string();
        }
        return Value::from_text(combined);
    };

    std::map<Value, std::vector<std::vector<uint32_t>>> groups;
    for (const auto& tup : scan.tuples) groups[key_of(tup)].push_back(tup);
    for (const auto& [cat, tuples] : groups) {
        res.histogram.emplace_back(cat, bf_aggregate(agg, scan, tuples));
    }
    return res;
}

} // namespace dpsql
