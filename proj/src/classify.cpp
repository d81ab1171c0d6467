#include "dpsql/classify.hpp"

#include <functional>

namespace dpsql {

std::string query_class_name(const QueryClass& c) {
    switch (c.kind) {
    case QueryClass::Kind::ScalarAggregate: return "ScalarAggregate";
    case QueryClass::Kind::HistogramFinite: return "HistogramFinite";
    case QueryClass::Kind::HistogramInfinite: return "HistogramInfinite";
    case QueryClass::Kind::DataQuery: return "DataQuery";
    case QueryClass::Kind::Unsupported: return "Unsupported(" + c.reason + ")";
    }
    return "?";
}

namespace {

class Binder {
public:
    Binder(QueryAst& ast, const Catalog& catalog) : ast_(ast), catalog_(catalog) {}

    void run() {
        bind_scope();
        for (auto& p : ast_.projections) {
            if (p.is_aggregate()) bind_aggregate(std::get<AggregateCall>(p.expr));
            else bind_column(std::get<ColumnRef>(p.expr));
        }
        for (auto& j : ast_.joins) {
            bind_column(j.left);
            bind_column(j.right);
            check_join_edge(j);
        }
        if (ast_.where) bind_predicate(*ast_.where);
        for (auto& g : ast_.group_by) bind_column(g);
        lift_where_equalities();
        check_connected();
    }

private:
    void bind_scope() {
        for (const auto& t : ast_.from) {
            const TableMeta* tm = catalog_.find_table(t.table);
            if (!tm) throw BindError(BindErrorKind::UnknownTable, "unknown table: " + t.table);
            for (const auto& other : scope_) {
                if (other->binding_name() == t.binding_name())
                    throw BindError(BindErrorKind::AmbiguousColumn,
                                    "duplicate table name or alias: " + t.binding_name() +
                                        " (alias one of the occurrences)");
            }
            scope_.push_back(&t);
            metas_.push_back(tm);
        }
    }

    const ColumnMeta& column_meta(const ColumnRef& c) const {
        return *metas_[c.slot]->find_column(c.column);
    }

    void bind_column(ColumnRef& c) {
        if (c.slot >= 0) return;
        if (!c.qualifier.empty()) {
            for (size_t i = 0; i < scope_.size(); ++i) {
                if (scope_[i]->binding_name() == c.qualifier) {
                    if (!metas_[i]->find_column(c.column))
                        throw BindError(BindErrorKind::UnknownColumn,
                                        "unknown column: " + c.qualifier + "." + c.column);
                    c.slot = static_cast<int>(i);
                    return;
                }
            }
            throw BindError(BindErrorKind::UnknownTable,
                            "unknown table or alias: " + c.qualifier);
        }
        int found = -1;
        for (size_t i = 0; i < scope_.size(); ++i) {
            if (metas_[i]->find_column(c.column)) {
                if (found >= 0)
                    throw BindError(BindErrorKind::AmbiguousColumn,
                                    "ambiguous column: " + c.column);
                found = static_cast<int>(i);
            }
        }
        if (found < 0)
            throw BindError(BindErrorKind::UnknownColumn, "unknown column: " + c.column);
        c.slot = found;
        c.qualifier = scope_[found]->binding_name();
    }

    void bind_aggregate(AggregateCall& a) {
        if (!a.argument) return;
        bind_column(*a.argument);
        if (a.func == AggFunc::Sum || a.func == AggFunc::Avg || a.func == AggFunc::Min ||
            a.func == AggFunc::Max) {
            Dtype t = column_meta(*a.argument).dtype;
            if (t != Dtype::Int && t != Dtype::Real)
                throw BindError(BindErrorKind::TypeMismatch,
                                agg_func_name(a.func) + " requires a numeric argument, got " +
                                    dtype_name(t));
        }
    }

    void check_join_edge(const JoinSpec& j) {
        Dtype lt = column_meta(j.left).dtype;
        Dtype rt = column_meta(j.right).dtype;
        if (lt != rt)
            throw BindError(BindErrorKind::TypeMismatch,
                            "join columns have different types: " + dtype_name(lt) + " vs " +
                                dtype_name(rt));
        if (j.left.slot == j.right.slot)
            throw BindError(BindErrorKind::TypeMismatch, "join condition within a single table");
    }

    // Coerce a literal operand to the column type of the other side.
    void coerce_literal(const ColumnRef& col, Operand& lit_op) {
        const Value& lit = std::get<Value>(lit_op);
        Dtype ct = column_meta(col).dtype;
        if (ct == Dtype::Date && lit.type() == Dtype::Text) {
            try {
                lit_op = Value::from_date(parse_date(lit.as_text()));
            } catch (const Error& e) {
                throw BindError(BindErrorKind::TypeMismatch, e.what());
            }
            return;
        }
        if (ct == Dtype::Real && lit.type() == Dtype::Int) {
            lit_op = Value::from_real(static_cast<double>(lit.as_int()));
            return;
        }
        if (ct == Dtype::Int && lit.type() == Dtype::Real) return;  // numeric compare handles it
        if ((ct == Dtype::Int || ct == Dtype::Real) && lit.type() == Dtype::Text)
            throw BindError(BindErrorKind::TypeMismatch,
                            "text literal compared with numeric column " + col.column);
        if (ct == Dtype::Text && lit.type() != Dtype::Text)
            throw BindError(BindErrorKind::TypeMismatch,
                            "non-text literal compared with text column " + col.column);
        if (ct == Dtype::Date && lit.type() != Dtype::Date)
            throw BindError(BindErrorKind::TypeMismatch,
                            "date column " + col.column + " requires a 'YYYY-MM-DD' literal");
    }

    void bind_comparison(Comparison& cmp) {
        bool l_col = std::holds_alternative<ColumnRef>(cmp.lhs);
        bool r_col = std::holds_alternative<ColumnRef>(cmp.rhs);
        if (l_col) bind_column(std::get<ColumnRef>(cmp.lhs));
        if (r_col) bind_column(std::get<ColumnRef>(cmp.rhs));
        if (l_col && r_col) {
            Dtype lt = column_meta(std::get<ColumnRef>(cmp.lhs)).dtype;
            Dtype rt = column_meta(std::get<ColumnRef>(cmp.rhs)).dtype;
            bool both_numeric = (lt == Dtype::Int || lt == Dtype::Real) &&
                                (rt == Dtype::Int || rt == Dtype::Real);
            if (lt != rt && !both_numeric)
                throw BindError(BindErrorKind::TypeMismatch,
                                "comparison between incompatible columns: " + dtype_name(lt) +
                                    " vs " + dtype_name(rt));
        } else if (l_col && !r_col) {
            coerce_literal(std::get<ColumnRef>(cmp.lhs), cmp.rhs);
        } else if (!l_col && r_col) {
            coerce_literal(std::get<ColumnRef>(cmp.rhs), cmp.lhs);
        }
        // literal-vs-literal comparisons are allowed and constant-folded
        // by the executor
    }

    void bind_predicate(Predicate& p) {
        if (p.kind == Predicate::Kind::Cmp) {
            bind_comparison(p.cmp);
            return;
        }
        for (auto& child : p.children) bind_predicate(child);
    }

    // WHERE equality between columns of two different tables acts as a
    // join condition; lift top-level conjuncts into the join list.
    void lift_where_equalities() {
        if (!ast_.where || ast_.from.size() < 2) return;

        auto is_join_cmp = [](const Predicate& p) {
            return p.kind == Predicate::Kind::Cmp && p.cmp.op == CmpOp::Eq &&
                   std::holds_alternative<ColumnRef>(p.cmp.lhs) &&
                   std::holds_alternative<ColumnRef>(p.cmp.rhs) &&
                   std::get<ColumnRef>(p.cmp.lhs).slot != std::get<ColumnRef>(p.cmp.rhs).slot;
        };
        auto lift = [&](const Predicate& p) {
            JoinSpec j;
            j.left = std::get<ColumnRef>(p.cmp.lhs);
            j.right = std::get<ColumnRef>(p.cmp.rhs);
            j.on_table = -1;
            check_join_edge(j);
            ast_.joins.push_back(std::move(j));
        };

        Predicate& w = *ast_.where;
        if (w.kind == Predicate::Kind::Cmp) {
            if (is_join_cmp(w)) {
                lift(w);
                ast_.where.reset();
            }
            return;
        }
        if (w.kind != Predicate::Kind::And) return;
        std::vector<Predicate> keep;
        for (auto& child : w.children) {
            if (is_join_cmp(child)) lift(child);
            else keep.push_back(std::move(child));
        }
        if (keep.empty()) ast_.where.reset();
        else if (keep.size() == 1) *ast_.where = std::move(keep[0]);
        else w.children = std::move(keep);
    }

    void check_connected() {
        if (ast_.from.size() < 2) return;
        std::vector<bool> reached(ast_.from.size(), false);
        reached[0] = true;
        bool progress = true;
        while (progress) {
            progress = false;
            for (const auto& j : ast_.joins) {
                bool l = reached[j.left.slot], r = reached[j.right.slot];
                if (l != r) {
                    reached[j.left.slot] = reached[j.right.slot] = true;
                    progress = true;
                }
            }
        }
        for (size_t i = 0; i < reached.size(); ++i) {
            if (!reached[i])
                throw UnsupportedFeature("cross-join",
                                         "table " + ast_.from[i].binding_name() +
                                             " has no join condition (cross products are not supported)");
        }
    }

    QueryAst& ast_;
    const Catalog& catalog_;
    std::vector<const TableRef*> scope_;
    std::vector<const TableMeta*> metas_;
};

} // namespace

ClassifiedQuery classify(const QueryAst& ast, const Catalog& catalog) {
    ClassifiedQuery out;
    out.ast = ast;
    Binder(out.ast, catalog).run();

    const QueryAst& q = out.ast;
    if (!q.has_aggregate()) {
        out.cls.kind = QueryClass::Kind::DataQuery;
        return out;
    }
    if (q.group_by.empty()) {
        out.cls.kind = QueryClass::Kind::ScalarAggregate;
        return out;
    }
    if (q.group_by.size() == 1) {
        const ColumnRef& g = q.group_by[0];
        const ColumnMeta* cm = catalog.table(q.from[g.slot].table).find_column(g.column);
        if (cm && cm->has_domain()) {
            out.cls.kind = QueryClass::Kind::HistogramFinite;
            return out;
        }
    }
    out.cls.kind = QueryClass::Kind::HistogramInfinite;
    return out;
}

} // namespace dpsql
