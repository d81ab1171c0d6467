#include "dpsql/ast.hpp"

#include <sstream>

namespace dpsql {

std::string cmp_op_text(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "<>";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    }
    return "?";
}

std::string agg_func_name(AggFunc f) {
    switch (f) {
    case AggFunc::Count: return "COUNT";
    case AggFunc::CountDistinct: return "COUNT DISTINCT";
    case AggFunc::Sum: return "SUM";
    case AggFunc::Avg: return "AVG";
    case AggFunc::Min: return "MIN";
    case AggFunc::Max: return "MAX";
    }
    return "?";
}

bool QueryAst::has_aggregate() const { return aggregate() != nullptr; }

const AggregateCall* QueryAst::aggregate() const {
    for (const auto& p : projections) {
        if (p.is_aggregate()) return &std::get<AggregateCall>(p.expr);
    }
    return nullptr;
}

namespace {

std::string render_column(const ColumnRef& c, bool qualify) {
    if (qualify || !c.qualifier.empty()) {
        return (c.qualifier.empty() ? "" : c.qualifier + ".") + c.column;
    }
    return c.column;
}

std::string render_operand(const Operand& o, bool qualify) {
    if (std::holds_alternative<ColumnRef>(o)) return render_column(std::get<ColumnRef>(o), qualify);
    return std::get<Value>(o).to_sql();
}

std::string render_predicate(const Predicate& p, bool qualify, bool parenthesize) {
    if (p.kind == Predicate::Kind::Cmp) {
        return render_operand(p.cmp.lhs, qualify) + " " + cmp_op_text(p.cmp.op) + " " +
               render_operand(p.cmp.rhs, qualify);
    }
    std::string sep = p.kind == Predicate::Kind::And ? " AND " : " OR ";
    std::string out;
    for (size_t i = 0; i < p.children.size(); ++i) {
        if (i) out += sep;
        const Predicate& child = p.children[i];
        bool need_paren = child.kind != Predicate::Kind::Cmp;
        out += render_predicate(child, qualify, need_paren);
    }
    if (parenthesize) return "(" + out + ")";
    return out;
}

std::string render_agg(const AggregateCall& a, bool qualify) {
    switch (a.func) {
    case AggFunc::Count:
        return a.argument ? "COUNT(" + render_column(*a.argument, qualify) + ")" : "COUNT(*)";
    case AggFunc::CountDistinct:
        return "COUNT(DISTINCT " + render_column(*a.argument, qualify) + ")";
    default:
        return agg_func_name(a.func) + "(" + render_column(*a.argument, qualify) + ")";
    }
}

} // namespace

std::string render(const QueryAst& ast, bool qualify) {
    std::ostringstream out;
    out << "SELECT ";
    for (size_t i = 0; i < ast.projections.size(); ++i) {
        if (i) out << ", ";
        const Projection& p = ast.projections[i];
        if (p.is_aggregate()) out << render_agg(std::get<AggregateCall>(p.expr), qualify);
        else out << render_column(std::get<ColumnRef>(p.expr), qualify);
        if (!p.alias.empty()) out << " AS " << p.alias;
    }
    out << " FROM ";
    for (size_t i = 0; i < ast.from.size(); ++i) {
        const TableRef& t = ast.from[i];
        bool joined = false;
        for (const auto& j : ast.joins) {
            if (j.on_table == static_cast<int>(i)) {
                joined = true;
                break;
            }
        }
        if (i == 0) {
            out << t.table;
        } else if (joined) {
            out << " JOIN " << t.table;
        } else {
            out << ", " << t.table;
        }
        if (!t.alias.empty() && t.alias != t.table) out << " AS " << t.alias;
        if (joined) {
            bool first = true;
            for (const auto& j : ast.joins) {
                if (j.on_table != static_cast<int>(i)) continue;
                out << (first ? " ON " : " AND ") << render_column(j.left, qualify) << " = "
                    << render_column(j.right, qualify);
                first = false;
            }
        }
    }
    // Join conditions lifted out of the WHERE clause render back into it.
    std::string where_text;
    for (const auto& j : ast.joins) {
        if (j.on_table >= 0) continue;
        if (!where_text.empty()) where_text += " AND ";
        where_text += render_column(j.left, qualify) + " = " + render_column(j.right, qualify);
    }
    if (ast.where) {
        if (!where_text.empty()) where_text += " AND ";
        bool paren = !where_text.empty() && ast.where->kind == Predicate::Kind::Or;
        where_text += render_predicate(*ast.where, qualify, paren);
    }
    if (!where_text.empty()) out << " WHERE " << where_text;
    if (!ast.group_by.empty()) {
        out << " GROUP BY ";
        for (size_t i = 0; i < ast.group_by.size(); ++i) {
            if (i) out << ", ";
            out << render_column(ast.group_by[i], qualify);
        }
    }
    return out.str();
}

bool ast_equal(const QueryAst& a, const QueryAst& b) {
    // Structural equality via the canonical rendering: the renderer is
    // injective on the supported AST shapes.
    return render(a, true) == render(b, true);
}

} // namespace dpsql
