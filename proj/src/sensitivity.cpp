#include "dpsql/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpsql/executor.hpp"

namespace dpsql {

std::string SensitivityBound::to_string() const {
    std::string k;
    switch (kind) {
    case SensKind::Global: k = "global"; break;
    case SensKind::Elastic: k = "elastic"; break;
    case SensKind::StabilityComposed: k = "stability-composed"; break;
    case SensKind::LocalOracle: k = "local-oracle"; break;
    }
    std::string u = unit == PrivacyUnit::User ? "user" : "tuple";
    if (unbounded) return k + "/" + u + ": unbounded";
    return k + "/" + u + ": " + Value::from_real(value).to_string();
}

namespace {

// Per-user row bound for one table: 1 at tuple level; at user level the
// declared max_user_contribution for PID-owning tables, 0 for public
// tables, and unbounded (nullopt) for PID tables without a declared C.
std::optional<double> base_contribution(const Catalog& catalog, const std::string& table,
                                        PrivacyUnit unit) {
    if (unit == PrivacyUnit::Tuple) return 1.0;
    const TableMeta& tm = catalog.table(table);
    if (!catalog.pid_path(table)) return 0.0;
    if (!tm.max_user_contribution) return std::nullopt;
    return static_cast<double>(*tm.max_user_contribution);
}

std::optional<double> clipped_magnitude(const ColumnMeta& cm) {
    if (!cm.range) return std::nullopt;
    return std::max(std::fabs(cm.range->first.numeric()), std::fabs(cm.range->second.numeric()));
}

} // namespace

SensitivityBound global_sensitivity(const ClassifiedQuery& q, const Catalog& catalog) {
    PrivacyUnit unit = catalog.privacy_unit;
    const AggregateCall* agg = q.ast.aggregate();
    if (!agg) return SensitivityBound::infinite(SensKind::Global, unit);
    if (q.ast.has_joins()) return SensitivityBound::infinite(SensKind::Global, unit);

    const std::string& table = q.ast.from[0].table;
    std::optional<double> c = base_contribution(catalog, table, unit);
    if (!c) return SensitivityBound::infinite(SensKind::Global, unit);

    switch (agg->func) {
    case AggFunc::Count:
    case AggFunc::CountDistinct:
        // A user adds at most one new distinct value per owned row.
        return SensitivityBound::finite(*c, SensKind::Global, unit);
    case AggFunc::Sum:
    case AggFunc::Avg: {
        // For AVG this is the clipped-sum (numerator) bound; the
        // mechanism layer pairs it with a count bound.
        const TableMeta& tm = catalog.table(table);
        const ColumnMeta* cm = tm.find_column(agg->argument->column);
        auto mag = cm ? clipped_magnitude(*cm) : std::nullopt;
        if (!mag) return SensitivityBound::infinite(SensKind::Global, unit);
        return SensitivityBound::finite(*c * *mag, SensKind::Global, unit);
    }
    case AggFunc::Min:
    case AggFunc::Max:
        return SensitivityBound::infinite(SensKind::Global, unit);
    }
    return SensitivityBound::infinite(SensKind::Global, unit);
}

SensitivityBound elastic_sensitivity(const ClassifiedQuery& q, const Database& db,
                                     const Catalog& catalog) {
    PrivacyUnit unit = catalog.privacy_unit;
    const AggregateCall* agg = q.ast.aggregate();
    if (!agg || (agg->func != AggFunc::Count && agg->func != AggFunc::CountDistinct))
        throw UnsupportedAggregate("elastic sensitivity supports COUNT and COUNT DISTINCT only");

    if (!q.ast.has_joins()) {
        SensitivityBound b = global_sensitivity(q, catalog);
        b.kind = SensKind::Elastic;
        return b;
    }

    const size_t nslots = q.ast.from.size();
    std::vector<bool> placed(nslots, false);
    std::vector<double> dup(nslots, 1.0);  // worst duplication of a base row so far

    auto base = [&](size_t slot) { return base_contribution(catalog, q.ast.from[slot].table, unit); };

    std::optional<double> s0 = base(0);
    if (!s0) return SensitivityBound::infinite(SensKind::Elastic, unit);
    double sens = *s0;
    placed[0] = true;
    size_t done = 1;

    // Walk the join tree in the executor's greedy order. Joining a new
    // relation multiplies existing contributions by the new side's key
    // multiplicity, adds the new side's own contribution multiplied by
    // the matched multiplicity on the accumulated side, plus the cross
    // term covering simultaneous duplication.
    while (done < nslots) {
        int next = -1;
        std::vector<const JoinSpec*> edges;
        for (size_t s = 1; s < nslots && next < 0; ++s) {
            if (placed[s]) continue;
            edges.clear();
            for (const auto& j : q.ast.joins) {
                int other = -1;
                if (j.left.slot == static_cast<int>(s)) other = j.right.slot;
                else if (j.right.slot == static_cast<int>(s)) other = j.left.slot;
                if (other >= 0 && placed[other]) edges.push_back(&j);
            }
            if (!edges.empty()) next = static_cast<int>(s);
        }
        if (next < 0) throw UnsupportedFeature("cross-join", "join graph is not connected");

        // Composite keys match at most the min of the per-column bounds.
        double mf_new = std::numeric_limits<double>::infinity();
        double mf_old = std::numeric_limits<double>::infinity();
        for (const JoinSpec* j : edges) {
            const ColumnRef& mine = j->left.slot == next ? j->left : j->right;
            const ColumnRef& theirs = j->left.slot == next ? j->right : j->left;
            double f_new = static_cast<double>(
                db.max_frequency(q.ast.from[mine.slot].table, mine.column));
            double f_old = static_cast<double>(
                               db.max_frequency(q.ast.from[theirs.slot].table, theirs.column)) *
                           dup[theirs.slot];
            mf_new = std::min(mf_new, f_new);
            mf_old = std::min(mf_old, f_old);
        }

        std::optional<double> s_next = base(next);
        if (!s_next) return SensitivityBound::infinite(SensKind::Elastic, unit);

        sens = mf_new * sens + mf_old * *s_next + sens * *s_next;
        for (size_t s = 0; s < nslots; ++s) {
            if (placed[s]) dup[s] *= mf_new;
        }
        dup[next] = mf_old;
        placed[next] = true;
        ++done;
    }

    if (!std::isfinite(sens)) return SensitivityBound::infinite(SensKind::Elastic, unit);
    return SensitivityBound::finite(sens, SensKind::Elastic, unit);
}

// ---- stability ----

Transform transform_from_name(const std::string& name) {
    if (name == "selection") return Transform::Selection;
    if (name == "group-by-category") return Transform::GroupByCategory;
    if (name == "union") return Transform::Union;
    if (name == "join-one-to-one") return Transform::JoinOneToOne;
    throw UnknownTransformation("unknown transformation: " + name);
}

std::string transform_name(Transform t) {
    switch (t) {
    case Transform::Selection: return "selection";
    case Transform::GroupByCategory: return "group-by-category";
    case Transform::Union: return "union";
    case Transform::JoinOneToOne: return "join-one-to-one";
    }
    return "?";
}

StabilityFactor stability(std::span<const Transform> chain) {
    StabilityFactor f;
    for (Transform t : chain) {
        switch (t) {
        case Transform::Selection:
        case Transform::Union:
        case Transform::JoinOneToOne:
            break;  // c = 1
        case Transform::GroupByCategory:
            f.c *= 2;
            break;
        }
    }
    return f;
}

std::vector<Transform> stability_chain(const ClassifiedQuery& q) {
    std::vector<Transform> chain;
    if (q.ast.where) chain.push_back(Transform::Selection);
    if (!q.ast.group_by.empty()) chain.push_back(Transform::GroupByCategory);
    return chain;
}

SensitivityBound stability_composed_sensitivity(const ClassifiedQuery& q, const Catalog& catalog) {
    PrivacyUnit unit = catalog.privacy_unit;
    if (q.ast.has_joins()) return SensitivityBound::infinite(SensKind::StabilityComposed, unit);
    SensitivityBound base = global_sensitivity(q, catalog);
    if (base.unbounded) return SensitivityBound::infinite(SensKind::StabilityComposed, unit);
    auto chain = stability_chain(q);
    StabilityFactor f = stability(chain);
    return SensitivityBound::finite(base.value * static_cast<double>(f.c),
                                    SensKind::StabilityComposed, unit);
}

// ---- exhaustive local-sensitivity oracle ----

namespace {

double eval_scalar(const ClassifiedQuery& q, const Database& db) {
    return execute_bruteforce(q, db).scalar;
}

std::vector<Row> candidate_rows(const Table& t, const ValueDomain& domain) {
    auto it = domain.find(t.name);
    if (it == domain.end())
        throw Error("value domain missing for table " + t.name);
    const auto& per_col = it->second;
    if (per_col.size() != t.columns.size())
        throw Error("value domain for " + t.name + " must cover every column");
    std::vector<Row> out{{}};
    for (const auto& col_values : per_col) {
        std::vector<Row> next;
        for (const auto& partial : out) {
            for (const auto& v : col_values) {
                Row r = partial;
                r.push_back(v);
                next.push_back(std::move(r));
            }
        }
        out = std::move(next);
    }
    return out;
}

} // namespace

double local_sensitivity_oracle(const ClassifiedQuery& q, const Database& db,
                                const Catalog& catalog, const ValueDomain& domain,
                                const OracleOptions& opts) {
    if (q.cls.kind != QueryClass::Kind::ScalarAggregate)
        throw Error("local sensitivity oracle handles scalar aggregates only");

    double base = eval_scalar(q, db);
    double worst = 0.0;
    auto consider = [&](const Database& neighbor) {
        double v;
        try {
            v = eval_scalar(q, neighbor);
        } catch (const ExecError&) {
            return;  // neighbor made the aggregate undefined (e.g. AVG of nothing)
        }
        worst = std::max(worst, std::fabs(v - base));
    };

    std::vector<std::string> touched;
    for (const auto& t : q.ast.from) {
        if (std::find(touched.begin(), touched.end(), t.table) == touched.end())
            touched.push_back(t.table);
    }

    if (catalog.privacy_unit == PrivacyUnit::Tuple) {
        size_t total = 0;
        for (const auto& tname : touched) {
            const Table& t = db.table(tname);
            size_t cands = 1;
            auto it = domain.find(tname);
            if (it == domain.end()) throw Error("value domain missing for table " + tname);
            for (const auto& col : it->second) cands *= col.size();
            total += t.rows.size() + cands + t.rows.size() * cands;
        }
        if (total > opts.max_neighbors)
            throw DomainTooLarge("neighbor enumeration needs " + std::to_string(total) +
                                 " evaluations (cap " + std::to_string(opts.max_neighbors) + ")");

        for (const auto& tname : touched) {
            const Table& orig = db.table(tname);
            std::vector<Row> cands = candidate_rows(orig, domain);

            // remove one row
            for (size_t r = 0; r < orig.rows.size(); ++r) {
                Database nd;
                nd.tables = db.tables;
                nd.tables[tname].rows.erase(nd.tables[tname].rows.begin() + r);
                consider(nd);
            }
            // add one row
            for (const auto& cand : cands) {
                Database nd;
                nd.tables = db.tables;
                nd.tables[tname].rows.push_back(cand);
                consider(nd);
            }
            // replace one row
            for (size_t r = 0; r < orig.rows.size(); ++r) {
                for (const auto& cand : cands) {
                    Database nd;
                    nd.tables = db.tables;
                    nd.tables[tname].rows[r] = cand;
                    consider(nd);
                }
            }
        }
        return worst;
    }

    // User level: neighbors drop every row owned by one PID. Added
    // users are not enumerated (their row sets are unbounded); for the
    // monotone aggregates under test the removal side attains the max.
    PidResolver resolver(catalog, db);
    std::set<Value> pids;
    for (const auto& tname : touched) {
        if (!resolver.table_has_pid(tname)) continue;
        const Table& t = db.table(tname);
        for (const auto& row : t.rows) {
            auto pid = resolver.pid_of(tname, row);
            if (pid) pids.insert(*pid);
        }
    }
    if (pids.size() > opts.max_neighbors)
        throw DomainTooLarge("too many PIDs to enumerate");

    for (const Value& pid : pids) {
        Database nd;
        nd.tables = db.tables;
        for (const auto& tname : touched) {
            if (!resolver.table_has_pid(tname)) continue;
            auto& rows = nd.tables[tname].rows;
            std::vector<Row> kept;
            for (const auto& row : rows) {
                auto owner = resolver.pid_of(tname, row);
                if (!owner || !(*owner == pid)) kept.push_back(row);
            }
            rows = std::move(kept);
        }
        consider(nd);
    }
    return worst;
}

} // namespace dpsql
