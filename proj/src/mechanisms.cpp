#include "dpsql/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dpsql/executor.hpp"

namespace dpsql {

std::string mechanism_name(Mechanism m) {
    switch (m) {
    case Mechanism::LaplaceGS: return "laplace-gs";
    case Mechanism::LaplaceElastic: return "laplace-elastic";
    case Mechanism::SAA: return "saa";
    case Mechanism::BoundedSum: return "bounded-sum";
    }
    return "?";
}

Mechanism mechanism_from_name(const std::string& s) {
    if (s == "laplace-gs") return Mechanism::LaplaceGS;
    if (s == "laplace-elastic") return Mechanism::LaplaceElastic;
    if (s == "saa") return Mechanism::SAA;
    if (s == "bounded-sum") return Mechanism::BoundedSum;
    throw InvalidParams("unknown mechanism: " + s +
                        " (expected laplace-gs, laplace-elastic, saa or bounded-sum)");
}

std::string suppressor_name(Suppressor s) {
    switch (s) {
    case Suppressor::TauThreshold: return "tau";
    case Suppressor::StickyThreshold: return "sticky";
    case Suppressor::None: return "none";
    }
    return "?";
}

Suppressor suppressor_from_name(const std::string& s) {
    if (s == "tau") return Suppressor::TauThreshold;
    if (s == "sticky") return Suppressor::StickyThreshold;
    if (s == "none") return Suppressor::None;
    throw InvalidParams("unknown suppressor: " + s + " (expected tau, sticky or none)");
}

void PrivacyParams::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InvalidParams("epsilon must be positive");
    if (delta < 0.0 || delta >= 1.0) throw InvalidParams("delta must lie in [0, 1)");
    if (mechanism == Mechanism::SAA && (!saa_partitions || *saa_partitions < 2))
        throw InvalidParams("saa requires saa_partitions >= 2");
    if (tau && !(*tau > 0.0)) throw InvalidParams("tau must be positive");
}

std::string SanitizedResult::to_string() const {
    std::ostringstream out;
    if (kind == Kind::Scalar) {
        out << Value::from_real(scalar).to_string();
    } else {
        for (size_t i = 0; i < histogram.size(); ++i) {
            if (i) out << "\n";
            out << histogram[i].first.to_string() << "\t"
                << Value::from_real(histogram[i].second).to_string();
        }
    }
    return out.str();
}

std::string query_fingerprint(const ClassifiedQuery& q) {
    uint64_t h = hash_string(render(q.ast, true), 11);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

LedgerEntry make_entry(const ClassifiedQuery& q, Mechanism m, Composition comp) {
    LedgerEntry e;
    e.fingerprint = query_fingerprint(q);
    e.mechanism = mechanism_name(m);
    e.composition = comp;
    return e;
}

[[noreturn]] void reject(RejectReason r, const std::string& detail) {
    throw RejectedQuery(r, detail);
}

void charge_or_reject(Budget& budget, double eps, double delta, LedgerEntry entry) {
    try {
        budget.charge(eps, delta, std::move(entry));
    } catch (const BudgetExhausted& e) {
        reject(RejectReason::BudgetExhausted, e.what());
    }
}

const ColumnMeta& column_meta_for(const ClassifiedQuery& q, const Catalog& catalog,
                                const ColumnRef& c) {
    return *catalog.table(q.ast.from[c.slot].table).find_column(c.column);
}

// Sensitivity for a scalar or per-bin aggregate under the two Laplace
// variants. Throws RejectedQuery when the bound is unusable.
SensitivityBound laplace_sensitivity(const ClassifiedQuery& q, const Database& db,
                                     const Catalog& catalog, Mechanism mech) {
    SensitivityBound b;
    if (mech == Mechanism::LaplaceGS) {
        b = global_sensitivity(q, catalog);
        if (b.unbounded)
            reject(RejectReason::UnboundedSensitivity,
                   q.ast.has_joins() ? "global sensitivity is unbounded under joins"
                                     : "global sensitivity is unbounded (missing range bound?)");
    } else {
        try {
            b = elastic_sensitivity(q, db, catalog);
        } catch (const UnsupportedAggregate& e) {
            reject(RejectReason::Unsupported, e.what());
        }
        if (b.unbounded)
            reject(RejectReason::UnboundedSensitivity,
                   "elastic sensitivity is unbounded (missing contribution bound)");
    }
    if (!(b.value > 0.0))
        reject(RejectReason::Unsupported, "query touches no private rows (zero sensitivity)");
    return b;
}

// ---- bounded user contribution ----

struct OwnerKey {
    bool has_owner = false;
    Value owner;  // per-row synthetic owner at tuple level
};

// Owner of one joined output row: the PID shared by its private slots.
// Differing PIDs across slots make the ownership ambiguous.
std::optional<Value> row_owner(const RowSet& rs, size_t row, const PidResolver& resolver) {
    std::optional<Value> owner;
    for (size_t s = 0; s < rs.slot_tables.size(); ++s) {
        const Table* t = rs.slot_tables[s];
        if (!resolver.table_has_pid(t->name)) continue;
        auto pid = resolver.pid_of(t->name, t->rows[rs.rows[row][s]]);
        if (!pid) continue;
        if (owner && !(*owner == *pid))
            reject(RejectReason::Unsupported, "ambiguous row ownership across joined tables");
        owner = pid;
    }
    return owner;
}

struct BoundedPlan {
    double c_eff = 1.0;   // row-count clip per user
    double mag = 0.0;     // value magnitude bound (Sum/Avg)
    double lo = 0.0, hi = 0.0;
};

// Derives the clip bounds for the bounded-contribution rewriting.
BoundedPlan bounded_plan(const ClassifiedQuery& q, const Catalog& catalog, const AggregateCall& agg) {
    BoundedPlan plan;
    if (catalog.privacy_unit == PrivacyUnit::Tuple) {
        if (q.ast.has_joins())
            reject(RejectReason::Unsupported,
                   "bounded sums at tuple level support single-table queries only");
        plan.c_eff = 1.0;
    } else {
        double c = 0.0;
        bool any_private = false;
        for (const auto& t : q.ast.from) {
            if (!catalog.pid_path(t.table)) continue;
            any_private = true;
            const TableMeta& tm = catalog.table(t.table);
            if (!tm.max_user_contribution)
                reject(RejectReason::UnboundedSensitivity,
                       "table " + t.table + " declares no max_user_contribution");
            c = std::max(c, static_cast<double>(*tm.max_user_contribution));
        }
        if (!any_private)
            reject(RejectReason::Unsupported, "query touches no private rows (zero sensitivity)");
        plan.c_eff = c;
    }
    if (agg.func == AggFunc::Sum || agg.func == AggFunc::Avg) {
        const ColumnMeta& cm = column_meta_for(q, catalog, *agg.argument);
        if (!cm.range) reject(RejectReason::UnboundedSensitivity,
                              "column " + cm.name + " has no declared range to clip against");
        plan.lo = cm.range->first.numeric();
        plan.hi = cm.range->second.numeric();
        plan.mag = std::max(std::fabs(plan.lo), std::fabs(plan.hi));
        if (!(plan.mag > 0.0))
            reject(RejectReason::UnboundedSensitivity, "degenerate zero range on " + cm.name);
    }
    return plan;
}

struct BoundedAgg {
    double total = 0.0;  // sum of per-user clipped contributions
    double bound = 0.0;  // sensitivity of that sum
};

// Per-user partial aggregation with clipping over a subset of rows.
// kind must be Count or Sum; AVG is split by the caller.
BoundedAgg bounded_aggregate(const RowSet& rs, const std::vector<size_t>& row_ids,
                             const BoundedPlan& plan, AggFunc kind, const ColumnRef* arg,
                             const PidResolver* resolver) {
    BoundedAgg out;
    std::map<Value, double> per_user;
    for (size_t r : row_ids) {
        Value owner;
        if (resolver) {
            auto o = row_owner(rs, r, *resolver);
            if (!o) continue;  // unowned row (dangling reference); contributes nothing
            owner = *o;
        } else {
            owner = Value::from_int(static_cast<int64_t>(r));  // tuple level: row = unit
        }
        if (kind == AggFunc::Count) {
            per_user[owner] += 1.0;
        } else {
            double v = rs.get(r, *arg).numeric();
            per_user[owner] += std::clamp(v, plan.lo, plan.hi);
        }
    }
    if (kind == AggFunc::Count) {
        out.bound = plan.c_eff;
        for (auto& [_, v] : per_user) out.total += std::min(v, plan.c_eff);
    } else {
        out.bound = plan.c_eff * plan.mag;
        for (auto& [_, v] : per_user) out.total += std::clamp(v, -out.bound, out.bound);
    }
    return out;
}

std::vector<size_t> all_rows(const RowSet& rs) {
    std::vector<size_t> ids(rs.rows.size());
    for (size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    return ids;
}

// ---- shared scalar helpers ----

struct NoisyPair {
    double numerator = 0.0;
    double denominator = 0.0;
};

SanitizedResult finish_scalar(const ClassifiedQuery& q, const PrivacyParams& params,
                              Budget& budget, double value, const SensitivityBound& bound,
                              double delta_charged = 0.0) {
    charge_or_reject(budget, params.epsilon, delta_charged,
                     make_entry(q, params.mechanism, Composition::Sequential));
    SanitizedResult res;
    res.kind = SanitizedResult::Kind::Scalar;
    res.scalar = value;
    res.epsilon_charged = params.epsilon;
    res.delta_charged = delta_charged;
    res.mechanism = params.mechanism;
    res.sensitivity = bound;
    res.seed = params.seed;
    return res;
}

} // namespace

SanitizedResult sanitize_scalar(const ClassifiedQuery& q, const Database& db,
                                const Catalog& catalog, const PrivacyParams& params,
                                Budget& budget) {
    params.validate();
    if (q.cls.kind != QueryClass::Kind::ScalarAggregate)
        reject(RejectReason::Unsupported, "not a scalar aggregate query");

    const AggregateCall& agg = *q.ast.aggregate();
    if (agg.func == AggFunc::Min || agg.func == AggFunc::Max)
        reject(RejectReason::UnboundedSensitivity,
               agg_func_name(agg.func) + " has unbounded sensitivity and is not answered");

    if (params.mechanism == Mechanism::SAA) return saa(q, db, catalog, params, budget);

    Rng rng(params.seed);

    if (params.mechanism == Mechanism::BoundedSum) {
        if (agg.func == AggFunc::CountDistinct)
            reject(RejectReason::Unsupported,
                   "DISTINCT cannot be rewritten as a bounded sum; refusing to answer");
        BoundedPlan plan = bounded_plan(q, catalog, agg);
        RowSet rs = materialize(q, db);
        std::optional<PidResolver> resolver;
        if (catalog.privacy_unit == PrivacyUnit::User) resolver.emplace(catalog, db);
        const PidResolver* rp = resolver ? &*resolver : nullptr;
        auto ids = all_rows(rs);

        if (agg.func == AggFunc::Avg) {
            BoundedAgg num = bounded_aggregate(rs, ids, plan, AggFunc::Sum, &*agg.argument, rp);
            BoundedAgg den = bounded_aggregate(rs, ids, plan, AggFunc::Count, nullptr, rp);
            double half = params.epsilon / 2.0;
            double noisy_num = num.total + laplace_sample(num.bound / half, rng);
            double noisy_den = den.total + laplace_sample(den.bound / half, rng);
            if (noisy_den <= 0.0)
                reject(RejectReason::DegenerateDenominator, "noisy count is not positive");
            SensitivityBound b = SensitivityBound::finite(num.bound, SensKind::Global,
                                                          catalog.privacy_unit);
            return finish_scalar(q, params, budget, noisy_num / noisy_den, b);
        }
        AggFunc kind = agg.func == AggFunc::Sum ? AggFunc::Sum : AggFunc::Count;
        const ColumnRef* arg = agg.argument ? &*agg.argument : nullptr;
        BoundedAgg ba = bounded_aggregate(rs, ids, plan, kind, arg, rp);
        double noisy = ba.total + laplace_sample(ba.bound / params.epsilon, rng);
        SensitivityBound b =
            SensitivityBound::finite(ba.bound, SensKind::Global, catalog.privacy_unit);
        return finish_scalar(q, params, budget, noisy, b);
    }

    // Laplace mechanisms over the exact result.
    if (agg.func == AggFunc::Avg) {
        if (params.mechanism == Mechanism::LaplaceElastic)
            reject(RejectReason::Unsupported, "elastic sensitivity supports COUNT and COUNT DISTINCT only");
        // epsilon split halfway between clipped sum and count.
        ClassifiedQuery sum_q = q;
        for (auto& p : sum_q.ast.projections) {
            if (p.is_aggregate()) std::get<AggregateCall>(p.expr).func = AggFunc::Sum;
        }
        ClassifiedQuery cnt_q = q;
        for (auto& p : cnt_q.ast.projections) {
            if (p.is_aggregate()) {
                auto& a = std::get<AggregateCall>(p.expr);
                a.func = AggFunc::Count;
                a.argument.reset();
            }
        }
        SensitivityBound sum_b = laplace_sensitivity(sum_q, db, catalog, params.mechanism);
        SensitivityBound cnt_b = laplace_sensitivity(cnt_q, db, catalog, params.mechanism);

        double true_sum = execute(sum_q, db).scalar;
        double true_cnt = execute(cnt_q, db).scalar;
        double half = params.epsilon / 2.0;
        double noisy_sum = true_sum + laplace_sample(sum_b.value / half, rng);
        double noisy_cnt = true_cnt + laplace_sample(cnt_b.value / half, rng);
        if (noisy_cnt <= 0.0)
            reject(RejectReason::DegenerateDenominator, "noisy count is not positive");
        return finish_scalar(q, params, budget, noisy_sum / noisy_cnt, sum_b);
    }

    SensitivityBound bound = laplace_sensitivity(q, db, catalog, params.mechanism);
    double exact = execute(q, db).scalar;
    double noisy = exact + laplace_sample(bound.value / params.epsilon, rng);
    return finish_scalar(q, params, budget, noisy, bound);
}

SanitizedResult saa(const ClassifiedQuery& q, const Database& db, const Catalog& catalog,
                    const PrivacyParams& params, Budget& budget) {
    if (!params.saa_partitions || *params.saa_partitions < 2)
        throw InvalidParams("saa requires saa_partitions >= 2");
    if (q.cls.kind != QueryClass::Kind::ScalarAggregate)
        reject(RejectReason::Unsupported, "sample-and-aggregate releases scalar aggregates only");
    if (q.ast.has_joins())
        reject(RejectReason::Unsupported, "sample-and-aggregate does not support joins");

    const AggregateCall& agg = *q.ast.aggregate();
    if (agg.func != AggFunc::Count && agg.func != AggFunc::Sum && agg.func != AggFunc::Avg)
        reject(RejectReason::Unsupported, "sample-and-aggregate supports COUNT, SUM and AVG");

    double lo = 0.0, hi = 0.0;
    if (agg.func != AggFunc::Count) {
        const ColumnMeta& cm = column_meta_for(q, catalog, *agg.argument);
        if (!cm.range)
            reject(RejectReason::MissingRange,
                   "column " + cm.name + " has no declared range for partition clipping");
        lo = cm.range->first.numeric();
        hi = cm.range->second.numeric();
    }

    // User-level scaling: one user may perturb up to C partitions.
    double c_eff = 1.0;
    if (catalog.privacy_unit == PrivacyUnit::User) {
        const std::string& tname = q.ast.from[0].table;
        if (!catalog.pid_path(tname))
            reject(RejectReason::Unsupported, "query touches no private rows (zero sensitivity)");
        const TableMeta& tm = catalog.table(tname);
        if (!tm.max_user_contribution)
            reject(RejectReason::UnboundedSensitivity,
                   "table " + tname + " declares no max_user_contribution");
        c_eff = static_cast<double>(*tm.max_user_contribution);
    }

    RowSet rs = materialize(q, db);
    const size_t n = rs.rows.size();
    const size_t k = static_cast<size_t>(*params.saa_partitions);
    if (n == 0) reject(RejectReason::Unsupported, "sample-and-aggregate over an empty selection");

    // Rank rows by a primary-key hash and cut the ranking into k blocks
    // of near-equal size; an in-place value change keeps its block.
    const Table* t = rs.slot_tables[0];
    const TableMeta& tm = catalog.table(t->name);
    std::vector<int> pk_idx;
    for (const auto& c : tm.primary_key) pk_idx.push_back(t->column_index(c));

    std::vector<std::pair<uint64_t, size_t>> ranked;
    ranked.reserve(n);
    for (size_t r = 0; r < n; ++r) {
        const Row& row = t->rows[rs.rows[r][0]];
        uint64_t h = 0x6b7d;
        if (pk_idx.empty()) {
            for (const auto& v : row) h = mix64(h, hash_value(v));
        } else {
            for (int ci : pk_idx) h = mix64(h, hash_value(row[ci]));
        }
        ranked.emplace_back(h, r);
    }
    std::sort(ranked.begin(), ranked.end());

    std::vector<double> part_sum(k, 0.0);
    std::vector<size_t> part_n(k, 0);
    for (size_t rank = 0; rank < n; ++rank) {
        size_t p = rank * k / n;
        size_t r = ranked[rank].second;
        ++part_n[p];
        if (agg.func != AggFunc::Count) part_sum[p] += rs.get(r, *agg.argument).numeric();
    }

    // Derived output range per aggregate; m is the partition size.
    double m = std::ceil(static_cast<double>(n) / static_cast<double>(k));
    double out_lo = 0.0, out_hi = 0.0;
    switch (agg.func) {
    case AggFunc::Count: out_lo = 0.0; out_hi = m; break;
    case AggFunc::Sum: out_lo = m * std::min(lo, 0.0); out_hi = m * std::max(hi, 0.0); break;
    default: out_lo = lo; out_hi = hi; break;  // AVG
    }
    double width = out_hi - out_lo;
    if (!(width > 0.0))
        reject(RejectReason::Unsupported, "degenerate sample-and-aggregate output range");

    double mean = 0.0;
    for (size_t p = 0; p < k; ++p) {
        double v = 0.0;
        if (agg.func == AggFunc::Count) v = static_cast<double>(part_n[p]);
        else if (agg.func == AggFunc::Sum) v = part_sum[p];
        else v = part_n[p] == 0 ? out_lo : part_sum[p] / static_cast<double>(part_n[p]);
        mean += std::clamp(v, out_lo, out_hi);
    }
    mean /= static_cast<double>(k);

    Rng rng(params.seed);
    double scale = c_eff * width / (static_cast<double>(k) * params.epsilon);
    double noisy = mean + laplace_sample(scale, rng);

    SensitivityBound b = SensitivityBound::finite(c_eff * width / static_cast<double>(k),
                                                  SensKind::Global, catalog.privacy_unit);
    PrivacyParams effective = params;
    effective.mechanism = Mechanism::SAA;
    return finish_scalar(q, effective, budget, noisy, b);
}

SanitizedResult sanitize_histogram(const ClassifiedQuery& q, const Database& db,
                                   const Catalog& catalog, const PrivacyParams& params,
                                   Budget& budget) {
    params.validate();
    if (!q.cls.is_histogram())
        reject(RejectReason::Unsupported, "not a histogram query");
    bool finite_domain = q.cls.kind == QueryClass::Kind::HistogramFinite;

    if (!finite_domain && params.histogram_suppressor == Suppressor::None)
        reject(RejectReason::NoSuppressor,
               "open-domain histograms require a configured suppressor");

    const AggregateCall& agg = *q.ast.aggregate();
    if (agg.func == AggFunc::Min || agg.func == AggFunc::Max)
        reject(RejectReason::UnboundedSensitivity,
               agg_func_name(agg.func) + " has unbounded sensitivity and is not answered");
    if (agg.func == AggFunc::Avg)
        reject(RejectReason::Unsupported, "grouped AVG is not supported by the histogram path");
    if (params.mechanism == Mechanism::SAA)
        reject(RejectReason::Unsupported, "sample-and-aggregate does not release histograms");

    // Per-bin sensitivity plus, for the bounded mechanism, the clipped
    // per-user per-bin aggregation plan.
    SensitivityBound bin_bound;
    std::optional<BoundedPlan> plan;
    if (params.mechanism == Mechanism::BoundedSum) {
        if (agg.func == AggFunc::CountDistinct)
            reject(RejectReason::Unsupported,
                   "DISTINCT cannot be rewritten as a bounded sum; refusing to answer");
        plan = bounded_plan(q, catalog, agg);
        double bound = agg.func == AggFunc::Sum ? plan->c_eff * plan->mag : plan->c_eff;
        bin_bound = SensitivityBound::finite(bound, SensKind::Global, catalog.privacy_unit);
    } else {
        bin_bound = laplace_sensitivity(q, db, catalog, params.mechanism);
    }
    double scale = bin_bound.value / params.epsilon;

    // True bins. For the bounded mechanism the bin values are the
    // per-user clipped totals rather than the raw aggregates.
    std::vector<std::pair<Value, double>> true_bins;
    if (params.mechanism == Mechanism::BoundedSum) {
        RowSet rs = materialize(q, db);
        std::optional<PidResolver> resolver;
        if (catalog.privacy_unit == PrivacyUnit::User) resolver.emplace(catalog, db);
        const PidResolver* rp = resolver ? &*resolver : nullptr;

        auto bin_key = [&](size_t row) {
            if (q.ast.group_by.size() == 1) return rs.get(row, q.ast.group_by[0]);
            std::string combined;
            for (size_t i = 0; i < q.ast.group_by.size(); ++i) {
                if (i) combined += "|";
                combined += rs.get(row, q.ast.group_by[i]).to_string();
            }
            return Value::from_text(combined);
        };
        std::map<Value, std::vector<size_t>> groups;
        for (size_t r = 0; r < rs.rows.size(); ++r) groups[bin_key(r)].push_back(r);
        AggFunc kind = agg.func == AggFunc::Sum ? AggFunc::Sum : AggFunc::Count;
        const ColumnRef* arg = agg.argument ? &*agg.argument : nullptr;
        for (auto& [cat, ids] : groups) {
            BoundedAgg ba = bounded_aggregate(rs, ids, *plan, kind, arg, rp);
            true_bins.emplace_back(cat, ba.total);
        }
    } else {
        true_bins = execute(q, db).histogram;
    }

    SanitizedResult res;
    res.kind = SanitizedResult::Kind::Histogram;
    res.mechanism = params.mechanism;
    res.sensitivity = bin_bound;
    res.seed = params.seed;

    Rng rng(params.seed);
    double delta_charged = 0.0;

    if (finite_domain) {
        // Full-domain release: every declared category gets a bin, so a
        // contribution can never create (or reveal) a category.
        const ColumnRef& g = q.ast.group_by[0];
        std::vector<Value> domain = column_meta_for(q, catalog, g).domain;
        std::sort(domain.begin(), domain.end());
        std::map<Value, double> truth(true_bins.begin(), true_bins.end());
        for (const Value& cat : domain) {
            auto it = truth.find(cat);
            double v = it == truth.end() ? 0.0 : it->second;
            res.histogram.emplace_back(cat, v + laplace_sample(scale, rng));
        }
    } else {
        // Observed categories only, thresholded. The sticky variant
        // derives its threshold noise from (query, data) so repeats
        // suppress identically.
        double tau;
        if (params.histogram_suppressor == Suppressor::TauThreshold) {
            if (!(params.delta > 0.0))
                throw InvalidParams("tau-thresholding requires delta > 0");
            tau = params.tau ? *params.tau
                             : 1.0 + scale * std::log(1.0 / (2.0 * params.delta));
            delta_charged = params.delta;
        } else {
            double tau_base = params.tau
                                  ? *params.tau
                                  : (params.delta > 0.0
                                         ? 1.0 + scale * std::log(1.0 / (2.0 * params.delta))
                                         : 5.0);
            uint64_t sticky_seed =
                mix64(hash_string(render(q.ast, true), 13), db.fingerprint());
            Rng sticky_rng(sticky_seed);
            tau = tau_base + laplace_sample(tau_base / 4.0, sticky_rng);
        }
        for (const auto& [cat, v] : true_bins) {
            double noisy = v + laplace_sample(scale, rng);
            if (noisy < tau) {
                ++res.suppressed_bin_count;
            } else {
                res.histogram.emplace_back(cat, noisy);
            }
        }
    }

    // Disjoint bins: one parallel charge covers the whole histogram.
    LedgerEntry entry = make_entry(q, params.mechanism, Composition::Parallel);
    charge_or_reject(budget, params.epsilon, delta_charged, std::move(entry));
    res.epsilon_charged = params.epsilon;
    res.delta_charged = delta_charged;
    return res;
}

void kanon_gate(const ClassifiedQuery& q, const Database& db, const Catalog& catalog,
                const KAnonParams& kparams) {
    if (kparams.k < 1) throw InvalidParams("k must be >= 1");
    std::set<Value> targeted = target_user_set(q, db, catalog);
    if (static_cast<int64_t>(targeted.size()) < kparams.k)
        reject(RejectReason::BelowK,
               "query targets " + std::to_string(targeted.size()) + " users, fewer than k=" +
                   std::to_string(kparams.k));
}

bool is_quasi_identifier(const std::vector<std::string>& attrs, const std::string& table,
                         const Database& db) {
    if (attrs.empty()) throw Error("quasi-identifier check needs at least one attribute");
    const Table& t = db.table(table);
    std::vector<int> idx;
    for (const auto& a : attrs) {
        int i = t.column_index(a);
        if (i < 0) throw BindError(BindErrorKind::UnknownColumn, "unknown column: " + table + "." + a);
        idx.push_back(i);
    }
    std::map<std::vector<std::string>, size_t> groups;
    for (const auto& row : t.rows) {
        std::vector<std::string> key;
        for (int i : idx) key.push_back(row[i].to_string());
        ++groups[key];
    }
    for (const auto& [_, n] : groups) {
        if (n == 1) return true;
    }
    return false;
}

bool kanon_check(const std::string& table, const std::vector<std::string>& qid, int64_t k,
                 const Database& db) {
    if (qid.empty()) throw Error("k-anonymity check needs at least one attribute");
    const Table& t = db.table(table);
    std::vector<int> idx;
    for (const auto& a : qid) {
        int i = t.column_index(a);
        if (i < 0) throw BindError(BindErrorKind::UnknownColumn, "unknown column: " + table + "." + a);
        idx.push_back(i);
    }
    std::map<std::vector<std::string>, size_t> groups;
    for (const auto& row : t.rows) {
        std::vector<std::string> key;
        for (int i : idx) key.push_back(row[i].to_string());
        ++groups[key];
    }
    for (const auto& [_, n] : groups) {
        if (n > 0 && n < static_cast<size_t>(k)) return false;
    }
    return true;
}

std::optional<Mechanism> choose_mechanism(const ClassifiedQuery& q, const Catalog& catalog) {
    if (q.cls.kind == QueryClass::Kind::DataQuery ||
        q.cls.kind == QueryClass::Kind::Unsupported) {
        return std::nullopt;
    }
    const AggregateCall* agg = q.ast.aggregate();
    if (!agg) return std::nullopt;
    bool joins = q.ast.has_joins();
    switch (agg->func) {
    case AggFunc::Count:
    case AggFunc::CountDistinct:
        return joins ? Mechanism::LaplaceElastic : Mechanism::LaplaceGS;
    case AggFunc::Sum:
    case AggFunc::Avg:
        if (!joins) return Mechanism::LaplaceGS;
        if (catalog.privacy_unit == PrivacyUnit::User) return Mechanism::BoundedSum;
        return std::nullopt;
    case AggFunc::Min:
    case AggFunc::Max:
        return std::nullopt;
    }
    return std::nullopt;
}

SanitizedResult sanitize_query(const ClassifiedQuery& q, const Database& db,
                               const Catalog& catalog, const PrivacyParams& params,
                               Budget& budget, const std::optional<KAnonParams>& kparams) {
    if (kparams) kanon_gate(q, db, catalog, *kparams);
    switch (q.cls.kind) {
    case QueryClass::Kind::ScalarAggregate:
        return sanitize_scalar(q, db, catalog, params, budget);
    case QueryClass::Kind::HistogramFinite:
    case QueryClass::Kind::HistogramInfinite:
        return sanitize_histogram(q, db, catalog, params, budget);
    case QueryClass::Kind::DataQuery:
        reject(RejectReason::Unsupported, "data queries return raw rows and are not sanitized");
    case QueryClass::Kind::Unsupported:
        reject(RejectReason::Unsupported, q.cls.reason);
    }
    reject(RejectReason::Unsupported, "unreachable");
}

} // namespace dpsql
