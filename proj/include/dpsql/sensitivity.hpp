// Sensitivity bounds: global, join-aware elastic, stability-composed,
// plus an exhaustive local-sensitivity oracle for testing.
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpsql/catalog.hpp"
#include "dpsql/classify.hpp"
#include "dpsql/database.hpp"

namespace dpsql {

enum class SensKind { Global, Elastic, StabilityComposed, LocalOracle };

struct SensitivityBound {
    bool unbounded = true;
    double value = 0.0;
    SensKind kind = SensKind::Global;
    PrivacyUnit unit = PrivacyUnit::Tuple;

    static SensitivityBound finite(double v, SensKind k, PrivacyUnit u) {
        return SensitivityBound{false, v, k, u};
    }
    static SensitivityBound infinite(SensKind k, PrivacyUnit u) {
        return SensitivityBound{true, 0.0, k, u};
    }

    // Unbounded absorbs any arithmetic.
    SensitivityBound scaled(double factor) const {
        if (unbounded) return *this;
        return finite(value * factor, kind, unit);
    }

    std::string to_string() const;
};

// Worst-case bound from catalog metadata alone. Joins make the global
// bound unbounded. For AVG the returned value is the clipped-sum
// (numerator) bound; the mechanism layer splits AVG into sum and count.
// For histograms this is the per-bin bound of the aggregate.
SensitivityBound global_sensitivity(const ClassifiedQuery& q, const Catalog& catalog);

// Join-aware bound for COUNT / COUNT DISTINCT, finite whenever every
// join column has finite max frequency. Composes per join edge from
// the partner side's max frequency; at user level each private table
// contributes its max_user_contribution. Throws UnsupportedAggregate
// for Sum/Avg/Min/Max.
SensitivityBound elastic_sensitivity(const ClassifiedQuery& q, const Database& db, const Catalog& catalog);

// ---- stability chains ----

enum class Transform { Selection, GroupByCategory, Union, JoinOneToOne };

Transform transform_from_name(const std::string& name);  // throws UnknownTransformation
std::string transform_name(Transform t);

struct StabilityFactor {
    int64_t c = 1;
};

// Product of per-transformation constants. Scaling contract:
// noise scale = c * base sensitivity / epsilon.
StabilityFactor stability(std::span<const Transform> chain);

// Chain derived from a bound query: Selection when filtered,
// GroupByCategory when grouped. Joins have no bounded stability here,
// so the composed bound is Unbounded for join queries.
std::vector<Transform> stability_chain(const ClassifiedQuery& q);
SensitivityBound stability_composed_sensitivity(const ClassifiedQuery& q, const Catalog& catalog);

// ---- exhaustive local-sensitivity oracle (test-only; never used for
// noise calibration) ----

// Per-table, per-column finite value sets the neighbor enumeration
// draws replacement rows from.
using ValueDomain = std::map<std::string, std::vector<std::vector<Value>>>;

struct OracleOptions {
    size_t max_neighbors = 200000;  // DomainTooLarge above this
};

// Max |Q(db) - Q(neighbor)| over all neighbors. Tuple unit: add,
// remove or replace one row (candidate rows from the value domain).
// User unit: remove all rows of one PID. Scalar queries only;
// evaluates through the brute-force executor.
double local_sensitivity_oracle(const ClassifiedQuery& q, const Database& db, const Catalog& catalog,
                                const ValueDomain& domain, const OracleOptions& opts = {});

} // namespace dpsql
