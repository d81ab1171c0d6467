// Sanitization mechanisms: Laplace noising of scalar aggregates,
// sample-and-aggregate, bounded-contribution sums, histogram release
// (full-domain, tau-threshold, sticky threshold) and the k-anonymity
// admission gate.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpsql/accountant.hpp"
#include "dpsql/catalog.hpp"
#include "dpsql/classify.hpp"
#include "dpsql/database.hpp"
#include "dpsql/rng.hpp"
#include "dpsql/sensitivity.hpp"

namespace dpsql {

enum class Mechanism { LaplaceGS, LaplaceElastic, SAA, BoundedSum };
enum class Suppressor { TauThreshold, StickyThreshold, None };

std::string mechanism_name(Mechanism m);
Mechanism mechanism_from_name(const std::string& s);
std::string suppressor_name(Suppressor s);
Suppressor suppressor_from_name(const std::string& s);

struct PrivacyParams {
    double epsilon = 1.0;
    double delta = 0.0;
    uint64_t seed = 0;
    Mechanism mechanism = Mechanism::LaplaceGS;
    Suppressor histogram_suppressor = Suppressor::None;
    std::optional<double> tau;
    std::optional<int> saa_partitions;

    // Throws InvalidParams on violation.
    void validate() const;
};

struct KAnonParams {
    int64_t k = 1;
};

struct SanitizedResult {
    enum class Kind { Scalar, Histogram };
    Kind kind = Kind::Scalar;
    double scalar = 0.0;
    std::vector<std::pair<Value, double>> histogram;  // sorted by category

    double epsilon_charged = 0.0;
    double delta_charged = 0.0;
    Mechanism mechanism = Mechanism::LaplaceGS;
    SensitivityBound sensitivity;
    size_t suppressed_bin_count = 0;
    uint64_t seed = 0;

    std::string to_string() const;
};

// Canonical fingerprint of a bound query (hex of a 64-bit hash over the
// qualified rendering).
std::string query_fingerprint(const ClassifiedQuery& q);

// ---- scalar path ----

// Noises a scalar aggregate with the configured mechanism. Throws
// RejectedQuery (UnboundedSensitivity, Unsupported, BudgetExhausted,
// DegenerateDenominator, MissingRange) without touching the budget.
SanitizedResult sanitize_scalar(const ClassifiedQuery& q, const Database& db, const Catalog& catalog,
                                const PrivacyParams& params, Budget& budget);

// Sample-and-aggregate: ranks rows by a primary-key hash, cuts the
// ranking into k equal blocks, evaluates the aggregate per block, clips
// each block result to the derived output range and releases the mean
// plus Laplace(width / (k * epsilon)).
SanitizedResult saa(const ClassifiedQuery& q, const Database& db, const Catalog& catalog,
                    const PrivacyParams& params, Budget& budget);

// ---- histogram path ----

// Finite-domain histograms emit a noisy count for every declared
// category; open-domain histograms emit observed categories and
// suppress bins whose noisy value falls below the threshold.
SanitizedResult sanitize_histogram(const ClassifiedQuery& q, const Database& db, const Catalog& catalog,
                                   const PrivacyParams& params, Budget& budget);

// ---- k-anonymity ----

// Throws RejectedQuery{BelowK} when the query targets fewer than k
// distinct PIDs.
void kanon_gate(const ClassifiedQuery& q, const Database& db, const Catalog& catalog,
                const KAnonParams& kparams);

// True iff grouping `table` by `attrs` yields at least one singleton
// group (the attribute set isolates somebody).
bool is_quasi_identifier(const std::vector<std::string>& attrs, const std::string& table,
                         const Database& db);

// True iff no group over `qid` has size in (0, k).
bool kanon_check(const std::string& table, const std::vector<std::string>& qid, int64_t k,
                 const Database& db);

// ---- dispatch ----

// The mechanism the engine picks when none is forced: elastic for
// counts over joins, bounded sums for user-level value aggregates over
// joins, plain global-sensitivity Laplace otherwise. nullopt when no
// mechanism applies (MIN/MAX, data queries).
std::optional<Mechanism> choose_mechanism(const ClassifiedQuery& q, const Catalog& catalog);

// Full pipeline for one classified query: optional k-anonymity gate,
// then scalar or histogram sanitization.
SanitizedResult sanitize_query(const ClassifiedQuery& q, const Database& db, const Catalog& catalog,
                               const PrivacyParams& params, Budget& budget,
                               const std::optional<KAnonParams>& kparams = std::nullopt);

} // namespace dpsql
