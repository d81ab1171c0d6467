// Benchmark harness: synthetic sales/supply-chain dataset, the fixed
// query suite, MRE/MMAPE utility metrics and overhead reporting.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpsql/catalog.hpp"
#include "dpsql/database.hpp"
#include "dpsql/mechanisms.hpp"

namespace dpsql {

struct BenchConfig {
    double scale = 0.001;
    uint64_t data_seed = 1;
    uint64_t noise_seed = 2;
    std::vector<double> epsilons = {0.1, 1.0, 10.0};
    int repetitions = 25;
    std::vector<Mechanism> mechanisms = {Mechanism::LaplaceGS, Mechanism::LaplaceElastic,
                                         Mechanism::SAA, Mechanism::BoundedSum};
    std::string suite = "default";  // query suite reference
    int saa_partitions = 10;
};

struct BenchRow {
    std::string query_id;
    Mechanism mechanism;
    double epsilon = 0.0;
    bool answered = false;
    std::string reject_reason;  // when !answered
    std::string metric_kind;    // "MRE" or "MMAPE"
    double metric_mean = 0.0;
    double metric_std = 0.0;
    double time_mean_s = 0.0;
    double time_std_s = 0.0;
    double overhead_ratio = 0.0;
    int n_reps = 0;
};

struct BenchReport {
    BenchConfig config;
    std::vector<BenchRow> rows;
};

struct SuiteQuery {
    std::string id;
    std::string sql;
};

// The fixed evaluation suite: unit-test aggregates plus histogram
// queries over the sales schema.
const std::vector<SuiteQuery>& default_suite();

// Catalog describing the generated schema. The user-level variant tags
// customer rows as the privacy unit and propagates ownership to orders
// and lineitem through foreign keys.
Catalog sales_catalog(PrivacyUnit unit);

// Deterministic synthetic instance: region, nation, supplier, customer,
// part, partsupp, orders, lineitem in fixed proportions, all foreign
// keys valid, all values inside the declared catalog ranges.
Database generate_data(double scale, uint64_t seed);

// Mean relative error in percent. Throws ZeroTrueValue (as Error) when
// the true value is zero.
double mre(double true_value, const std::vector<double>& samples);

using Histogram = std::vector<std::pair<Value, double>>;

// Mean (over repetitions) of the mean absolute percentage error across
// bins, in percent. Bins with a zero true count must be excluded by the
// caller; a bin absent from a sample contributes 100%.
double mmape(const Histogram& true_hist, const std::vector<Histogram>& sample_hists);

BenchReport run_suite(const BenchConfig& config, const Catalog& catalog, const Database& db);

// Deterministic CSV (timing columns excepted); footer documents the
// zero-bin exclusion rule.
std::string report_to_csv(const BenchReport& report);

} // namespace dpsql
