#include "dpsql/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "dpsql/executor.hpp"
#include "dpsql/parser.hpp"
#include "dpsql/rng.hpp"

namespace dpsql {

const std::vector<SuiteQuery>& default_suite() {
    static const std::vector<SuiteQuery> suite = {
        {"count", "SELECT COUNT(*) FROM customer"},
        {"count_distinct",
         "SELECT COUNT(DISTINCT c_nationkey) FROM customer JOIN orders ON o_custkey = c_custkey"},
        {"sum", "SELECT SUM(c_acctbal) FROM customer"},
        {"sja",
         "SELECT COUNT(*) FROM orders JOIN customer ON o_custkey = c_custkey "
         "WHERE c_acctbal < o_totalprice"},
        {"avg", "SELECT AVG(o_totalprice) FROM orders"},
        {"min", "SELECT MIN(o_totalprice) FROM orders"},
        {"histogram", "SELECT o_orderstatus, COUNT(*) FROM orders GROUP BY o_orderstatus"},
        {"me_94_revenue",
         "SELECT n_name, SUM(l_extendedprice) FROM lineitem "
         "JOIN orders ON l_orderkey = o_orderkey "
         "JOIN customer ON o_custkey = c_custkey "
         "JOIN nation ON c_nationkey = n_nationkey "
         "JOIN region ON n_regionkey = r_regionkey "
         "WHERE r_name = 'MIDDLE EAST' AND o_orderdate >= '1994-01-01' "
         "AND o_orderdate <= '1994-12-31' GROUP BY n_name"},
        {"region_revenue",
         "SELECT r_name, SUM(l_extendedprice) FROM lineitem "
         "JOIN orders ON l_orderkey = o_orderkey "
         "JOIN customer ON o_custkey = c_custkey "
         "JOIN nation ON c_nationkey = n_nationkey "
         "JOIN region ON n_regionkey = r_regionkey GROUP BY r_name"},
    };
    return suite;
}

double mre(double true_value, const std::vector<double>& samples) {
    if (true_value == 0.0) throw ZeroTrueValue("relative error undefined for a zero true value");
    if (samples.empty()) throw ConfigError("mre needs at least one sample");
    double acc = 0.0;
    for (double s : samples) acc += std::fabs(s - true_value) / true_value;
    return 100.0 * acc / static_cast<double>(samples.size());
}

namespace {

// Average percentage error across bins for one sanitized histogram;
// a bin missing from the sample counts as zero (total loss).
double mape_one(const Histogram& true_hist, const Histogram& sample) {
    std::map<Value, double> m(sample.begin(), sample.end());
    double acc = 0.0;
    for (const auto& [cat, h] : true_hist) {
        auto it = m.find(cat);
        double v = it == m.end() ? 0.0 : it->second;
        acc += std::fabs(v - h) / h;
    }
    return 100.0 * acc / static_cast<double>(true_hist.size());
}

} // namespace

double mmape(const Histogram& true_hist, const std::vector<Histogram>& sample_hists) {
    for (const auto& [cat, h] : true_hist) {
        if (h == 0.0)
            throw EmptyTrueHistogram("true histogram contains a zero bin; exclude it first");
    }
    if (true_hist.empty()) throw EmptyTrueHistogram("true histogram has no bins");
    if (sample_hists.empty()) throw ConfigError("mmape needs at least one sample");
    double acc = 0.0;
    for (const auto& s : sample_hists) acc += mape_one(true_hist, s);
    return acc / static_cast<double>(sample_hists.size());
}

namespace {

double mean_of(const std::vector<double>& xs) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return xs.empty() ? 0.0 : acc / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    auto dt = std::chrono::steady_clock::now() - t0;
    return std::chrono::duration<double>(dt).count();
}

} // namespace

BenchReport run_suite(const BenchConfig& config, const Catalog& catalog, const Database& db) {
    if (config.repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (config.epsilons.empty()) throw ConfigError("epsilons must be nonempty");
    if (config.suite != "default") throw ConfigError("unknown query suite: " + config.suite);

    BenchReport report;
    report.config = config;

    for (const auto& sq : default_suite()) {
        ClassifiedQuery q = classify(parse(sq.sql), catalog);

        // Ground truth and timing baseline: one warm-up, one timed run.
        execute(q, db);
        auto t0 = std::chrono::steady_clock::now();
        ExactResult truth = execute(q, db);
        double base_time = seconds_since(t0);

        Histogram true_bins_nonzero;
        if (truth.kind == ExactResult::Kind::Histogram) {
            for (const auto& bin : truth.histogram) {
                if (bin.second != 0.0) true_bins_nonzero.push_back(bin);
            }
        }

        for (size_t mi = 0; mi < config.mechanisms.size(); ++mi) {
            Mechanism mech = config.mechanisms[mi];
            for (size_t ei = 0; ei < config.epsilons.size(); ++ei) {
                double eps = config.epsilons[ei];
                BenchRow row;
                row.query_id = sq.id;
                row.mechanism = mech;
                row.epsilon = eps;
                row.n_reps = config.repetitions;

                std::vector<double> metrics;
                std::vector<double> times;
                std::string reject_reason;

                for (int rep = 0; rep < config.repetitions && reject_reason.empty(); ++rep) {
                    PrivacyParams params;
                    params.epsilon = eps;
                    params.delta = 0.0;
                    params.mechanism = mech;
                    params.histogram_suppressor = Suppressor::TauThreshold;
                    params.saa_partitions = config.saa_partitions;
                    params.seed = mix64(config.noise_seed,
                                        mix64(hash_string(sq.id),
                                              mix64(mi, mix64(ei, static_cast<uint64_t>(rep)))));
                    Budget budget(eps, 1.0);
                    try {
                        auto t1 = std::chrono::steady_clock::now();
                        SanitizedResult res = sanitize_query(q, db, catalog, params, budget);
                        times.push_back(seconds_since(t1));
                        if (res.kind == SanitizedResult::Kind::Scalar) {
                            metrics.push_back(mre(truth.scalar, {res.scalar}));
                        } else {
                            metrics.push_back(mmape(true_bins_nonzero, {res.histogram}));
                        }
                    } catch (const RejectedQuery& e) {
                        reject_reason = reject_reason_name(e.reason);
                    } catch (const Error& e) {
                        reject_reason = std::string("error: ") + e.what();
                    }
                }

                if (!reject_reason.empty()) {
                    row.answered = false;
                    row.reject_reason = reject_reason;
                } else {
                    row.answered = true;
                    row.metric_kind =
                        truth.kind == ExactResult::Kind::Histogram ? "MMAPE" : "MRE";
                    row.metric_mean = mean_of(metrics);
                    row.metric_std = std_of(metrics);
                    row.time_mean_s = mean_of(times);
                    row.time_std_s = std_of(times);
                    row.overhead_ratio = base_time > 0.0 ? row.time_mean_s / base_time : 0.0;
                }
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

namespace {

std::string fmt(double d) { return Value::from_real(d).to_string(); }

} // namespace

std::string report_to_csv(const BenchReport& report) {
    std::ostringstream out;
    const BenchConfig& c = report.config;
    out << "# dpsql bench: scale=" << fmt(c.scale) << " data_seed=" << c.data_seed
        << " noise_seed=" << c.noise_seed << " reps=" << c.repetitions << "\n";
    out << "query_id,mechanism,epsilon,outcome,metric_kind,metric_mean,metric_std,"
           "time_mean_s,time_std_s,overhead_ratio,n_reps,seed\n";
    for (const auto& r : report.rows) {
        out << r.query_id << "," << mechanism_name(r.mechanism) << "," << fmt(r.epsilon) << ",";
        if (r.answered) {
            out << "answered," << r.metric_kind << "," << fmt(r.metric_mean) << ","
                << fmt(r.metric_std) << "," << fmt(r.time_mean_s) << "," << fmt(r.time_std_s)
                << "," << fmt(r.overhead_ratio);
        } else {
            out << "rejected:" << r.reject_reason << ",,,,,,";
        }
        out << "," << r.n_reps << "," << c.noise_seed << "\n";
    }
    out << "# MMAPE excludes bins whose true count is zero\n";
    out << "# suppressed histogram bins contribute 100% error to MMAPE\n";
    out << "# timing columns (time_mean_s,time_std_s,overhead_ratio) vary run to run; "
           "all other columns are seed-deterministic\n";
    return out.str();
}

} // namespace dpsql
