#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dpsql/bench.hpp"
#include "dpsql/executor.hpp"
#include "test_util.hpp"

using namespace dpsql;
namespace fs = std::filesystem;

TEST_CASE("mean relative error formula") {
    CHECK(mre(200.0, {190.0, 210.0, 200.0}) == doctest::Approx(10.0 / 3.0));
    CHECK(mre(200.0, {200.0, 200.0}) == 0.0);
    CHECK_THROWS_AS(mre(0.0, {1.0}), ZeroTrueValue);
}

TEST_CASE("histogram error formula") {
    auto bin = [](int64_t c, double v) { return std::make_pair(Value::from_int(c), v); };
    // one bin degenerates to the scalar relative error
    CHECK(mmape({bin(1, 10.0)}, {{bin(1, 11.0)}}) == doctest::Approx(10.0));
    // (10% + 10%) / 2
    CHECK(mmape({bin(1, 10.0), bin(2, 20.0)}, {{bin(1, 11.0), bin(2, 18.0)}}) ==
          doctest::Approx(10.0));
    // suppressed bins count as a total loss for that category
    CHECK(mmape({bin(1, 10.0)}, {{}}) == doctest::Approx(100.0));
    // zero true bins must be excluded by the caller
    CHECK_THROWS_AS(mmape({bin(1, 0.0)}, {{}}), EmptyTrueHistogram);
    CHECK_THROWS_AS(mmape({}, {{}}), EmptyTrueHistogram);
}

TEST_CASE("generated proportions track the fixed ratios") {
    Database db = generate_data(0.001, 1);
    CHECK(db.table("region").rows.size() == 5);
    CHECK(db.table("nation").rows.size() == 25);
    CHECK(db.table("customer").rows.size() == 150);
    CHECK(db.table("orders").rows.size() == 1500);
    CHECK(db.table("part").rows.size() == 200);
    CHECK(db.table("supplier").rows.size() == 10);
    CHECK(db.table("partsupp").rows.size() == 800);
    // lineitem draws 1..7 lines per order, averaging 4x orders
    double ratio = static_cast<double>(db.table("lineitem").rows.size()) / 1500.0;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
    // roughly 8.7k tuples at this scale, mirroring ~8.7e6 at full scale
    CHECK(db.total_rows() > 7000);
    CHECK(db.total_rows() < 10000);

    // the fixed dimension stays fixed at every scale
    CHECK(generate_data(0.0002, 1).table("region").rows.size() == 5);
}

TEST_CASE("generation is deterministic per (scale, seed)") {
    Database a = generate_data(0.0003, 14);
    Database b = generate_data(0.0003, 14);
    CHECK(a.fingerprint() == b.fingerprint());
    Database c = generate_data(0.0003, 15);
    CHECK(a.fingerprint() != c.fingerprint());

    // byte-identical table files
    fs::path dir_a = fs::temp_directory_path() / "dpsql_gen_a";
    fs::path dir_b = fs::temp_directory_path() / "dpsql_gen_b";
    write_database(a, dir_a.string());
    write_database(b, dir_b.string());
    for (const auto& [name, _] : a.tables) {
        std::ifstream fa(dir_a / (name + ".tbl"), std::ios::binary);
        std::ifstream fb(dir_b / (name + ".tbl"), std::ios::binary);
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        CHECK(sa.str() == sb.str());
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("tbl round trip preserves the instance") {
    Catalog cat = sales_catalog(PrivacyUnit::Tuple);
    Database db = generate_data(0.0002, 31);
    fs::path dir = fs::temp_directory_path() / "dpsql_gen_rt";
    write_database(db, dir.string());
    Database back = load_database(dir.string(), cat);
    CHECK(back.fingerprint() == db.fingerprint());
    fs::remove_all(dir);
}

namespace {

std::string strip_timing_columns(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') {
            out << line << "\n";
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i >= 7 && i <= 9) continue;  // time_mean_s, time_std_s, overhead_ratio
            out << cells[i] << ",";
        }
        out << "\n";
    }
    return out.str();
}

} // namespace

TEST_CASE("run_suite fills the whole grid deterministically") {
    Catalog cat = sales_catalog(PrivacyUnit::User);
    Database db = generate_data(0.0002, 1);
    BenchConfig cfg;
    cfg.repetitions = 3;
    cfg.epsilons = {0.5, 5.0};

    BenchReport r1 = run_suite(cfg, cat, db);
    CHECK(r1.rows.size() == default_suite().size() * cfg.mechanisms.size() * cfg.epsilons.size());

    // the MIN query is a rejection row for every mechanism and epsilon
    int min_rows = 0;
    for (const auto& row : r1.rows) {
        if (row.query_id != "min") continue;
        ++min_rows;
        CHECK(!row.answered);
        CHECK(row.reject_reason == "UnboundedSensitivity");
        CHECK(row.metric_kind.empty());
    }
    CHECK(min_rows == static_cast<int>(cfg.mechanisms.size() * cfg.epsilons.size()));

    // answered rows carry finite metrics
    for (const auto& row : r1.rows) {
        if (!row.answered) continue;
        CHECK(std::isfinite(row.metric_mean));
        CHECK((row.metric_kind == "MRE" || row.metric_kind == "MMAPE"));
    }

    BenchReport r2 = run_suite(cfg, cat, db);
    CHECK(strip_timing_columns(report_to_csv(r1)) == strip_timing_columns(report_to_csv(r2)));
}

TEST_CASE("histogram suite rows use the histogram metric") {
    Catalog cat = sales_catalog(PrivacyUnit::User);
    Database db = generate_data(0.0002, 1);
    BenchConfig cfg;
    cfg.repetitions = 2;
    cfg.epsilons = {1.0};
    cfg.mechanisms = {Mechanism::LaplaceGS};
    BenchReport r = run_suite(cfg, cat, db);
    for (const auto& row : r.rows) {
        if (row.query_id == "histogram") {
            CHECK(row.answered);
            CHECK(row.metric_kind == "MMAPE");
        }
        if (row.query_id == "count") {
            CHECK(row.answered);
            CHECK(row.metric_kind == "MRE");
        }
    }
}

TEST_CASE("csv carries the documented header and footer") {
    Catalog cat = sales_catalog(PrivacyUnit::User);
    Database db = generate_data(0.0002, 1);
    BenchConfig cfg;
    cfg.repetitions = 1;
    cfg.epsilons = {1.0};
    cfg.mechanisms = {Mechanism::LaplaceGS};
    std::string csv = report_to_csv(run_suite(cfg, cat, db));
    CHECK(csv.find("query_id,mechanism,epsilon,outcome,metric_kind,metric_mean,metric_std,"
                   "time_mean_s,time_std_s,overhead_ratio,n_reps,seed\n") != std::string::npos);
    CHECK(csv.find("# MMAPE excludes bins whose true count is zero") != std::string::npos);
}

TEST_CASE("unknown suite references are configuration errors") {
    Catalog cat = sales_catalog(PrivacyUnit::User);
    Database db = generate_data(0.0002, 1);
    BenchConfig cfg;
    cfg.suite = "full-22";
    CHECK_THROWS_AS(run_suite(cfg, cat, db), ConfigError);
    BenchConfig bad_reps;
    bad_reps.repetitions = 0;
    CHECK_THROWS_AS(run_suite(bad_reps, cat, db), ConfigError);
}
