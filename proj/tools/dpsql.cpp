// dpsql command line: sanitize one query (run), explain the analysis
// without noise (inspect), or run the full benchmark (bench).
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dpsql/bench.hpp"
#include "dpsql/executor.hpp"
#include "dpsql/parser.hpp"
#include "dpsql/sensitivity.hpp"

namespace fs = std::filesystem;
using namespace dpsql;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

uint64_t resolve_seed(bool seed_set, uint64_t seed_flag) {
    if (seed_set) return seed_flag;
    if (const char* env = std::getenv("DPSQL_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

struct LedgerFile {
    std::string path;

    // Sum of previously charged epsilon/delta in the persisted CSV.
    std::pair<double, double> replay() const {
        std::ifstream in(path);
        if (!in) return {0.0, 0.0};
        std::string line;
        double eps = 0.0, delta = 0.0;
        bool header = true;
        while (std::getline(in, line)) {
            if (header) {
                header = false;
                continue;
            }
            std::istringstream ss(line);
            std::string fp, e, d;
            std::getline(ss, fp, ',');
            std::getline(ss, e, ',');
            std::getline(ss, d, ',');
            if (!e.empty()) eps += std::stod(e);
            if (!d.empty()) delta += std::stod(d);
        }
        return {eps, delta};
    }

    void append(const Budget& budget) const {
        bool fresh = !fs::exists(path);
        std::ofstream out(path, std::ios::app);
        if (!out) throw ConfigError("cannot open ledger file: " + path);
        if (fresh) out << "fingerprint,epsilon,delta,mechanism,outcome\n";
        for (const auto& e : budget.ledger()) {
            out << e.fingerprint << "," << e.epsilon << "," << e.delta << "," << e.mechanism
                << "," << composition_name(e.composition) << "\n";
        }
    }
};

void print_bounds(const ClassifiedQuery& q, const Database& db, const Catalog& cat) {
    std::cout << "global sensitivity:  " << global_sensitivity(q, cat).to_string() << "\n";
    try {
        std::cout << "elastic sensitivity: " << elastic_sensitivity(q, db, cat).to_string()
                  << "\n";
    } catch (const UnsupportedAggregate& e) {
        std::cout << "elastic sensitivity: n/a (" << e.what() << ")\n";
    }
    std::cout << "stability composed:  " << stability_composed_sensitivity(q, cat).to_string();
    auto chain = stability_chain(q);
    if (!chain.empty()) {
        std::cout << "  [chain:";
        for (auto t : chain) std::cout << " " << transform_name(t);
        std::cout << " -> c=" << stability(chain).c << "]";
    }
    std::cout << "\n";
}

int cmd_run(const std::string& sql, const std::string& catalog_path, const std::string& data_dir,
            const std::string& mechanism_flag, double epsilon, double delta, uint64_t seed,
            int64_t k, const std::string& suppressor_flag, double tau_flag, int saa_partitions,
            const std::string& ledger_path, double budget_eps, double budget_delta) {
    Catalog cat = load_catalog(catalog_path);
    Database db = load_database(data_dir, cat);
    ClassifiedQuery q = classify(parse(sql), cat);

    PrivacyParams params;
    params.epsilon = epsilon;
    params.delta = delta;
    params.seed = seed;
    params.histogram_suppressor = suppressor_from_name(suppressor_flag);
    if (tau_flag > 0) params.tau = tau_flag;
    params.saa_partitions = saa_partitions;
    if (!mechanism_flag.empty()) {
        params.mechanism = mechanism_from_name(mechanism_flag);
    } else {
        params.mechanism = choose_mechanism(q, cat).value_or(Mechanism::LaplaceGS);
    }

    double total_eps = budget_eps > 0 ? budget_eps : epsilon;
    double total_delta = budget_delta >= 0 ? budget_delta : delta;
    Budget budget(total_eps, total_delta);
    if (!ledger_path.empty()) {
        auto [spent_e, spent_d] = LedgerFile{ledger_path}.replay();
        budget.restore(spent_e, spent_d);
    }

    std::optional<KAnonParams> gate;
    if (k > 0) gate = KAnonParams{k};

    SanitizedResult res = sanitize_query(q, db, cat, params, budget, gate);

    std::cout << "query:     " << render(q.ast) << "\n";
    std::cout << "class:     " << query_class_name(q.cls) << "\n";
    std::cout << "mechanism: " << mechanism_name(res.mechanism) << "\n";
    std::cout << "sensitivity applied: " << res.sensitivity.to_string() << "\n";
    std::cout << "charged:   epsilon=" << res.epsilon_charged << " delta=" << res.delta_charged
              << "\n";
    if (res.kind == SanitizedResult::Kind::Histogram)
        std::cout << "suppressed bins: " << res.suppressed_bin_count << "\n";
    std::cout << "result:\n" << res.to_string() << "\n";
    for (const auto& e : budget.ledger()) {
        std::cout << "ledger: " << e.fingerprint << " epsilon=" << e.epsilon
                  << " delta=" << e.delta << " mechanism=" << e.mechanism
                  << " outcome=" << composition_name(e.composition) << "\n";
    }
    std::cout << "budget: spent " << budget.epsilon_spent() << "/" << budget.epsilon_total()
              << " epsilon, " << budget.delta_spent() << "/" << budget.delta_total()
              << " delta\n";
    if (!ledger_path.empty()) LedgerFile{ledger_path}.append(budget);
    return 0;
}

int cmd_inspect(const std::string& sql, const std::string& catalog_path,
                const std::string& data_dir) {
    Catalog cat = load_catalog(catalog_path);
    Database db = load_database(data_dir, cat);
    QueryAst ast = parse(sql);
    std::cout << "parsed: " << render(ast) << "\n";
    ClassifiedQuery q = classify(ast, cat);
    std::cout << "bound:  " << render(q.ast, true) << "\n";
    std::cout << "class:  " << query_class_name(q.cls) << "\n";
    print_bounds(q, db, cat);
    auto mech = choose_mechanism(q, cat);
    std::cout << "engine would pick: " << (mech ? mechanism_name(*mech) : "none (rejected)")
              << "\n";
    return 0;
}

int cmd_bench(double scale, int reps, const std::string& epsilons_flag, const std::string& out,
              uint64_t data_seed, uint64_t noise_seed, const std::string& unit,
              const std::string& export_dir) {
    BenchConfig config;
    config.scale = scale;
    config.repetitions = reps;
    config.data_seed = data_seed;
    config.noise_seed = noise_seed;
    config.epsilons.clear();
    std::istringstream ss(epsilons_flag);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) config.epsilons.push_back(std::stod(tok));
    }

    PrivacyUnit u = unit == "tuple" ? PrivacyUnit::Tuple : PrivacyUnit::User;
    Catalog cat = sales_catalog(u);
    Database db = generate_data(config.scale, config.data_seed);
    db.validate(cat);

    if (!export_dir.empty()) {
        write_database(db, export_dir);
        std::ofstream tc(fs::path(export_dir) / "sales_tuple.catalog");
        tc << serialize_catalog(sales_catalog(PrivacyUnit::Tuple));
        std::ofstream uc(fs::path(export_dir) / "sales_user.catalog");
        uc << serialize_catalog(sales_catalog(PrivacyUnit::User));
        std::cerr << "data exported to " << export_dir << "\n";
    }

    BenchReport report = run_suite(config, cat, db);
    std::string csv = report_to_csv(report);
    if (out.empty() || out == "-") {
        std::cout << csv;
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw ConfigError("cannot open output file: " + out);
        f << csv;
        std::cerr << "report written to " << out << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"differentially private SQL query sanitization engine"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "sanitize a single query");
    std::string sql, sql_file, catalog_path, data_dir, mechanism, suppressor = "tau", ledger;
    double epsilon = 1.0, delta = 0.0, tau = 0.0, budget_eps = 0.0, budget_delta = -1.0;
    uint64_t seed = 0;
    bool seed_set = false;
    int64_t k = 0;
    int saa_partitions = 10;
    run->add_option("--sql", sql, "query text");
    run->add_option("--sql-file", sql_file, "file containing the query");
    run->add_option("--catalog", catalog_path, "catalog file")->required();
    run->add_option("--data-dir", data_dir, "directory of .tbl files")->required();
    run->add_option("--mechanism", mechanism,
                    "laplace-gs | laplace-elastic | saa | bounded-sum (default: engine choice)");
    run->add_option("--epsilon", epsilon, "privacy budget for this query");
    run->add_option("--delta", delta, "delta for this query");
    run->add_option("--seed", seed, "noise seed (fallback: DPSQL_SEED env var)")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    run->add_option("--k", k, "enable the k-anonymity gate with this k");
    run->add_option("--tau", tau, "histogram suppression threshold");
    run->add_option("--suppressor", suppressor, "tau | sticky | none");
    run->add_option("--saa-partitions", saa_partitions, "partition count for saa");
    run->add_option("--ledger", ledger, "persist the budget ledger to this CSV");
    run->add_option("--budget-epsilon", budget_eps, "total epsilon budget (default: --epsilon)");
    run->add_option("--budget-delta", budget_delta, "total delta budget (default: --delta)");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "print the analysis, no noise, no charge");
    std::string i_sql, i_sql_file, i_catalog, i_data;
    inspect->add_option("--sql", i_sql, "query text");
    inspect->add_option("--sql-file", i_sql_file, "file containing the query");
    inspect->add_option("--catalog", i_catalog, "catalog file")->required();
    inspect->add_option("--data-dir", i_data, "directory of .tbl files")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "run the benchmark suite");
    double scale = 0.001;
    int reps = 25;
    std::string epsilons = "0.1,1,10", out, unit = "user", export_dir;
    uint64_t data_seed = 1, noise_seed = 2;
    bench->add_option("--scale", scale, "data scale (0.001 is roughly 8.7k rows)");
    bench->add_option("--reps", reps, "repetitions per cell");
    bench->add_option("--epsilons", epsilons, "comma-separated epsilon sweep");
    bench->add_option("--out", out, "CSV output path (default stdout)");
    bench->add_option("--data-seed", data_seed, "generator seed");
    bench->add_option("--noise-seed", noise_seed, "mechanism seed");
    bench->add_option("--unit", unit, "privacy unit of the bench catalog: user | tuple");
    bench->add_option("--data-dir", export_dir,
                      "also export the generated tables plus both catalogs here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help exits clean, usage errors exit 2
    }

    try {
        if (run->parsed()) {
            if (sql.empty() && !sql_file.empty()) sql = read_file(sql_file);
            if (sql.empty()) {
                std::cerr << "error: --sql or --sql-file required\n";
                return 2;
            }
            return cmd_run(sql, catalog_path, data_dir, mechanism, epsilon, delta,
                           resolve_seed(seed_set, seed), k, suppressor, tau, saa_partitions,
                           ledger, budget_eps, budget_delta);
        }
        if (inspect->parsed()) {
            if (i_sql.empty() && !i_sql_file.empty()) i_sql = read_file(i_sql_file);
            if (i_sql.empty()) {
                std::cerr << "error: --sql or --sql-file required\n";
                return 2;
            }
            return cmd_inspect(i_sql, i_catalog, i_data);
        }
        if (bench->parsed()) {
            return cmd_bench(scale, reps, epsilons, out, data_seed, noise_seed, unit, export_dir);
        }
    } catch (const RejectedQuery& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
