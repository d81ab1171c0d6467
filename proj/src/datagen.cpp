// Synthetic sales/supply-chain instance in fixed table proportions
// (per-table rows scale linearly; region and nation stay constant).
#include <algorithm>
#include <cmath>

#include "dpsql/bench.hpp"
#include "dpsql/rng.hpp"

namespace dpsql {

namespace {

const char* kRegions[5] = {"AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"};

struct NationDef {
    const char* name;
    int region;
};

const NationDef kNations[25] = {
    {"ALGERIA", 0},  {"ARGENTINA", 1}, {"BRAZIL", 1},       {"CANADA", 1},
    {"EGYPT", 4},    {"ETHIOPIA", 0},  {"FRANCE", 3},       {"GERMANY", 3},
    {"INDIA", 2},    {"INDONESIA", 2}, {"IRAN", 4},         {"IRAQ", 4},
    {"JAPAN", 2},    {"JORDAN", 4},    {"KENYA", 0},        {"MOROCCO", 0},
    {"MOZAMBIQUE", 0}, {"PERU", 1},    {"CHINA", 2},        {"ROMANIA", 3},
    {"SAUDI ARABIA", 4}, {"VIETNAM", 2}, {"RUSSIA", 3},     {"UNITED KINGDOM", 3},
    {"UNITED STATES", 1},
};

const char* kSegments[5] = {"AUTOMOBILE", "BUILDING", "FURNITURE", "HOUSEHOLD", "MACHINERY"};

const char* kWords[16] = {
    "carefully", "furiously", "quickly",  "ironic",  "pending", "final",   "bold",    "regular",
    "deposits",  "requests",  "accounts", "packages", "foxes",  "theodolites", "ideas", "platelets",
};

// Value ranges shared by the catalog and the generator; the generator
// contract test asserts every generated value stays inside them.
constexpr double kAcctLo = -999.99, kAcctHi = 9999.99;
constexpr double kRetailLo = 900.0, kRetailHi = 2100.0;
constexpr double kSupplyLo = 1.0, kSupplyHi = 1000.0;
constexpr double kTotalLo = 850.0, kTotalHi = 560000.0;
constexpr double kExtendedLo = 900.0, kExtendedHi = 105000.0;
constexpr int64_t kQtyLo = 1, kQtyHi = 50;
constexpr int64_t kAvailLo = 1, kAvailHi = 9999;
const char* kOrderDateLo = "1992-01-01";
const char* kOrderDateHi = "1998-08-02";
const char* kShipDateLo = "1992-01-01";
const char* kShipDateHi = "1998-12-01";
constexpr int kMaxLinesPerOrder = 7;
constexpr int kOrdersPerCustomer = 10;

ColumnMeta col(const char* name, Dtype t) { return ColumnMeta{name, t, std::nullopt, {}}; }

ColumnMeta col_int(const char* name, int64_t lo, int64_t hi) {
    return ColumnMeta{name, Dtype::Int,
                      std::make_pair(Value::from_int(lo), Value::from_int(hi)), {}};
}

ColumnMeta col_real(const char* name, double lo, double hi) {
    return ColumnMeta{name, Dtype::Real,
                      std::make_pair(Value::from_real(lo), Value::from_real(hi)), {}};
}

ColumnMeta col_date(const char* name, const char* lo, const char* hi) {
    return ColumnMeta{name, Dtype::Date,
                      std::make_pair(Value::from_date(parse_date(lo)), Value::from_date(parse_date(hi))),
                      {}};
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

double uniform_in(Rng& rng, double lo, double hi) {
    return std::clamp(round2(lo + rng.uniform01() * (hi - lo)), lo, hi);
}

std::string padded(const char* prefix, int64_t k) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%s#%09lld", prefix, static_cast<long long>(k));
    return buf;
}

std::string comment_text(Rng& rng) {
    std::string out;
    size_t n = 2 + rng.below(3);
    for (size_t i = 0; i < n; ++i) {
        if (i) out += " ";
        out += kWords[rng.below(16)];
    }
    return out;
}

} // namespace

Catalog sales_catalog(PrivacyUnit unit) {
    Catalog cat;
    cat.privacy_unit = unit;

    TableMeta region;
    region.name = "region";
    region.columns = {col_int("r_regionkey", 0, 4), col("r_name", Dtype::Text),
                      col("r_comment", Dtype::Text)};
    for (const char* r : kRegions) region.columns[1].domain.push_back(Value::from_text(r));
    region.primary_key = {"r_regionkey"};

    TableMeta nation;
    nation.name = "nation";
    nation.columns = {col_int("n_nationkey", 0, 24), col("n_name", Dtype::Text),
                      col_int("n_regionkey", 0, 4)};
    for (const auto& n : kNations) nation.columns[1].domain.push_back(Value::from_text(n.name));
    nation.primary_key = {"n_nationkey"};
    nation.foreign_keys = {{"n_regionkey", "region", "r_regionkey"}};

    TableMeta supplier;
    supplier.name = "supplier";
    supplier.columns = {col("s_suppkey", Dtype::Int), col("s_name", Dtype::Text),
                        col_int("s_nationkey", 0, 24), col_real("s_acctbal", kAcctLo, kAcctHi)};
    supplier.primary_key = {"s_suppkey"};
    supplier.foreign_keys = {{"s_nationkey", "nation", "n_nationkey"}};

    TableMeta part;
    part.name = "part";
    part.columns = {col("p_partkey", Dtype::Int), col("p_name", Dtype::Text),
                    col_real("p_retailprice", kRetailLo, kRetailHi)};
    part.primary_key = {"p_partkey"};

    TableMeta partsupp;
    partsupp.name = "partsupp";
    partsupp.columns = {col("ps_partkey", Dtype::Int), col("ps_suppkey", Dtype::Int),
                        col_int("ps_availqty", kAvailLo, kAvailHi),
                        col_real("ps_supplycost", kSupplyLo, kSupplyHi)};
    partsupp.primary_key = {"ps_partkey", "ps_suppkey"};
    partsupp.foreign_keys = {{"ps_partkey", "part", "p_partkey"},
                             {"ps_suppkey", "supplier", "s_suppkey"}};

    TableMeta customer;
    customer.name = "customer";
    customer.columns = {col("c_custkey", Dtype::Int),       col("c_name", Dtype::Text),
                        col_int("c_nationkey", 0, 24),      col_real("c_acctbal", kAcctLo, kAcctHi),
                        col("c_mktsegment", Dtype::Text),   col("c_comment", Dtype::Text)};
    for (const char* s : kSegments) customer.columns[4].domain.push_back(Value::from_text(s));
    customer.primary_key = {"c_custkey"};
    customer.foreign_keys = {{"c_nationkey", "nation", "n_nationkey"}};

    TableMeta orders;
    orders.name = "orders";
    orders.columns = {col("o_orderkey", Dtype::Int), col("o_custkey", Dtype::Int),
                      col("o_orderstatus", Dtype::Text),
                      col_real("o_totalprice", kTotalLo, kTotalHi),
                      col_date("o_orderdate", kOrderDateLo, kOrderDateHi)};
    orders.columns[2].domain = {Value::from_text("F"), Value::from_text("O"),
                                Value::from_text("P")};
    orders.primary_key = {"o_orderkey"};
    orders.foreign_keys = {{"o_custkey", "customer", "c_custkey"}};

    TableMeta lineitem;
    lineitem.name = "lineitem";
    lineitem.columns = {col("l_orderkey", Dtype::Int),
                        col_int("l_linenumber", 1, kMaxLinesPerOrder),
                        col("l_partkey", Dtype::Int),
                        col("l_suppkey", Dtype::Int),
                        col_int("l_quantity", kQtyLo, kQtyHi),
                        col_real("l_extendedprice", kExtendedLo, kExtendedHi),
                        col_real("l_discount", 0.0, 0.1),
                        col_date("l_shipdate", kShipDateLo, kShipDateHi)};
    lineitem.primary_key = {"l_orderkey", "l_linenumber"};
    lineitem.foreign_keys = {{"l_orderkey", "orders", "o_orderkey"},
                             {"l_partkey", "part", "p_partkey"},
                             {"l_suppkey", "supplier", "s_suppkey"}};

    if (unit == PrivacyUnit::User) {
        customer.pid_column = "c_custkey";
        customer.max_user_contribution = 1;
        orders.max_user_contribution = kOrdersPerCustomer;
        lineitem.max_user_contribution = kOrdersPerCustomer * kMaxLinesPerOrder;
    }

    for (auto& tm : {region, nation, supplier, part, partsupp, customer, orders, lineitem})
        cat.tables.emplace(tm.name, tm);
    cat.validate();
    return cat;
}

Database generate_data(double scale, uint64_t seed) {
    if (!(scale > 0.0)) throw InvalidParams("scale must be positive");
    Catalog cat = sales_catalog(PrivacyUnit::Tuple);

    auto sized = [scale](double sf1) {
        return std::max<int64_t>(1, std::llround(scale * sf1));
    };
    const int64_t n_customer = sized(150000.0);
    const int64_t n_orders = n_customer * kOrdersPerCustomer;  // SF ratio 1.5e6 : 1.5e5
    const int64_t n_supplier = sized(10000.0);
    const int64_t n_part = sized(200000.0);

    Database db;
    auto start_table = [&](const std::string& name) {
        Table t;
        t.name = name;
        for (const auto& c : cat.table(name).columns) {
            t.columns.push_back(c.name);
            t.types.push_back(c.dtype);
        }
        return t;
    };
    auto table_rng = [&](const std::string& name) {
        return Rng(mix64(seed, hash_string(name, 3)));
    };

    {
        Table t = start_table("region");
        Rng rng = table_rng("region");
        for (int64_t i = 0; i < 5; ++i) {
            t.rows.push_back({Value::from_int(i), Value::from_text(kRegions[i]),
                              Value::from_text(comment_text(rng))});
        }
        db.tables.emplace("region", std::move(t));
    }
    {
        Table t = start_table("nation");
        for (int64_t i = 0; i < 25; ++i) {
            t.rows.push_back({Value::from_int(i), Value::from_text(kNations[i].name),
                              Value::from_int(kNations[i].region)});
        }
        db.tables.emplace("nation", std::move(t));
    }
    {
        Table t = start_table("supplier");
        Rng rng = table_rng("supplier");
        for (int64_t i = 1; i <= n_supplier; ++i) {
            t.rows.push_back({Value::from_int(i), Value::from_text(padded("Supplier", i)),
                              Value::from_int(static_cast<int64_t>(rng.below(25))),
                              Value::from_real(uniform_in(rng, kAcctLo, kAcctHi))});
        }
        db.tables.emplace("supplier", std::move(t));
    }
    {
        Table t = start_table("part");
        Rng rng = table_rng("part");
        for (int64_t i = 1; i <= n_part; ++i) {
            t.rows.push_back({Value::from_int(i), Value::from_text(padded("Part", i)),
                              Value::from_real(uniform_in(rng, kRetailLo, kRetailHi))});
        }
        db.tables.emplace("part", std::move(t));
    }
    {
        Table t = start_table("partsupp");
        Rng rng = table_rng("partsupp");
        int64_t per_part = std::min<int64_t>(4, n_supplier);
        for (int64_t p = 1; p <= n_part; ++p) {
            for (int64_t j = 0; j < per_part; ++j) {
                int64_t s = 1 + (p + j * 7) % n_supplier;
                t.rows.push_back({Value::from_int(p), Value::from_int(s),
                                  Value::from_int(kAvailLo + static_cast<int64_t>(
                                                                 rng.below(kAvailHi - kAvailLo + 1))),
                                  Value::from_real(uniform_in(rng, kSupplyLo, kSupplyHi))});
            }
        }
        db.tables.emplace("partsupp", std::move(t));
    }
    {
        Table t = start_table("customer");
        Rng rng = table_rng("customer");
        for (int64_t i = 1; i <= n_customer; ++i) {
            t.rows.push_back({Value::from_int(i), Value::from_text(padded("Customer", i)),
                              Value::from_int(static_cast<int64_t>(rng.below(25))),
                              Value::from_real(uniform_in(rng, kAcctLo, kAcctHi)),
                              Value::from_text(kSegments[rng.below(5)]),
                              Value::from_text(comment_text(rng))});
        }
        db.tables.emplace("customer", std::move(t));
    }

    const int64_t date_lo = parse_date(kOrderDateLo);
    const int64_t date_hi = parse_date(kOrderDateHi);
    std::vector<int64_t> order_dates(n_orders);
    {
        Table t = start_table("orders");
        Rng rng = table_rng("orders");
        for (int64_t i = 1; i <= n_orders; ++i) {
            // Round-robin ownership keeps every customer at exactly
            // kOrdersPerCustomer orders, matching the declared bound.
            int64_t cust = 1 + (i - 1) % n_customer;
            uint64_t slice = rng.below(1000);
            const char* status = slice < 485 ? "F" : (slice < 970 ? "O" : "P");
            int64_t date = date_lo + static_cast<int64_t>(rng.below(date_hi - date_lo + 1));
            order_dates[i - 1] = date;
            t.rows.push_back({Value::from_int(i), Value::from_int(cust), Value::from_text(status),
                              Value::from_real(uniform_in(rng, kTotalLo, kTotalHi)),
                              Value::from_date(date)});
        }
        db.tables.emplace("orders", std::move(t));
    }
    {
        Table t = start_table("lineitem");
        Rng rng = table_rng("lineitem");
        const int64_t ship_hi = parse_date(kShipDateHi);
        for (int64_t o = 1; o <= n_orders; ++o) {
            int64_t lines = 1 + static_cast<int64_t>(rng.below(kMaxLinesPerOrder));
            for (int64_t ln = 1; ln <= lines; ++ln) {
                int64_t ship = order_dates[o - 1] + static_cast<int64_t>(rng.below(122));
                ship = std::min(ship, ship_hi);
                t.rows.push_back(
                    {Value::from_int(o), Value::from_int(ln),
                     Value::from_int(1 + static_cast<int64_t>(rng.below(n_part))),
                     Value::from_int(1 + static_cast<int64_t>(rng.below(n_supplier))),
                     Value::from_int(kQtyLo + static_cast<int64_t>(rng.below(kQtyHi - kQtyLo + 1))),
                     Value::from_real(uniform_in(rng, kExtendedLo, kExtendedHi)),
                     Value::from_real(std::clamp(round2(rng.uniform01() * 0.1), 0.0, 0.1)),
                     Value::from_date(ship)});
            }
        }
        db.tables.emplace("lineitem", std::move(t));
    }
    return db;
}

} // namespace dpsql
