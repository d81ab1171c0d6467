#include "doctest.h"
#include "dpsql/accountant.hpp"
#include "dpsql/rng.hpp"

using namespace dpsql;

namespace {

LedgerEntry entry(const std::string& fp) {
    LedgerEntry e;
    e.fingerprint = fp;
    e.mechanism = "laplace-gs";
    e.timestamp = "2026-01-01T00:00:00Z";
    return e;
}

} // namespace

TEST_CASE("charges accumulate until the budget runs out") {
    Budget b(1.0, 0.0);
    b.charge(0.4, 0.0, entry("a"));
    b.charge(0.4, 0.0, entry("b"));
    CHECK(b.epsilon_spent() == doctest::Approx(0.8));
    CHECK_THROWS_AS(b.charge(0.4, 0.0, entry("c")), BudgetExhausted);
    CHECK(b.epsilon_spent() == doctest::Approx(0.8));
    CHECK(b.ledger().size() == 2);
}

TEST_CASE("zero epsilon violates the charge precondition") {
    Budget b(1.0, 0.0);
    CHECK_THROWS_AS(b.charge(0.0, 0.0, entry("a")), InvalidParams);
    CHECK_THROWS_AS(b.charge(-1.0, 0.0, entry("a")), InvalidParams);
    CHECK(b.ledger().empty());
}

TEST_CASE("parallel composition is one tagged entry") {
    Budget b(2.0, 0.0);
    LedgerEntry e = entry("hist");
    e.composition = Composition::Parallel;
    b.charge(1.0, 0.0, e);  // three bins, one epsilon total
    REQUIRE(b.ledger().size() == 1);
    CHECK(b.ledger()[0].composition == Composition::Parallel);
    CHECK(b.epsilon_spent() == 1.0);
}

TEST_CASE("a failed charge leaves the budget bit-identical") {
    Budget b(1.0, 0.001);
    b.charge(0.5, 0.0005, entry("x"));
    double e0 = b.epsilon_spent(), d0 = b.delta_spent();
    size_t n0 = b.ledger().size();
    std::string csv0 = b.export_csv();
    CHECK_THROWS_AS(b.charge(0.6, 0.0, entry("y")), BudgetExhausted);
    CHECK_THROWS_AS(b.charge(0.1, 0.001, entry("z")), BudgetExhausted);
    CHECK(b.epsilon_spent() == e0);
    CHECK(b.delta_spent() == d0);
    CHECK(b.ledger().size() == n0);
    CHECK(b.export_csv() == csv0);
}

TEST_CASE("conservation over a randomized charge sequence") {
    Rng rng(99);
    Budget b(50.0, 0.01);
    double expect_eps = 0.0, expect_delta = 0.0;
    int accepted = 0, rejected = 0;
    for (int i = 0; i < 1000; ++i) {
        double eps = 0.01 + 0.2 * rng.uniform01();
        double delta = rng.below(4) == 0 ? 1e-5 * rng.uniform01() : 0.0;
        try {
            b.charge(eps, delta, entry("q" + std::to_string(i)));
            expect_eps += eps;
            expect_delta += delta;
            ++accepted;
        } catch (const BudgetExhausted&) {
            ++rejected;
        }
        CHECK(b.epsilon_spent() == expect_eps);
        CHECK(b.delta_spent() == expect_delta);
        CHECK(b.epsilon_spent() <= b.epsilon_total());
        CHECK(b.delta_spent() <= b.delta_total());
    }
    // ledger sums equal the spent totals exactly
    double ledger_eps = 0.0, ledger_delta = 0.0;
    for (const auto& e : b.ledger()) {
        ledger_eps += e.epsilon;
        ledger_delta += e.delta;
    }
    CHECK(ledger_eps == b.epsilon_spent());
    CHECK(ledger_delta == b.delta_spent());
    CHECK(accepted == static_cast<int>(b.ledger().size()));
    CHECK(rejected > 0);
}

TEST_CASE("csv export carries the documented columns") {
    Budget b(1.0, 0.0);
    b.charge(0.25, 0.0, entry("deadbeef00000000"));
    std::string csv = b.export_csv();
    CHECK(csv.find("fingerprint,epsilon,delta,mechanism,outcome\n") == 0);
    CHECK(csv.find("deadbeef00000000,0.25,0,laplace-gs,sequential") != std::string::npos);
}
