// (epsilon, delta) budget tracking under sequential composition, with
// parallel-tagged entries for disjoint histogram bins.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpsql/error.hpp"

namespace dpsql {

enum class Composition { Sequential, Parallel };

struct LedgerEntry {
    std::string fingerprint;  // query fingerprint, hex
    double epsilon = 0.0;
    double delta = 0.0;
    std::string mechanism;
    Composition composition = Composition::Sequential;
    std::string timestamp;  // ISO-8601; informational only, not exported
};

class Budget {
public:
    Budget(double epsilon_total, double delta_total)
        : epsilon_total_(epsilon_total), delta_total_(delta_total) {}

    double epsilon_total() const { return epsilon_total_; }
    double delta_total() const { return delta_total_; }
    double epsilon_spent() const { return epsilon_spent_; }
    double delta_spent() const { return delta_spent_; }
    double epsilon_remaining() const { return epsilon_total_ - epsilon_spent_; }
    const std::vector<LedgerEntry>& ledger() const { return ledger_; }

    // All-or-nothing: throws BudgetExhausted and leaves the state
    // untouched when the charge would exceed either total. eps must be
    // positive (InvalidParams otherwise).
    void charge(double eps, double delta, LedgerEntry entry);

    // Pre-recorded spend (e.g. replayed from a persisted ledger file).
    void restore(double eps_spent, double delta_spent);

    // CSV with columns fingerprint,epsilon,delta,mechanism,outcome.
    std::string export_csv() const;

private:
    double epsilon_total_;
    double delta_total_;
    double epsilon_spent_ = 0.0;
    double delta_spent_ = 0.0;
    std::vector<LedgerEntry> ledger_;
};

std::string composition_name(Composition c);

} // namespace dpsql
