#include "dpsql/accountant.hpp"

#include <cmath>
#include <ctime>
#include <sstream>

namespace dpsql {

std::string composition_name(Composition c) {
    return c == Composition::Parallel ? "parallel" : "sequential";
}

void Budget::charge(double eps, double delta, LedgerEntry entry) {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw InvalidParams("charge requires a positive epsilon");
    if (delta < 0.0 || !std::isfinite(delta))
        throw InvalidParams("charge requires a nonnegative delta");
    if (epsilon_spent_ + eps > epsilon_total_ || delta_spent_ + delta > delta_total_)
        throw BudgetExhausted("privacy budget exhausted: spent " + std::to_string(epsilon_spent_) +
                              " of " + std::to_string(epsilon_total_) + " epsilon");
    entry.epsilon = eps;
    entry.delta = delta;
    if (entry.timestamp.empty()) {
        std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        entry.timestamp = buf;
    }
    epsilon_spent_ += eps;
    delta_spent_ += delta;
    ledger_.push_back(std::move(entry));
}

void Budget::restore(double eps_spent, double delta_spent) {
    if (eps_spent < 0 || delta_spent < 0) throw InvalidParams("negative restored spend");
    if (eps_spent > epsilon_total_ || delta_spent > delta_total_)
        throw BudgetExhausted("persisted ledger already exceeds the configured budget");
    epsilon_spent_ = eps_spent;
    delta_spent_ = delta_spent;
}

std::string Budget::export_csv() const {
    std::ostringstream out;
    out << "fingerprint,epsilon,delta,mechanism,outcome\n";
    for (const auto& e : ledger_) {
        out << e.fingerprint << "," << e.epsilon << "," << e.delta << "," << e.mechanism << ","
            << composition_name(e.composition) << "\n";
    }
    return out.str();
}

} // namespace dpsql
