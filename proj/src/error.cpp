#include "dpsql/error.hpp"

namespace dpsql {

std::string reject_reason_name(RejectReason r) {
    switch (r) {
    case RejectReason::UnboundedSensitivity: return "UnboundedSensitivity";
    case RejectReason::BudgetExhausted: return "BudgetExhausted";
    case RejectReason::Unsupported: return "Unsupported";
    case RejectReason::NoSuppressor: return "NoSuppressor";
    case RejectReason::DegenerateDenominator: return "DegenerateDenominator";
    case RejectReason::MissingRange: return "MissingRange";
    case RejectReason::BelowK: return "BelowK";
    case RejectReason::NoPidPath: return "NoPidPath";
    }
    return "Unknown";
}

} // namespace dpsql
