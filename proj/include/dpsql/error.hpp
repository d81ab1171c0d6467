// Error taxonomy. Hard faults are exceptions; query rejection is a
// first-class outcome (RejectedQuery) that the bench records as a row.
#pragma once

#include <stdexcept>
#include <string>

namespace dpsql {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ---- catalog ----
enum class CatalogErrorKind { Malformed, InvalidReference, InvalidRange, AmbiguousPid, MissingPid };

class CatalogError : public Error {
public:
    CatalogError(CatalogErrorKind k, const std::string& msg) : Error(msg), kind(k) {}
    CatalogErrorKind kind;
};

// ---- sql frontend ----
class SyntaxError : public Error {
public:
    SyntaxError(size_t position, const std::string& token, const std::string& msg)
        : Error(msg + " (at offset " + std::to_string(position) + ", near '" + token + "')"),
          position(position), token(token) {}
    size_t position;
    std::string token;
};

class UnsupportedFeature : public Error {
public:
    UnsupportedFeature(std::string feature, const std::string& msg)
        : Error(msg), feature(std::move(feature)) {}
    std::string feature;
};

enum class BindErrorKind { UnknownTable, UnknownColumn, AmbiguousColumn, TypeMismatch };

class BindError : public Error {
public:
    BindError(BindErrorKind k, const std::string& msg) : Error(msg), kind(k) {}
    BindErrorKind kind;
};

// ---- executor ----
enum class ExecErrorKind { TypeMismatch, AvgOfEmpty, EmptyAggregate };

class ExecError : public Error {
public:
    ExecError(ExecErrorKind k, const std::string& msg) : Error(msg), kind(k) {}
    ExecErrorKind kind;
};

// ---- sensitivity ----
class UnsupportedAggregate : public Error {
public:
    explicit UnsupportedAggregate(const std::string& msg) : Error(msg) {}
};

class UnknownTransformation : public Error {
public:
    explicit UnknownTransformation(const std::string& msg) : Error(msg) {}
};

class DomainTooLarge : public Error {
public:
    explicit DomainTooLarge(const std::string& msg) : Error(msg) {}
};

class NoPidPath : public Error {
public:
    explicit NoPidPath(const std::string& msg) : Error(msg) {}
};

// ---- mechanisms / accountant ----
class InvalidScale : public Error {
public:
    explicit InvalidScale(const std::string& msg) : Error(msg) {}
};

class InvalidParams : public Error {
public:
    explicit InvalidParams(const std::string& msg) : Error(msg) {}
};

enum class RejectReason {
    UnboundedSensitivity,
    BudgetExhausted,
    Unsupported,
    NoSuppressor,
    DegenerateDenominator,
    MissingRange,
    BelowK,
    NoPidPath,
};

std::string reject_reason_name(RejectReason r);

class RejectedQuery : public Error {
public:
    RejectedQuery(RejectReason r, const std::string& detail)
        : Error("rejected: " + reject_reason_name(r) + (detail.empty() ? "" : " (" + detail + ")")),
          reason(r), detail(detail) {}
    RejectReason reason;
    std::string detail;
};

class BudgetExhausted : public Error {
public:
    explicit BudgetExhausted(const std::string& msg) : Error(msg) {}
};

// ---- bench ----
class ZeroTrueValue : public Error {
public:
    explicit ZeroTrueValue(const std::string& msg) : Error(msg) {}
};

class EmptyTrueHistogram : public Error {
public:
    explicit EmptyTrueHistogram(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace dpsql
