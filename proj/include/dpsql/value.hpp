// Typed cell values shared by the catalog, executor and mechanisms.
#pragma once

#include <cstdint>
#include <string>
#include <variant>

namespace dpsql {

enum class Dtype { Int, Real, Text, Date };

std::string dtype_name(Dtype t);
Dtype dtype_from_name(const std::string& name);

// Dates are stored as days since 1970-01-01 so range checks and
// comparisons are plain integer arithmetic.
int64_t parse_date(const std::string& iso);
std::string format_date(int64_t days);

/// A single typed cell. Date shares the integer payload with Int; the
/// dtype tag keeps rendering and serialization unambiguous.
class Value {
public:
    Value() : type_(Dtype::Int), v_(int64_t{0}) {}
    static Value from_int(int64_t i) { return Value(Dtype::Int, i); }
    static Value from_real(double d) { return Value(Dtype::Real, d); }
    static Value from_text(std::string s) { return Value(Dtype::Text, std::move(s)); }
    static Value from_date(int64_t days) { return Value(Dtype::Date, days); }

    Dtype type() const { return type_; }
    bool is_numeric() const { return type_ == Dtype::Int || type_ == Dtype::Real; }

    int64_t as_int() const { return std::get<int64_t>(v_); }
    double as_real() const { return std::get<double>(v_); }
    const std::string& as_text() const { return std::get<std::string>(v_); }

    // Numeric view used by aggregation; Int and Date promote to double.
    double numeric() const;

    bool operator==(const Value& o) const;
    bool operator!=(const Value& o) const { return !(*this == o); }
    // Total order within a dtype; mixed Int/Real compare numerically.
    bool operator<(const Value& o) const;

    std::string to_string() const;   // display / tbl-file form
    std::string to_sql() const;      // SQL literal form (text quoted)

private:
    Value(Dtype t, int64_t i) : type_(t), v_(i) {}
    Value(Dtype t, double d) : type_(t), v_(d) {}
    Value(Dtype t, std::string s) : type_(t), v_(std::move(s)) {}

    Dtype type_;
    std::variant<int64_t, double, std::string> v_;
};

// Parse a tbl-file cell of the given dtype ("42", "3.14", "1994-01-01", raw text).
Value parse_value(Dtype t, const std::string& text);

uint64_t hash_value(const Value& v);

} // namespace dpsql
