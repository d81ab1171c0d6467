#include "dpsql/value.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "dpsql/error.hpp"
#include "dpsql/rng.hpp"

namespace dpsql {

std::string dtype_name(Dtype t) {
    switch (t) {
    case Dtype::Int: return "int";
    case Dtype::Real: return "real";
    case Dtype::Text: return "text";
    case Dtype::Date: return "date";
    }
    return "?";
}

Dtype dtype_from_name(const std::string& name) {
    if (name == "int") return Dtype::Int;
    if (name == "real") return Dtype::Real;
    if (name == "text") return Dtype::Text;
    if (name == "date") return Dtype::Date;
    throw Error("unknown dtype: " + name);
}

static bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

static const int kDaysInMonth[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

int64_t parse_date(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' ||
        std::sscanf(iso.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3) {
        throw Error("invalid date literal: '" + iso + "' (expected YYYY-MM-DD)");
    }
    if (m < 1 || m > 12) throw Error("invalid month in date '" + iso + "'");
    int dim = kDaysInMonth[m - 1] + ((m == 2 && is_leap(y)) ? 1 : 0);
    if (d < 1 || d > dim) throw Error("invalid day in date '" + iso + "'");
    // Days since 1970-01-01, civil-calendar arithmetic.
    int64_t days = 0;
    if (y >= 1970) {
        for (int yy = 1970; yy < y; ++yy) days += is_leap(yy) ? 366 : 365;
    } else {
        for (int yy = y; yy < 1970; ++yy) days -= is_leap(yy) ? 366 : 365;
    }
    for (int mm = 1; mm < m; ++mm) days += kDaysInMonth[mm - 1] + ((mm == 2 && is_leap(y)) ? 1 : 0);
    return days + (d - 1);
}

std::string format_date(int64_t days) {
    int y = 1970;
    while (true) {
        int64_t len = is_leap(y) ? 366 : 365;
        if (days >= len) {
            days -= len;
            ++y;
        } else if (days < 0) {
            --y;
            days += is_leap(y) ? 366 : 365;
        } else {
            break;
        }
    }
    int m = 1;
    while (true) {
        int64_t dim = kDaysInMonth[m - 1] + ((m == 2 && is_leap(y)) ? 1 : 0);
        if (days < dim) break;
        days -= dim;
        ++m;
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, static_cast<int>(days) + 1);
    return buf;
}

double Value::numeric() const {
    switch (type_) {
    case Dtype::Int:
    case Dtype::Date: return static_cast<double>(std::get<int64_t>(v_));
    case Dtype::Real: return std::get<double>(v_);
    case Dtype::Text: throw ExecError(ExecErrorKind::TypeMismatch, "text value used numerically");
    }
    return 0.0;
}

bool Value::operator==(const Value& o) const {
    if (type_ == o.type_) return v_ == o.v_;
    if (is_numeric() && o.is_numeric()) return numeric() == o.numeric();
    return false;
}

bool Value::operator<(const Value& o) const {
    if (type_ == Dtype::Text || o.type_ == Dtype::Text) {
        if (type_ != o.type_) return static_cast<int>(type_) < static_cast<int>(o.type_);
        return as_text() < o.as_text();
    }
    if (type_ == o.type_ && type_ != Dtype::Real) return std::get<int64_t>(v_) < std::get<int64_t>(o.v_);
    return numeric() < o.numeric();
}

static std::string format_real(double d) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d);
    (void)ec;
    return std::string(buf, ptr);
}

std::string Value::to_string() const {
    switch (type_) {
    case Dtype::Int: return std::to_string(std::get<int64_t>(v_));
    case Dtype::Real: return format_real(std::get<double>(v_));
    case Dtype::Text: return std::get<std::string>(v_);
    case Dtype::Date: return format_date(std::get<int64_t>(v_));
    }
    return "";
}

std::string Value::to_sql() const {
    if (type_ == Dtype::Text || type_ == Dtype::Date) return "'" + to_string() + "'";
    return to_string();
}

Value parse_value(Dtype t, const std::string& text) {
    switch (t) {
    case Dtype::Int: {
        int64_t i = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw Error("invalid int value: '" + text + "'");
        return Value::from_int(i);
    }
    case Dtype::Real: {
        double d = 0.0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw Error("invalid real value: '" + text + "'");
        return Value::from_real(d);
    }
    case Dtype::Text: return Value::from_text(text);
    case Dtype::Date: return Value::from_date(parse_date(text));
    }
    throw Error("unreachable dtype");
}

uint64_t hash_value(const Value& v) {
    uint64_t tag = static_cast<uint64_t>(v.type() == Dtype::Real ? 1 : 0);
    switch (v.type()) {
    case Dtype::Int:
    case Dtype::Date: {
        int64_t i = v.as_int();
        return hash_bytes(&i, sizeof(i), tag);
    }
    case Dtype::Real: {
        double d = v.as_real();
        // Normalize -0.0 so equal values hash equally.
        if (d == 0.0) d = 0.0;
        return hash_bytes(&d, sizeof(d), tag);
    }
    case Dtype::Text: return hash_string(v.as_text(), 2);
    }
    return 0;
}

} // namespace dpsql
