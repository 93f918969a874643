#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace castle {

// Runtime cell value. SQL NULL is a distinguished state, not an empty string.
class Value {
public:
    Value() : v_(Null{}) {}
    static Value null() { return Value(); }
    static Value integer(int64_t i) { return Value(V(i)); }
    static Value real(double d) { return Value(V(d)); }
    static Value text(std::string s) { return Value(V(std::move(s))); }

    bool is_null() const { return std::holds_alternative<Null>(v_); }
    bool is_integer() const { return std::holds_alternative<int64_t>(v_); }
    bool is_real() const { return std::holds_alternative<double>(v_); }
    bool is_numeric() const { return is_integer() || is_real(); }
    bool is_text() const { return std::holds_alternative<std::string>(v_); }

    int64_t as_integer() const { return std::get<int64_t>(v_); }
    double as_real() const { return is_integer() ? static_cast<double>(as_integer()) : std::get<double>(v_); }
    const std::string& as_text() const { return std::get<std::string>(v_); }

    // Three-valued comparison: nullopt when either side is NULL.
    std::optional<int> compare(const Value& other) const;
    bool equals(const Value& other) const; // NULL == NULL here (identity, not SQL =)

private:
    struct Null {};
    using V = std::variant<Null, int64_t, double, std::string>;
    explicit Value(V v) : v_(std::move(v)) {}
    V v_;
};

// Rounds half away from zero to `scale` fractional digits and renders the
// result with exactly `scale` digits after the point.
std::string round_to_scale(double v, int scale);

// Canonical text for a value at an optional declared scale. Integers render
// without a point, reals at scale (or trimmed %.15g when no scale is known).
std::string canonical_text(const Value& v, std::optional<int> scale);

} // namespace castle
