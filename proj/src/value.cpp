#include "castle/value.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace castle {

std::optional<int> Value::compare(const Value& other) const {
    if (is_null() || other.is_null())
        return std::nullopt;
    if (is_numeric() && other.is_numeric()) {
        if (is_integer() && other.is_integer()) {
            int64_t a = as_integer(), b = other.as_integer();
            return a < b ? -1 : a > b ? 1 : 0;
        }
        double a = as_real(), b = other.as_real();
        return a < b ? -1 : a > b ? 1 : 0;
    }
    if (is_text() && other.is_text()) {
        int c = as_text().compare(other.as_text());
        return c < 0 ? -1 : c > 0 ? 1 : 0;
    }
    // Mixed text/number: order numbers before text, deterministic.
    return is_numeric() ? -1 : 1;
}

bool Value::equals(const Value& other) const {
    if (is_null() || other.is_null())
        return is_null() && other.is_null();
    auto c = compare(other);
    return c && *c == 0;
}

std::string round_to_scale(double v, int scale) {
    double factor = 1.0;
    for (int i = 0; i < scale; ++i)
        factor *= 10.0;
    double scaled = v * factor;
    // half away from zero
    long long units = static_cast<long long>(scaled >= 0 ? std::floor(scaled + 0.5) : std::ceil(scaled - 0.5));
    bool neg = units < 0;
    unsigned long long mag = neg ? static_cast<unsigned long long>(-units) : static_cast<unsigned long long>(units);
    std::string digits = std::to_string(mag);
    if (scale == 0)
        return (neg ? "-" : "") + digits;
    if (digits.size() <= static_cast<size_t>(scale))
        digits.insert(0, static_cast<size_t>(scale) + 1 - digits.size(), '0');
    digits.insert(digits.size() - static_cast<size_t>(scale), ".");
    return (neg ? "-" : "") + digits;
}

std::string canonical_text(const Value& v, std::optional<int> scale) {
    if (v.is_null())
        return "NULL";
    if (v.is_text())
        return v.as_text();
    if (v.is_integer() && !scale)
        return std::to_string(v.as_integer());
    double d = v.as_real();
    if (scale)
        return round_to_scale(d, *scale);
    if (d == std::floor(d) && std::fabs(d) < 1e15)
        return std::to_string(static_cast<long long>(d));
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", d);
    return buf;
}

} // namespace castle
