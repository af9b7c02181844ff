#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "afie/money.hpp"

namespace afie {

// Exact rational with a normalized sign (denominator always positive) and
// the fraction kept in lowest terms. Intermediate products go through
// 128-bit arithmetic, so operands with denominators up to 10^18 are safe.
class Rational {
public:
    constexpr Rational() : num_(0), den_(1) {}
    constexpr Rational(std::int64_t value) : num_(value), den_(1) {}
    Rational(std::int64_t numerator, std::int64_t denominator);

    static Rational from_decimal(const Decimal& value);

    std::int64_t numerator() const { return num_; }
    std::int64_t denominator() const { return den_; }

    Rational operator+(const Rational& other) const;
    Rational operator-(const Rational& other) const;
    Rational operator*(const Rational& other) const;
    Rational operator/(const Rational& other) const;
    Rational operator-() const;

    bool operator==(const Rational& other) const = default;
    std::strong_ordering operator<=>(const Rational& other) const;

    Rational abs() const;
    bool is_zero() const { return num_ == 0; }

    double to_double() const;
    // Fixed-point digit string, half-away-from-zero, e.g. 4 places for the
    // reported accuracy tables.
    std::string to_decimal_string(int places) const;
    std::string to_string() const;  // "num/den" (or "num" when den is 1)

private:
    std::int64_t num_;
    std::int64_t den_;
};

// Accepts "5%", "0.001%", "0.05", "0", or "1/20". Percent values are
// divided by 100; everything stays exact.
Rational parse_tolerance(std::string_view text);

}  // namespace afie
