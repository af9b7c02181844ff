#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace afie {

// Exact base-10 fixed-point number: mantissa / 10^scale. All money values
// flow through this type; binary floating point never touches them, since
// evaluation at 0% tolerance needs exact comparison.
class Decimal {
public:
    Decimal() = default;
    Decimal(std::int64_t mantissa, int scale);

    // Plain decimal literal: [-]digits[.digits]. Throws MoneyParseError.
    static Decimal parse(std::string_view text);

    std::int64_t mantissa() const { return mantissa_; }
    int scale() const { return scale_; }

    bool is_zero() const { return mantissa_ == 0; }
    bool is_negative() const { return mantissa_ < 0; }

    Decimal negated() const { return Decimal(-mantissa_, scale_); }
    Decimal abs() const { return mantissa_ < 0 ? negated() : *this; }

    // Exact multiplication by 10^k (k may be negative).
    Decimal shifted_pow10(int k) const;

    // Half-away-from-zero rounding to `places` fraction digits, done on
    // the digit representation, never through binary floating point.
    Decimal rounded(int places) const;

    Decimal operator+(const Decimal& other) const;
    Decimal operator-(const Decimal& other) const;

    // Value comparison across scales (1.50 == 1.5).
    friend bool operator==(const Decimal& a, const Decimal& b);
    friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);

    // Minimal form, e.g. "-12.5", "0", "3.004".
    std::string to_string() const;

    // Exactly `places` fraction digits; thousands separators ("1,234.500")
    // unless grouped is false.
    std::string to_string(int places, bool grouped = true) const;

private:
    std::int64_t mantissa_ = 0;
    int scale_ = 0;  // number of fraction digits, >= 0
};

// A money amount normalized to millions, rendered with a fixed number of
// decimal places (half-away-from-zero).
struct MoneyValue {
    Decimal amount_millions;
    int precision = 2;

    std::string render() const { return amount_millions.to_string(precision); }

    bool operator==(const MoneyValue&) const = default;
};

// Parses a money expression into an exact amount in millions.
// Grammar: optional "$", optional "(", digits with optional comma groups,
// optional "." fraction, optional ")", optional scale word in
// {thousand, million, billion} (case-insensitive). Parentheses negate
// (filing convention); a leading "-" is also accepted. Bare numbers
// default to millions. Throws MoneyParseError when nothing matches.
Decimal parse_money(std::string_view text);

inline std::string render_money(const Decimal& amount_millions, int precision) {
    return amount_millions.to_string(precision);
}

struct MoneyMatch {
    std::size_t begin = 0;  // byte range of the matched expression
    std::size_t end = 0;
    Decimal amount_millions;
};

// First money expression in `text` at or after `from`. Candidates glued to
// surrounding alphanumerics ("2022Q3", "2022.10.15") are skipped, so scans
// over prose land on actual amounts.
std::optional<MoneyMatch> find_money(std::string_view text, std::size_t from = 0);

}  // namespace afie
