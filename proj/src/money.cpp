#include "afie/money.hpp"

#include <cctype>
#include <cstdlib>
#include <regex>

#include "afie/errors.hpp"

namespace afie {

namespace {

constexpr int kMaxScale = 18;

std::int64_t pow10_i64(int k) {
    std::int64_t value = 1;
    for (int i = 0; i < k; ++i) value *= 10;
    return value;
}

std::int64_t checked_narrow(__int128 value, const char* what) {
    if (value > static_cast<__int128>(INT64_MAX) || value < static_cast<__int128>(INT64_MIN)) {
        throw MoneyParseError(std::string(what) + ": value out of range");
    }
    return static_cast<std::int64_t>(value);
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

Decimal::Decimal(std::int64_t mantissa, int scale) : mantissa_(mantissa), scale_(scale) {
    if (scale < 0 || scale > kMaxScale) {
        throw MoneyParseError("decimal scale " + std::to_string(scale) + " out of range");
    }
}

Decimal Decimal::parse(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t end = text.size();
    while (end > i && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;

    bool negative = false;
    if (i < end && (text[i] == '-' || text[i] == '+')) {
        negative = text[i] == '-';
        ++i;
    }
    __int128 mantissa = 0;
    int digits = 0;
    int scale = 0;
    bool seen_point = false;
    bool seen_digit = false;
    for (; i < end; ++i) {
        char c = text[i];
        if (c == '.') {
            if (seen_point) throw MoneyParseError("decimal has two points");
            seen_point = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw MoneyParseError("invalid decimal literal \"" + std::string(text) + "\"");
        }
        mantissa = mantissa * 10 + (c - '0');
        seen_digit = true;
        if (++digits > kMaxScale) throw MoneyParseError("decimal has too many digits");
        if (seen_point) ++scale;
    }
    if (!seen_digit) {
        throw MoneyParseError("invalid decimal literal \"" + std::string(text) + "\"");
    }
    if (negative) mantissa = -mantissa;
    return Decimal(checked_narrow(mantissa, "decimal"), scale);
}

Decimal Decimal::shifted_pow10(int k) const {
    int scale = scale_ - k;
    __int128 mantissa = mantissa_;
    if (scale < 0) {
        for (int i = 0; i < -scale; ++i) mantissa *= 10;
        scale = 0;
    }
    return Decimal(checked_narrow(mantissa, "decimal shift"), scale);
}

Decimal Decimal::rounded(int places) const {
    if (places < 0 || places > kMaxScale) {
        throw MoneyParseError("rounding precision out of range");
    }
    if (scale_ <= places) {
        __int128 mantissa = mantissa_;
        for (int i = scale_; i < places; ++i) mantissa *= 10;
        return Decimal(checked_narrow(mantissa, "decimal round"), places);
    }
    std::int64_t divisor = pow10_i64(scale_ - places);
    std::int64_t quotient = mantissa_ / divisor;
    std::int64_t remainder = mantissa_ % divisor;  // same sign as mantissa_
    std::int64_t magnitude = remainder < 0 ? -remainder : remainder;
    if (magnitude * 2 >= divisor) {
        quotient += mantissa_ < 0 ? -1 : 1;  // half away from zero
    }
    return Decimal(quotient, places);
}

Decimal Decimal::operator+(const Decimal& other) const {
    int scale = std::max(scale_, other.scale_);
    __int128 a = mantissa_;
    __int128 b = other.mantissa_;
    for (int i = scale_; i < scale; ++i) a *= 10;
    for (int i = other.scale_; i < scale; ++i) b *= 10;
    return Decimal(checked_narrow(a + b, "decimal add"), scale);
}

Decimal Decimal::operator-(const Decimal& other) const {
    return *this + other.negated();
}

bool operator==(const Decimal& a, const Decimal& b) {
    return (a <=> b) == std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
    int scale = std::max(a.scale_, b.scale_);
    __int128 x = a.mantissa_;
    __int128 y = b.mantissa_;
    for (int i = a.scale_; i < scale; ++i) x *= 10;
    for (int i = b.scale_; i < scale; ++i) y *= 10;
    if (x < y) return std::strong_ordering::less;
    if (x > y) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string Decimal::to_string() const {
    __int128 magnitude = mantissa_ < 0 ? -static_cast<__int128>(mantissa_) : mantissa_;
    std::string digits;
    if (magnitude == 0) digits = "0";
    while (magnitude > 0) {
        digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(magnitude % 10)));
        magnitude /= 10;
    }
    while (static_cast<int>(digits.size()) <= scale_) digits.insert(digits.begin(), '0');

    std::string fraction = digits.substr(digits.size() - static_cast<std::size_t>(scale_));
    std::string integral = digits.substr(0, digits.size() - static_cast<std::size_t>(scale_));
    while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();

    std::string out = mantissa_ < 0 ? "-" : "";
    out += integral;
    if (!fraction.empty()) {
        out.push_back('.');
        out += fraction;
    }
    return out;
}

std::string Decimal::to_string(int places, bool grouped) const {
    Decimal r = rounded(places);
    __int128 magnitude = r.mantissa_ < 0 ? -static_cast<__int128>(r.mantissa_) : r.mantissa_;
    std::string digits;
    if (magnitude == 0) digits = "0";
    while (magnitude > 0) {
        digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(magnitude % 10)));
        magnitude /= 10;
    }
    while (digits.size() < static_cast<std::size_t>(places) + 1) {
        digits.insert(digits.begin(), '0');
    }
    std::string fraction = digits.substr(digits.size() - static_cast<std::size_t>(places));
    std::string integral = digits.substr(0, digits.size() - static_cast<std::size_t>(places));

    std::string out = r.mantissa_ < 0 ? "-" : "";
    if (grouped) {
        for (std::size_t i = 0; i < integral.size(); ++i) {
            if (i > 0 && (integral.size() - i) % 3 == 0) out.push_back(',');
            out.push_back(integral[i]);
        }
    } else {
        out += integral;
    }
    if (places > 0) {
        out.push_back('.');
        out += fraction;
    }
    return out;
}

Decimal parse_money(std::string_view text) {
    std::size_t i = 0;
    std::size_t end = text.size();
    while (i < end && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    while (end > i && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    if (i >= end) throw MoneyParseError("empty money expression");

    bool negative = false;
    bool paren_open = false;
    while (i < end) {
        char c = text[i];
        if (c == '(' && !paren_open) { paren_open = true; ++i; }
        else if (c == '-' && !negative) { negative = true; ++i; }
        else if (c == '$') ++i;
        else if (std::isspace(static_cast<unsigned char>(c))) ++i;
        else break;
    }

    __int128 mantissa = 0;
    int digits = 0;
    int scale = 0;
    bool seen_digit = false;
    while (i < end) {
        char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mantissa = mantissa * 10 + (c - '0');
            seen_digit = true;
            if (++digits > kMaxScale) throw MoneyParseError("money amount has too many digits");
            ++i;
        } else if (c == ',' && seen_digit && i + 1 < end &&
                   std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
            ++i;  // thousands separator between digits
        } else {
            break;
        }
    }
    if (!seen_digit) {
        throw MoneyParseError("no digits in money expression \"" + std::string(text) + "\"");
    }
    if (i < end && text[i] == '.' && i + 1 < end &&
        std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
        ++i;
        while (i < end && std::isdigit(static_cast<unsigned char>(text[i]))) {
            mantissa = mantissa * 10 + (text[i] - '0');
            if (++digits > kMaxScale) throw MoneyParseError("money amount has too many digits");
            ++scale;
            ++i;
        }
    }

    while (i < end && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    bool paren_closed = false;
    if (i < end && text[i] == ')') {
        if (!paren_open) throw MoneyParseError("unbalanced \")\" in money expression");
        paren_closed = true;
        ++i;
    }
    while (i < end && std::isspace(static_cast<unsigned char>(text[i]))) ++i;

    int shift = 0;
    if (i < end) {
        std::string word;
        while (i < end && std::isalpha(static_cast<unsigned char>(text[i]))) {
            word.push_back(lower(text[i]));
            ++i;
        }
        if (!word.empty() && word.back() == 's') word.pop_back();
        if (word == "thousand") shift = -3;
        else if (word == "million") shift = 0;
        else if (word == "billion") shift = 3;
        else throw MoneyParseError("unknown scale word in \"" + std::string(text) + "\"");
    }
    while (i < end && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i < end && text[i] == ')' && paren_open && !paren_closed) {
        paren_closed = true;  // ")" may also trail the scale word
        ++i;
    }
    while (i < end && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (paren_open && !paren_closed) {
        throw MoneyParseError("unbalanced \"(\" in money expression");
    }
    if (i != end) {
        throw MoneyParseError("trailing characters in money expression \"" + std::string(text) + "\"");
    }

    if (negative || paren_closed) mantissa = -mantissa;
    Decimal value(checked_narrow(mantissa, "money"), scale);
    return value.shifted_pow10(shift);
}

std::optional<MoneyMatch> find_money(std::string_view text, std::size_t from) {
    static const std::regex pattern(
        R"(\(?\s*-?\s*\$?\s*(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?\s*\)?(?:\s*(?:thousand|million|billion)s?)?(?:\s*\))?)",
        std::regex::icase);
    if (from > text.size()) return std::nullopt;

    auto is_word_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0;
    };
    const char* base = text.data();
    std::cregex_iterator it(base + from, base + text.size(), pattern);
    for (std::cregex_iterator last; it != last; ++it) {
        std::size_t begin = from + static_cast<std::size_t>(it->position());
        std::size_t end = begin + static_cast<std::size_t>(it->length());
        // The pattern's \s* arms may swallow surrounding whitespace; shrink
        // to the non-space core so the adjacency guards see real neighbors.
        while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
        while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
        if (begin == end) continue;
        // Reject candidates glued to surrounding words or date-like tails.
        if (begin > 0 && (is_word_char(text[begin - 1]) || text[begin - 1] == '.')) continue;
        if (end < text.size() && is_word_char(text[end])) continue;
        if (end + 1 < text.size() && text[end] == '.' &&
            std::isdigit(static_cast<unsigned char>(text[end + 1]))) {
            continue;
        }
        try {
            return MoneyMatch{begin, end, parse_money(text.substr(begin, end - begin))};
        } catch (const MoneyParseError&) {
        }
        // The pattern may swallow a ")" that belongs to the prose, not the
        // amount; retry once without it.
        std::size_t trimmed = end;
        while (trimmed > begin && (text[trimmed - 1] == ')' || text[trimmed - 1] == ' ')) {
            --trimmed;
        }
        if (trimmed > begin && trimmed != end) {
            try {
                return MoneyMatch{begin, trimmed, parse_money(text.substr(begin, trimmed - begin))};
            } catch (const MoneyParseError&) {
            }
        }
    }
    return std::nullopt;
}

}  // namespace afie
