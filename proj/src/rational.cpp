#include "afie/rational.hpp"

#include <cctype>

#include "afie/errors.hpp"

namespace afie {

namespace {

std::int64_t narrow(__int128 value, const char* what) {
    if (value > static_cast<__int128>(INT64_MAX) || value < static_cast<__int128>(INT64_MIN)) {
        throw EvalError(std::string(what) + ": rational out of range");
    }
    return static_cast<std::int64_t>(value);
}

// Normalizes sign and reduces in 128-bit before narrowing, so intermediate
// products that reduce back into signed 64-bit range stay legal.
void normalize(__int128& num, __int128& den, const char* what) {
    if (den == 0) throw EvalError(std::string(what) + ": zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 a = num < 0 ? -num : num;
    __int128 b = den;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
}

Rational make(__int128 num, __int128 den, const char* what) {
    normalize(num, den, what);
    return Rational(narrow(num, what), narrow(den, what));
}

}  // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
    __int128 num = numerator;
    __int128 den = denominator;
    normalize(num, den, "rational");
    num_ = narrow(num, "rational");
    den_ = narrow(den, "rational");
}

Rational Rational::from_decimal(const Decimal& value) {
    std::int64_t den = 1;
    for (int i = 0; i < value.scale(); ++i) den *= 10;
    return Rational(value.mantissa(), den);
}

Rational Rational::operator+(const Rational& other) const {
    __int128 num = static_cast<__int128>(num_) * other.den_ +
                   static_cast<__int128>(other.num_) * den_;
    return make(num, static_cast<__int128>(den_) * other.den_, "rational add");
}

Rational Rational::operator-(const Rational& other) const {
    return *this + (-other);
}

Rational Rational::operator*(const Rational& other) const {
    return make(static_cast<__int128>(num_) * other.num_,
                static_cast<__int128>(den_) * other.den_, "rational multiply");
}

Rational Rational::operator/(const Rational& other) const {
    if (other.num_ == 0) throw EvalError("rational divide: division by zero");
    return make(static_cast<__int128>(num_) * other.den_,
                static_cast<__int128>(den_) * other.num_, "rational divide");
}

Rational Rational::operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
}

std::strong_ordering Rational::operator<=>(const Rational& other) const {
    __int128 lhs = static_cast<__int128>(num_) * other.den_;
    __int128 rhs = static_cast<__int128>(other.num_) * den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

Rational Rational::abs() const {
    return num_ < 0 ? -*this : *this;
}

double Rational::to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::to_decimal_string(int places) const {
    __int128 scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    __int128 num = num_ < 0 ? -static_cast<__int128>(num_) : num_;
    __int128 scaled = num * scale;
    __int128 quotient = scaled / den_;
    __int128 remainder = scaled % den_;
    if (remainder * 2 >= den_) ++quotient;  // half away from zero

    std::string digits;
    if (quotient == 0) digits = "0";
    while (quotient > 0) {
        digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(quotient % 10)));
        quotient /= 10;
    }
    while (digits.size() < static_cast<std::size_t>(places) + 1) {
        digits.insert(digits.begin(), '0');
    }
    std::string out = num_ < 0 ? "-" : "";
    out += digits.substr(0, digits.size() - static_cast<std::size_t>(places));
    if (places > 0) {
        out.push_back('.');
        out += digits.substr(digits.size() - static_cast<std::size_t>(places));
    }
    return out;
}

std::string Rational::to_string() const {
    std::string out = std::to_string(num_);
    if (den_ != 1) {
        out.push_back('/');
        out += std::to_string(den_);
    }
    return out;
}

Rational parse_tolerance(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    std::string_view body = text.substr(begin, end - begin);
    if (body.empty()) throw EvalError("empty tolerance");

    try {
        if (std::size_t slash = body.find('/'); slash != std::string_view::npos) {
            Decimal num = Decimal::parse(body.substr(0, slash));
            Decimal den = Decimal::parse(body.substr(slash + 1));
            return Rational::from_decimal(num) / Rational::from_decimal(den);
        }
        bool percent = body.back() == '%';
        if (percent) body.remove_suffix(1);
        Rational value = Rational::from_decimal(Decimal::parse(body));
        if (percent) value = value / Rational(100);
        if (value < Rational(0)) throw EvalError("tolerance must be non-negative");
        return value;
    } catch (const MoneyParseError& e) {
        throw EvalError("invalid tolerance \"" + std::string(text) + "\": " + e.what());
    }
}

}  // namespace afie
