#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include "poai/common/codec.h"

namespace poai {

// Exact token amount. Balances and pool movements never round; the only
// rounding point is reward distribution, which floors to kTokenQuantum and
// hands the residue to a designated recipient.
class Token {
public:
    using Rational = boost::multiprecision::cpp_rational;

    Token() = default;
    explicit Token(Rational v) : value_(std::move(v)) {}
    static Token whole(std::int64_t units) { return Token(Rational(units)); }
    // Accepts "12", "-3", "12.5", "0.000001", "3/4".
    static Token parse(std::string_view text);
    // Exact binary value of the double.
    static Token fromDouble(double v);

    const Rational& value() const { return value_; }
    bool isZero() const { return value_ == 0; }
    bool isNegative() const { return value_ < 0; }
    double toDouble() const { return static_cast<double>(value_); }

    // Largest multiple of quantum not exceeding this value. quantum > 0.
    Token floorTo(const Token& quantum) const;

    // Decimal when the value terminates within 40 fractional digits, "n/d" otherwise.
    std::string toString() const;

    void encode(ByteWriter& w) const;
    static Token decode(ByteReader& r);

    Token& operator+=(const Token& o) { value_ += o.value_; return *this; }
    Token& operator-=(const Token& o) { value_ -= o.value_; return *this; }
    friend Token operator+(Token a, const Token& b) { return a += b; }
    friend Token operator-(Token a, const Token& b) { return a -= b; }
    friend Token operator*(const Token& a, const Rational& f) { return Token(a.value_ * f); }
    friend bool operator==(const Token& a, const Token& b) { return a.value_ == b.value_; }
    friend std::strong_ordering operator<=>(const Token& a, const Token& b) {
        if (a.value_ < b.value_) return std::strong_ordering::less;
        if (a.value_ > b.value_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

private:
    Rational value_{0};
};

inline std::ostream& operator<<(std::ostream& os, const Token& t) { return os << t.toString(); }

// 1e-9 tokens.
const Token& tokenQuantum();

}  // namespace poai
