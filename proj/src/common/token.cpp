#include "poai/common/token.h"

#include <cmath>
#include <stdexcept>

namespace poai {
namespace {

using boost::multiprecision::cpp_int;

cpp_int parseInteger(std::string_view digits, std::string_view whole) {
    if (digits.empty()) throw std::invalid_argument("invalid token amount '" + std::string(whole) + "'");
    for (char c : digits) {
        if (c < '0' || c > '9') throw std::invalid_argument("invalid token amount '" + std::string(whole) + "'");
    }
    return cpp_int(std::string(digits));
}

}  // namespace

Token Token::parse(std::string_view text) {
    std::string_view t = text;
    bool negative = false;
    if (!t.empty() && (t.front() == '-' || t.front() == '+')) {
        negative = t.front() == '-';
        t.remove_prefix(1);
    }
    Rational v;
    if (const auto slash = t.find('/'); slash != std::string_view::npos) {
        const cpp_int num = parseInteger(t.substr(0, slash), text);
        const cpp_int den = parseInteger(t.substr(slash + 1), text);
        if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
        v = Rational(num, den);
    } else if (const auto dot = t.find('.'); dot != std::string_view::npos) {
        const auto intPart = t.substr(0, dot);
        const auto frac = t.substr(dot + 1);
        const cpp_int i = intPart.empty() ? cpp_int(0) : parseInteger(intPart, text);
        const cpp_int f = parseInteger(frac, text);
        cpp_int scale = 1;
        for (std::size_t k = 0; k < frac.size(); ++k) scale *= 10;
        v = Rational(i * scale + f, scale);
    } else {
        v = Rational(parseInteger(t, text));
    }
    return Token(negative ? Rational(-v) : v);
}

Token Token::fromDouble(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite token amount");
    int exp = 0;
    const double mant = std::frexp(v, &exp);
    // mant * 2^53 is an exact integer.
    const auto m = static_cast<std::int64_t>(std::ldexp(mant, 53));
    exp -= 53;
    Rational r(m);
    if (exp >= 0) {
        r *= Rational(cpp_int(1) << exp);
    } else {
        r /= Rational(cpp_int(1) << -exp);
    }
    return Token(r);
}

Token Token::floorTo(const Token& quantum) const {
    if (quantum.value_ <= 0) throw std::invalid_argument("quantum must be positive");
    const Rational q = value_ / quantum.value_;
    cpp_int n = boost::multiprecision::numerator(q) / boost::multiprecision::denominator(q);
    if (q < 0 && Rational(n) != q) n -= 1;
    return Token(Rational(n) * quantum.value_);
}

std::string Token::toString() const {
    const cpp_int num = boost::multiprecision::numerator(value_);
    const cpp_int den = boost::multiprecision::denominator(value_);
    if (den == 1) return num.str();

    cpp_int scale = 1;
    int digits = 0;
    while (digits <= 40 && scale % den != 0) {
        scale *= 10;
        ++digits;
    }
    if (scale % den != 0) return num.str() + "/" + den.str();

    const bool negative = num < 0;
    const cpp_int scaled = (negative ? cpp_int(-num) : num) * (scale / den);
    std::string s = scaled.str();
    if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits) - s.size() + 1, '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
    return negative ? "-" + s : s;
}

void Token::encode(ByteWriter& w) const {
    w.str(boost::multiprecision::numerator(value_).str());
    w.str(boost::multiprecision::denominator(value_).str());
}

Token Token::decode(ByteReader& r) {
    const std::string num = r.str();
    const std::string den = r.str();
    try {
        std::string_view n = num;
        bool negative = false;
        if (!n.empty() && n.front() == '-') {
            negative = true;
            n.remove_prefix(1);
        }
        const cpp_int a = parseInteger(n, num);
        const cpp_int b = parseInteger(den, den);
        if (b == 0) throw DecodeError("zero denominator");
        Rational v(negative ? cpp_int(-a) : a, b);
        // Canonical form only: reject non-reduced encodings.
        if (boost::multiprecision::numerator(v).str() != num ||
            boost::multiprecision::denominator(v).str() != den) {
            throw DecodeError("non-canonical token encoding");
        }
        return Token(v);
    } catch (const std::invalid_argument& e) {
        throw DecodeError(e.what());
    }
}

const Token& tokenQuantum() {
    static const Token q(Token::Rational(1, 1000000000));
    return q;
}

}  // namespace poai
