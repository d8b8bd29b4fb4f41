#include "padic/rational.hpp"

#include <stdexcept>

namespace padic {

int p_valuation(const BigInt& x, std::int64_t p) {
    if (x == 0) throw std::invalid_argument("valuation of zero");
    BigInt y = abs(x);
    int v = 0;
    while (y % p == 0) {
        y /= p;
        ++v;
    }
    return v;
}

int p_valuation(const Rational& x, std::int64_t p) {
    return p_valuation(numerator(x), p) - p_valuation(denominator(x), p);
}

BigInt int_pow(const BigInt& base, unsigned exp) {
    BigInt r = 1;
    BigInt b = base;
    while (exp) {
        if (exp & 1u) r *= b;
        b *= b;
        exp >>= 1u;
    }
    return r;
}

Rational rat_pow(const Rational& base, int exp) {
    if (exp >= 0) {
        return Rational(int_pow(numerator(base), static_cast<unsigned>(exp)),
                        int_pow(denominator(base), static_cast<unsigned>(exp)));
    }
    if (base == 0) throw std::invalid_argument("zero to a negative power");
    return Rational(int_pow(denominator(base), static_cast<unsigned>(-exp)),
                    int_pow(numerator(base), static_cast<unsigned>(-exp)));
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

Rational parse_plain(const std::string& raw, std::int64_t p) {
    std::string s = trim(raw);
    if (s.empty()) throw std::invalid_argument("empty rational");
    auto caret = s.find('^');
    if (caret != std::string::npos) {
        std::string base = trim(s.substr(0, caret));
        int e = std::stoi(trim(s.substr(caret + 1)));
        Rational b = (base == "p") ? Rational(p) : parse_plain(base, p);
        return rat_pow(b, e);
    }
    if (s == "p") return Rational(p);
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(s));
        BigInt num(trim(s.substr(0, slash)));
        BigInt den(trim(s.substr(slash + 1)));
        if (den == 0) throw std::invalid_argument("zero denominator in '" + raw + "'");
        return Rational(num, den);
    } catch (const std::runtime_error&) {
        throw std::invalid_argument("cannot parse rational '" + raw + "'");
    }
}

}  // namespace

Rational parse_rational(const std::string& text, std::int64_t p) {
    std::string s = trim(text);
    auto star = s.find('*');
    if (star == std::string::npos) return parse_plain(s, p);
    return parse_plain(s.substr(0, star), p) * parse_rational(s.substr(star + 1), p);
}

std::string to_string(const Rational& x) {
    if (denominator(x) == 1) return numerator(x).str();
    return numerator(x).str() + "/" + denominator(x).str();
}

std::string format_rational(const Rational& x, std::int64_t p) {
    if (x == 0) return "0";
    int v = p_valuation(x, p);
    if (v == 0) return to_string(x);
    Rational u = x / rat_pow(Rational(p), v);
    return to_string(u) + "*p^" + std::to_string(v);
}

int floor_log(std::int64_t n, std::int64_t p) {
    if (n < 1) throw std::invalid_argument("floor_log of non-positive");
    int k = 0;
    std::int64_t q = 1;
    while (q <= n / p) {
        q *= p;
        ++k;
    }
    return k;
}

BigInt binomial_coefficient(int n, int k) {
    if (k < 0 || k > n) return 0;
    BigInt r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace padic
