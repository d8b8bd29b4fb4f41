#pragma once

#include "padic/rational.hpp"

#include <climits>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace padic {

// Raised when an operation has no guaranteed digits left to work with.
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when scalars from different fields are combined.
class ContextMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Extension { none, eisenstein, cyclotomic };

class PadicContext;
using Ctx = std::shared_ptr<const PadicContext>;

// The field L: Q_p, Q_p(pi) with pi^e = p, or Q_p(zeta_{p^m}) with pi = zeta - 1.
// Elements are polynomials of degree < e in pi with digits modulo p^W, where
// W is the largest width for which p^W fits comfortably in 62 bits.
class PadicContext {
public:
    static Ctx rationals(std::int64_t p, int N);
    static Ctx eisenstein(std::int64_t p, int N, int e);
    static Ctx cyclotomic(std::int64_t p, int N, int level);

    std::int64_t prime() const { return p_; }
    int precision() const { return N_; }
    Extension kind() const { return kind_; }
    int degree() const { return e_; }
    int level() const { return level_; }
    int width() const { return W_; }
    std::int64_t modulus() const { return pw_[W_]; }
    std::int64_t p_power(int k) const { return pw_.at(k); }
    // pi^e = -(E_0 + E_1 pi + ... + E_{e-1} pi^{e-1}), entries reduced mod p^W.
    const std::vector<std::int64_t>& relation() const { return relation_; }

    bool same_field(const PadicContext& other) const;
    std::string id() const;

    // Same field, different default precision for newly created constants.
    Ctx with_precision(int N) const;

private:
    PadicContext(std::int64_t p, int N, Extension kind, int e, int level,
                 std::vector<std::int64_t> relation);

    std::int64_t p_;
    int N_;
    Extension kind_;
    int e_;
    int level_;
    int W_;
    std::vector<std::int64_t> pw_;
    std::vector<std::int64_t> relation_;
};

// x = p^shift * (c_0 + c_1 pi + ... + c_{e-1} pi^{e-1}) known modulo pi^prec.
// Normal form: the digit vector is reduced modulo the precision ideal and is
// not divisible by p unless the element is zero at precision.
// Valuations and precisions are counted in pi-units (1/e of val(p)).
class Scalar {
public:
    static constexpr int kInfinite = INT_MAX / 4;

    Scalar() = default;

    static Scalar zero(const Ctx& ctx);
    static Scalar zero(const Ctx& ctx, int prec_units);
    static Scalar one(const Ctx& ctx) { return from_int(ctx, 1); }
    static Scalar from_int(const Ctx& ctx, std::int64_t v);
    static Scalar from_big(const Ctx& ctx, const BigInt& v);
    static Scalar from_rational(const Ctx& ctx, const Rational& v);
    static Scalar uniformizer(const Ctx& ctx);
    static Scalar from_digits(const Ctx& ctx, int shift, std::vector<std::int64_t> digits,
                              int prec_units);

    const Ctx& context() const { return ctx_; }
    bool valid() const { return static_cast<bool>(ctx_); }
    bool is_zero() const { return zero_; }

    // Valuation in pi-units; kInfinite when zero at precision.
    int val_units() const;
    // Lower bound for the valuation: the valuation, or the precision for zero.
    int val_bound_units() const { return zero_ ? prec_ : val_units(); }
    Rational valuation() const;
    int precision_units() const { return prec_; }
    Rational precision() const;
    // Guaranteed relative digits in pi-units (precision minus valuation).
    int relative_units() const { return zero_ ? 0 : prec_ - val_units(); }

    int shift() const { return shift_; }
    const std::vector<std::int64_t>& digits() const { return digits_; }

    Scalar operator-() const;
    friend Scalar operator+(const Scalar& a, const Scalar& b);
    friend Scalar operator-(const Scalar& a, const Scalar& b);
    friend Scalar operator*(const Scalar& a, const Scalar& b);
    friend Scalar operator/(const Scalar& a, const Scalar& b);
    Scalar& operator+=(const Scalar& b) { return *this = *this + b; }
    Scalar& operator-=(const Scalar& b) { return *this = *this - b; }
    Scalar& operator*=(const Scalar& b) { return *this = *this * b; }
    Scalar& operator/=(const Scalar& b) { return *this = *this / b; }

    Scalar inverse() const;
    Scalar pow(long long n) const;
    // Multiplication by p^k (k may be negative); exact, shifts precision.
    Scalar mul_p_power(int k) const;
    Scalar mul_int(std::int64_t k) const;

    // Lowers the absolute precision to at most prec_units.
    Scalar truncated(int prec_units) const;
    // Equality at the joint precision.
    bool equals(const Scalar& other) const { return (*this - other).is_zero(); }

    // Exact rational value of the stored representative (only for e = 1).
    Rational representative() const;

    std::string str() const;

private:
    Scalar(Ctx ctx, int shift, std::vector<std::int64_t> digits, int prec);
    void normalize();

    Ctx ctx_;
    int shift_ = 0;
    std::vector<std::int64_t> digits_;
    int prec_ = 0;
    bool zero_ = true;
};

// A rational constant carried at the full digit width of ctx (rather than N).
Scalar wide_rational(const Ctx& ctx, const Rational& v);

// zeta_{p^m} = 1 + pi in a cyclotomic context.
Scalar primitive_root(const Ctx& ctx);

// The automorphism zeta -> zeta^c of a cyclotomic context (c prime to p).
Scalar galois_conjugate(const Scalar& x, std::int64_t c);

// Canonical image of x in a larger field: Q_p into anything, or a cyclotomic
// level into a higher cyclotomic level.
Scalar embed(const Scalar& x, const Ctx& target);

// e^{2 i pi y}: returns the level m = max(0, -val y) and the root of unity
// zeta_{p^m}^{p^m y mod p^m} inside the level-m cyclotomic context.
struct CharacterValue {
    int level;
    Scalar value;
};
CharacterValue additive_character(std::int64_t p, int N, const Rational& y);

// binom(a, n) for a in Z_p. Loses val(n!) digits; throws when none remain.
Scalar padic_binomial(const Scalar& a, int n);
// Exact-input variant: computes at raised internal precision, returns full precision.
Scalar padic_binomial(const Ctx& ctx, const Rational& a, int n);

// Exponent of p in n!.
int factorial_valuation(std::int64_t n, std::int64_t p);

}  // namespace padic
