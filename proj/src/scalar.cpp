#include "padic/scalar.hpp"

#include <algorithm>
#include <sstream>

namespace padic {

namespace {

using i64 = std::int64_t;
using i128 = __int128;

i64 mulmod(i64 a, i64 b, i64 m) { return static_cast<i64>((static_cast<i128>(a) * b) % m); }

i64 addmod(i64 a, i64 b, i64 m) {
    i64 s = a + b;
    return s >= m ? s - m : s;
}

i64 submod(i64 a, i64 b, i64 m) {
    i64 s = a - b;
    return s < 0 ? s + m : s;
}

i64 reduce_big(const BigInt& v, i64 m) {
    BigInt r = v % m;
    if (r < 0) r += m;
    return static_cast<i64>(r);
}

i64 inverse_mod(i64 a, i64 m) {
    // Extended Euclid on 128-bit to avoid overflow in the coefficient updates.
    i128 t = 0, new_t = 1, r = m, new_r = ((a % m) + m) % m;
    while (new_r != 0) {
        i128 q = r / new_r;
        std::tie(t, new_t) = std::make_pair(new_t, t - q * new_t);
        std::tie(r, new_r) = std::make_pair(new_r, r - q * new_r);
    }
    if (r != 1) throw std::invalid_argument("not invertible modulo p^W");
    if (t < 0) t += m;
    return static_cast<i64>(t);
}

int ceil_div(int a, int b) {
    // b > 0
    if (a >= 0) return (a + b - 1) / b;
    return -((-a) / b);
}

int digit_valuation(i64 c, i64 p) {
    int v = 0;
    while (c % p == 0) {
        c /= p;
        ++v;
    }
    return v;
}

// Product of two digit polynomials reduced by the defining relation.
std::vector<i64> poly_mul(const PadicContext& ctx, const std::vector<i64>& a,
                          const std::vector<i64>& b) {
    const int e = ctx.degree();
    const i64 m = ctx.modulus();
    if (e == 1) return {mulmod(a[0], b[0], m)};
    std::vector<i128> acc(2 * e - 1, 0);
    for (int i = 0; i < e; ++i) {
        if (a[i] == 0) continue;
        for (int j = 0; j < e; ++j) {
            if (b[j] == 0) continue;
            acc[i + j] = (acc[i + j] + static_cast<i128>(a[i]) * b[j]) % m;
        }
    }
    const auto& rel = ctx.relation();
    for (int d = 2 * e - 2; d >= e; --d) {
        i64 c = static_cast<i64>(acc[d] % m);
        if (c == 0) continue;
        for (int i = 0; i < e; ++i) {
            acc[d - e + i] = (acc[d - e + i] - static_cast<i128>(c) * rel[i]) % m;
        }
        acc[d] = 0;
    }
    std::vector<i64> out(e);
    for (int i = 0; i < e; ++i) {
        i64 v = static_cast<i64>(acc[i] % m);
        out[i] = v < 0 ? v + m : v;
    }
    return out;
}

// Inverse of a digit polynomial whose constant digit is a unit.
std::vector<i64> unit_inverse(const PadicContext& ctx, const std::vector<i64>& u) {
    const int e = ctx.degree();
    const i64 p = ctx.prime();
    const i64 m = ctx.modulus();
    // Modulo p the ring is F_p[pi]/(pi^e): invert as a truncated power series.
    std::vector<i64> z(e, 0);
    i64 c0inv = inverse_mod(u[0] % p, p);
    z[0] = c0inv;
    for (int i = 1; i < e; ++i) {
        i64 s = 0;
        for (int l = 1; l <= i; ++l) s = (s + (u[l] % p) * z[i - l]) % p;
        z[i] = ((p - s) % p) * c0inv % p;
    }
    int known = 1;
    while (known < ctx.width()) {
        auto uz = poly_mul(ctx, u, z);
        std::vector<i64> two_minus(e);
        for (int i = 0; i < e; ++i) two_minus[i] = submod(i == 0 ? 2 % m : 0, uz[i], m);
        z = poly_mul(ctx, z, two_minus);
        known *= 2;
    }
    return z;
}

std::vector<i64> pi_power_digits(const PadicContext& ctx, int k) {
    // pi^k for 0 <= k <= e as a digit vector.
    const int e = ctx.degree();
    std::vector<i64> out(e, 0);
    if (k < e) {
        out[k] = 1;
        return out;
    }
    const i64 m = ctx.modulus();
    for (int i = 0; i < e; ++i) out[i] = submod(0, ctx.relation()[i], m);
    return out;
}

}  // namespace

// ---------------------------------------------------------------- context

PadicContext::PadicContext(i64 p, int N, Extension kind, int e, int level,
                           std::vector<i64> relation)
    : p_(p), N_(N), kind_(kind), e_(e), level_(level), relation_(std::move(relation)) {
    W_ = 0;
    pw_.push_back(1);
    const i64 limit = (i64{1} << 62) / p;
    while (pw_.back() <= limit) {
        pw_.push_back(pw_.back() * p);
        ++W_;
    }
    if (W_ < N_ + 2) throw std::invalid_argument("precision N too large for 62-bit digits");
    for (auto& r : relation_) r = ((r % modulus()) + modulus()) % modulus();
}

namespace {
bool is_prime(i64 p) {
    if (p < 2) return false;
    for (i64 d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}
void check_basic(i64 p, int N) {
    if (!is_prime(p)) throw std::invalid_argument("p must be prime");
    if (N < 1) throw std::invalid_argument("precision N must be at least 1");
}
}  // namespace

Ctx PadicContext::rationals(i64 p, int N) {
    check_basic(p, N);
    return Ctx(new PadicContext(p, N, Extension::none, 1, 0, {-p}));
}

Ctx PadicContext::eisenstein(i64 p, int N, int e) {
    check_basic(p, N);
    if (e < 1) throw std::invalid_argument("ramification degree must be >= 1");
    std::vector<i64> rel(e, 0);
    rel[0] = -p;
    return Ctx(new PadicContext(p, N, e == 1 ? Extension::none : Extension::eisenstein, e, 0,
                                std::move(rel)));
}

Ctx PadicContext::cyclotomic(i64 p, int N, int level) {
    check_basic(p, N);
    if (level < 1) throw std::invalid_argument("cyclotomic level must be >= 1");
    BigInt step = int_pow(BigInt(p), static_cast<unsigned>(level - 1));
    int e = static_cast<int>(step) * static_cast<int>(p - 1);
    // Phi_{p^m}(1+X) = sum_{i<p} (1+X)^{i p^{m-1}}
    std::vector<BigInt> poly(e + 1, 0);
    for (i64 i = 0; i < p; ++i) {
        int n = static_cast<int>(i * static_cast<i64>(step));
        BigInt b = 1;
        for (int k = 0; k <= n; ++k) {
            poly[k] += b;
            b = b * (n - k) / (k + 1);
        }
    }
    auto tmp = Ctx(new PadicContext(p, N, Extension::none, 1, 0, {-p}));
    std::vector<i64> rel(e);
    for (int i = 0; i < e; ++i) rel[i] = reduce_big(poly[i], tmp->modulus());
    return Ctx(new PadicContext(p, N, Extension::cyclotomic, e, level, std::move(rel)));
}

bool PadicContext::same_field(const PadicContext& o) const {
    return p_ == o.p_ && kind_ == o.kind_ && e_ == o.e_ && level_ == o.level_;
}

std::string PadicContext::id() const {
    std::ostringstream os;
    switch (kind_) {
        case Extension::none: os << "Q_" << p_; break;
        case Extension::eisenstein: os << "Q_" << p_ << "(pi^" << e_ << "=" << p_ << ")"; break;
        case Extension::cyclotomic: {
            os << "Q_" << p_ << "(zeta_" << p_;
            if (level_ > 1) os << "^" << level_;
            os << ")";
            break;
        }
    }
    return os.str();
}

Ctx PadicContext::with_precision(int N) const {
    auto c = new PadicContext(*this);
    c->N_ = N;
    if (c->W_ < N + 2) {
        delete c;
        throw std::invalid_argument("precision N too large for 62-bit digits");
    }
    return Ctx(c);
}

// ---------------------------------------------------------------- scalar

Scalar::Scalar(Ctx ctx, int shift, std::vector<i64> digits, int prec)
    : ctx_(std::move(ctx)), shift_(shift), digits_(std::move(digits)), prec_(prec), zero_(false) {
    normalize();
}

void Scalar::normalize() {
    const int e = ctx_->degree();
    const int W = ctx_->width();
    const i64 p = ctx_->prime();
    prec_ = std::min(prec_, e * (shift_ + W));
    bool all_zero = true;
    for (int i = 0; i < e; ++i) {
        int t = ceil_div(prec_ - i, e) - shift_;
        if (t <= 0) {
            digits_[i] = 0;
        } else if (t < W) {
            digits_[i] %= ctx_->p_power(t);
        }
        if (digits_[i] != 0) all_zero = false;
    }
    if (all_zero) {
        zero_ = true;
        shift_ = 0;
        return;
    }
    zero_ = false;
    for (;;) {
        bool divisible = true;
        for (i64 c : digits_) {
            if (c % p != 0) {
                divisible = false;
                break;
            }
        }
        if (!divisible) break;
        for (i64& c : digits_) c /= p;
        ++shift_;
    }
}

Scalar Scalar::zero(const Ctx& ctx) { return zero(ctx, ctx->precision() * ctx->degree()); }

Scalar Scalar::zero(const Ctx& ctx, int prec_units) {
    Scalar s;
    s.ctx_ = ctx;
    s.digits_.assign(ctx->degree(), 0);
    s.prec_ = prec_units;
    s.zero_ = true;
    return s;
}

Scalar Scalar::from_int(const Ctx& ctx, i64 v) { return from_big(ctx, BigInt(v)); }

Scalar Scalar::from_big(const Ctx& ctx, const BigInt& v) { return from_rational(ctx, Rational(v)); }

Scalar Scalar::from_rational(const Ctx& ctx, const Rational& v) {
    if (v == 0) return zero(ctx);
    const i64 p = ctx->prime();
    int val = p_valuation(v, p);
    BigInt num = numerator(v);
    BigInt den = denominator(v);
    BigInt pp = p;
    if (val > 0) num /= int_pow(pp, static_cast<unsigned>(val));
    if (val < 0) den /= int_pow(pp, static_cast<unsigned>(-val));
    const i64 m = ctx->modulus();
    i64 d = mulmod(reduce_big(num, m), inverse_mod(reduce_big(den, m), m), m);
    std::vector<i64> digits(ctx->degree(), 0);
    digits[0] = d;
    return Scalar(ctx, val, std::move(digits), ctx->precision() * ctx->degree());
}

Scalar Scalar::uniformizer(const Ctx& ctx) {
    if (ctx->degree() == 1) return from_int(ctx, ctx->prime());
    std::vector<i64> digits(ctx->degree(), 0);
    digits[1] = 1;
    return Scalar(ctx, 0, std::move(digits), ctx->precision() * ctx->degree());
}

Scalar Scalar::from_digits(const Ctx& ctx, int shift, std::vector<i64> digits, int prec_units) {
    if (static_cast<int>(digits.size()) != ctx->degree())
        throw std::invalid_argument("digit vector length must equal the degree");
    for (auto& d : digits) d = ((d % ctx->modulus()) + ctx->modulus()) % ctx->modulus();
    return Scalar(ctx, shift, std::move(digits), prec_units);
}

int Scalar::val_units() const {
    if (zero_) return kInfinite;
    const int e = ctx_->degree();
    int best = kInfinite;
    for (int i = 0; i < e; ++i) {
        if (digits_[i] == 0) continue;
        best = std::min(best, e * digit_valuation(digits_[i], ctx_->prime()) + i);
    }
    return e * shift_ + best;
}

Rational Scalar::valuation() const {
    if (zero_) throw PrecisionError("valuation of an element that is zero at precision");
    return Rational(val_units(), ctx_->degree());
}

Rational Scalar::precision() const { return Rational(prec_, ctx_->degree()); }

namespace {
void require_same(const Scalar& a, const Scalar& b) {
    if (!a.valid() || !b.valid()) throw std::invalid_argument("uninitialized scalar");
    if (a.context().get() != b.context().get() && !a.context()->same_field(*b.context()))
        throw ContextMismatch("scalars from different fields: " + a.context()->id() + " vs " +
                              b.context()->id());
}
}  // namespace

Scalar Scalar::operator-() const {
    if (zero_) return *this;
    std::vector<i64> d(digits_.size());
    const i64 m = ctx_->modulus();
    for (size_t i = 0; i < d.size(); ++i) d[i] = submod(0, digits_[i], m);
    return Scalar(ctx_, shift_, std::move(d), prec_);
}

Scalar operator+(const Scalar& a, const Scalar& b) {
    require_same(a, b);
    int prec = std::min(a.prec_, b.prec_);
    if (a.zero_) return b.truncated(prec);
    if (b.zero_) return a.truncated(prec);
    const auto& ctx = *a.ctx_;
    const i64 m = ctx.modulus();
    const int W = ctx.width();
    int s = std::min(a.shift_, b.shift_);
    int da = a.shift_ - s;
    int db = b.shift_ - s;
    std::vector<i64> d(ctx.degree(), 0);
    for (int i = 0; i < ctx.degree(); ++i) {
        i64 x = da < W ? mulmod(a.digits_[i], ctx.p_power(da), m) : 0;
        i64 y = db < W ? mulmod(b.digits_[i], ctx.p_power(db), m) : 0;
        d[i] = addmod(x, y, m);
    }
    return Scalar(a.ctx_, s, std::move(d), prec);
}

Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

Scalar operator*(const Scalar& a, const Scalar& b) {
    require_same(a, b);
    int prec = std::min(a.prec_ + b.val_bound_units(), b.prec_ + a.val_bound_units());
    if (a.zero_ || b.zero_) return Scalar::zero(a.ctx_, prec);
    return Scalar(a.ctx_, a.shift_ + b.shift_, poly_mul(*a.ctx_, a.digits_, b.digits_), prec);
}

Scalar Scalar::inverse() const {
    if (zero_) throw PrecisionError("division by an element that is zero at precision");
    const auto& ctx = *ctx_;
    const int e = ctx.degree();
    const int W = ctx.width();
    int v = val_units();
    int vc = v - e * shift_;
    int prec = prec_ - 2 * v;
    if (vc == 0) {
        auto inv = unit_inverse(ctx, digits_);
        return Scalar(ctx_, -shift_, std::move(inv), std::min(prec, e * (W - shift_)));
    }
    auto t = poly_mul(ctx, digits_, pi_power_digits(ctx, e - vc));
    for (auto& c : t) c /= ctx.prime();
    auto uinv = unit_inverse(ctx, t);
    auto inv = poly_mul(ctx, uinv, pi_power_digits(ctx, e - vc));
    return Scalar(ctx_, -shift_ - 1, std::move(inv), std::min(prec, e * (W - 2 - shift_)));
}

Scalar operator/(const Scalar& a, const Scalar& b) {
    require_same(a, b);
    return a * b.inverse();
}

Scalar Scalar::pow(long long n) const {
    if (n < 0) return inverse().pow(-n);
    Scalar result = one(ctx_);
    Scalar base = *this;
    bool first = true;
    while (n) {
        if (n & 1) {
            result = first ? base : result * base;
            first = false;
        }
        n >>= 1;
        if (n) base = base * base;
    }
    return result;
}

Scalar Scalar::mul_p_power(int k) const {
    Scalar r = *this;
    r.prec_ += k * ctx_->degree();
    if (!r.zero_) r.shift_ += k;
    return r;
}

Scalar Scalar::mul_int(i64 k) const {
    if (k == 0) return zero(ctx_, kInfinite / 2);
    const i64 p = ctx_->prime();
    int v = 0;
    while (k % p == 0) {
        k /= p;
        ++v;
    }
    const int e = ctx_->degree();
    if (zero_) return zero(ctx_, prec_ + e * v);
    const i64 m = ctx_->modulus();
    i64 km = ((k % m) + m) % m;
    std::vector<i64> d(digits_.size());
    for (size_t i = 0; i < d.size(); ++i) d[i] = mulmod(digits_[i], km, m);
    return Scalar(ctx_, shift_ + v, std::move(d), prec_ + e * v);
}

Scalar Scalar::truncated(int prec_units) const {
    if (prec_units >= prec_) return *this;
    Scalar r = *this;
    r.prec_ = prec_units;
    if (r.zero_) return r;
    r.normalize();
    return r;
}

Rational Scalar::representative() const {
    if (ctx_->degree() != 1) throw std::invalid_argument("representative needs e = 1");
    if (zero_) return 0;
    return Rational(digits_[0]) * rat_pow(Rational(ctx_->prime()), shift_);
}

std::string Scalar::str() const {
    std::ostringstream os;
    const int e = ctx_->degree();
    auto prec_str = [&]() {
        std::ostringstream ps;
        if (e == 1)
            ps << "O(p^" << prec_ << ")";
        else
            ps << "O(pi^" << prec_ << ")";
        return ps.str();
    };
    if (zero_) return prec_str();
    if (e == 1) {
        os << digits_[0];
    } else {
        os << "(";
        bool first = true;
        for (int i = 0; i < e; ++i) {
            if (digits_[i] == 0) continue;
            if (!first) os << " + ";
            os << digits_[i];
            if (i > 0) os << "*pi" << (i > 1 ? "^" + std::to_string(i) : "");
            first = false;
        }
        os << ")";
    }
    if (shift_ != 0) os << "*p^" << shift_;
    os << " + " << prec_str();
    return os.str();
}

// ---------------------------------------------------------------- roots and characters

Scalar wide_rational(const Ctx& ctx, const Rational& v) {
    if (v == 0) return Scalar::zero(ctx, Scalar::kInfinite / 2);
    Scalar w = Scalar::from_rational(ctx->with_precision(ctx->width() - 2), v);
    return Scalar::from_digits(ctx, w.shift(), w.digits(), w.precision_units());
}

Scalar primitive_root(const Ctx& ctx) {
    if (ctx->kind() != Extension::cyclotomic)
        throw ContextMismatch("primitive_root needs a cyclotomic context");
    return Scalar::one(ctx) + Scalar::uniformizer(ctx);
}

namespace {
Scalar evaluate_digits(const Scalar& x, const Scalar& image_of_pi) {
    // p^shift * sum c_i image^i, computed in the image's context
    const Ctx& t = image_of_pi.context();
    Scalar acc = Scalar::zero(t, Scalar::kInfinite / 2);
    const auto& d = x.digits();
    for (int i = static_cast<int>(d.size()) - 1; i >= 0; --i) {
        acc = acc * image_of_pi + Scalar::from_int(t, d[i]);
    }
    return acc.mul_p_power(x.shift());
}
}  // namespace

Scalar galois_conjugate(const Scalar& x, i64 c) {
    const Ctx& ctx = x.context();
    if (ctx->kind() != Extension::cyclotomic)
        throw ContextMismatch("galois_conjugate needs a cyclotomic context");
    if (c % ctx->prime() == 0) throw std::invalid_argument("exponent must be prime to p");
    if (x.is_zero()) return x;
    i64 order = static_cast<i64>(int_pow(BigInt(ctx->prime()), ctx->level()));
    c = ((c % order) + order) % order;
    Scalar image = primitive_root(ctx).pow(c) - Scalar::one(ctx);
    return evaluate_digits(x, image).truncated(x.precision_units());
}

Scalar embed(const Scalar& x, const Ctx& target) {
    const Ctx& src = x.context();
    if (src->same_field(*target)) {
        if (x.is_zero()) return Scalar::zero(target, x.precision_units());
        return Scalar::from_digits(target, x.shift(), x.digits(), x.precision_units());
    }
    const int ratio = target->degree() / src->degree();
    if (src->prime() != target->prime()) throw ContextMismatch("different primes");
    if (src->degree() == 1) {
        if (x.is_zero()) return Scalar::zero(target, x.precision_units() * target->degree());
        std::vector<i64> d(target->degree(), 0);
        d[0] = x.digits()[0];
        return Scalar::from_digits(target, x.shift(), std::move(d),
                                   x.precision_units() * target->degree());
    }
    if (src->kind() == Extension::cyclotomic && target->kind() == Extension::cyclotomic &&
        target->level() >= src->level()) {
        if (x.is_zero()) return Scalar::zero(target, x.precision_units() * ratio);
        i64 step = static_cast<i64>(int_pow(BigInt(src->prime()), target->level() - src->level()));
        Scalar image = primitive_root(target).pow(step) - Scalar::one(target);
        return evaluate_digits(x, image).truncated(x.precision_units() * ratio);
    }
    throw ContextMismatch("no canonical embedding from " + src->id() + " into " + target->id());
}

CharacterValue additive_character(i64 p, int N, const Rational& y) {
    if (y == 0 || p_valuation(y, p) >= 0) {
        return {0, Scalar::one(PadicContext::rationals(p, N))};
    }
    int m = -p_valuation(y, p);
    auto ctx = PadicContext::cyclotomic(p, N, m);
    BigInt order = int_pow(BigInt(p), static_cast<unsigned>(m));
    Rational scaled = y * Rational(order);
    BigInt num = numerator(scaled) % order;
    BigInt den = denominator(scaled) % order;
    if (num < 0) num += order;
    i64 ord = static_cast<i64>(order);
    i64 exponent = mulmod(static_cast<i64>(num), inverse_mod(static_cast<i64>(den), ord), ord);
    return {m, primitive_root(ctx).pow(exponent)};
}

int factorial_valuation(i64 n, i64 p) {
    int v = 0;
    for (i64 q = p; q <= n; q *= p) {
        v += static_cast<int>(n / q);
        if (q > n / p) break;
    }
    return v;
}

Scalar padic_binomial(const Scalar& a, int n) {
    if (n < 0) throw std::invalid_argument("binomial index must be >= 0");
    const Ctx& ctx = a.context();
    if (!a.is_zero() && a.val_units() < 0) throw std::invalid_argument("binomial needs a in Z_p");
    if (n == 0) return Scalar::one(ctx).truncated(a.precision_units());
    int loss = factorial_valuation(n, ctx->prime()) * ctx->degree();
    if (loss >= a.precision_units())
        throw PrecisionError("binomial: val(n!) exceeds the guaranteed digits");
    Scalar num = a;
    for (int i = 1; i < n; ++i) num *= (a - Scalar::from_int(ctx, i));
    BigInt fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    return num / Scalar::from_big(ctx, fact);
}

Scalar padic_binomial(const Ctx& ctx, const Rational& a, int n) {
    if (n < 0) throw std::invalid_argument("binomial index must be >= 0");
    if (a != 0 && p_valuation(a, ctx->prime()) < 0)
        throw std::invalid_argument("binomial needs a in Z_p");
    BigInt num = 1;
    BigInt den = 1;
    const BigInt& u = numerator(a);
    const BigInt& w = denominator(a);
    for (int i = 0; i < n; ++i) {
        num *= (u - BigInt(i) * w);
        den *= w * (i + 1);
    }
    return Scalar::from_rational(ctx, Rational(num, den));
}

}  // namespace padic
