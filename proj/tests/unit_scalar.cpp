#include "doctest.h"

#include "padic/scalar.hpp"

#include <random>

using namespace padic;

namespace {

Scalar random_scalar(std::mt19937_64& rng, const Ctx& ctx, int min_shift = -2, int max_shift = 3) {
    std::uniform_int_distribution<std::int64_t> digit(0, ctx->modulus() - 1);
    std::uniform_int_distribution<int> sh(min_shift, max_shift);
    std::vector<std::int64_t> d(ctx->degree());
    for (auto& x : d) x = digit(rng);
    int s = sh(rng);
    return Scalar::from_digits(ctx, s, d, ctx->precision() * ctx->degree() + s * ctx->degree());
}

}  // namespace

TEST_CASE("inverse of -2 is the geometric series in 3") {
    auto ctx = PadicContext::rationals(3, 5);
    Scalar x = Scalar::from_int(ctx, -2).inverse();
    CHECK(x.equals(Scalar::from_int(ctx, 1 + 3 + 9 + 27 + 81)));
    CHECK(x.precision_units() == 5);
    CHECK(x.val_units() == 0);
}

TEST_CASE("rational constants and their valuations") {
    auto ctx = PadicContext::rationals(3, 8);
    Scalar a = Scalar::from_rational(ctx, Rational(5, 9));
    CHECK(a.valuation() == -2);
    CHECK(a.representative() * 1 != 0);
    Scalar b = a * Scalar::from_int(ctx, 9);
    CHECK(b.equals(Scalar::from_int(ctx, 5)));
    CHECK(Scalar::from_int(ctx, 54).val_units() == 3);
    CHECK(Scalar::zero(ctx).is_zero());
}

TEST_CASE("cyclotomic relation and root of unity order") {
    for (int m = 1; m <= 2; ++m) {
        auto ctx = PadicContext::cyclotomic(3, 8, m);
        Scalar z = primitive_root(ctx);
        std::int64_t order = m == 1 ? 3 : 9;
        CHECK(z.pow(order).equals(Scalar::one(ctx)));
        CHECK_FALSE(z.pow(order / 3).equals(Scalar::one(ctx)));
        // val(zeta - 1) = 1/(p^{m-1}(p-1))
        Scalar pi = z - Scalar::one(ctx);
        CHECK(pi.valuation() == Rational(1, (m == 1 ? 1 : 3) * 2));
    }
    auto ctx = PadicContext::cyclotomic(3, 8, 1);
    Scalar z = primitive_root(ctx);
    CHECK((z * z + z + Scalar::one(ctx)).is_zero());
}

TEST_CASE("norm of zeta - 1 is p") {
    auto ctx = PadicContext::cyclotomic(3, 8, 2);
    Scalar prod = Scalar::one(ctx);
    for (std::int64_t c = 1; c < 9; ++c) {
        if (c % 3 == 0) continue;
        prod *= galois_conjugate(primitive_root(ctx), c) - Scalar::one(ctx);
    }
    CHECK(prod.equals(Scalar::from_int(ctx, 3)));
}

TEST_CASE("eisenstein uniformizer") {
    auto ctx = PadicContext::eisenstein(3, 6, 2);
    Scalar pi = Scalar::uniformizer(ctx);
    CHECK(pi.valuation() == Rational(1, 2));
    CHECK((pi * pi).equals(Scalar::from_int(ctx, 3)));
    CHECK((pi.inverse() * pi).equals(Scalar::one(ctx)));
}

TEST_CASE("embedding between cyclotomic levels") {
    auto c1 = PadicContext::cyclotomic(3, 8, 1);
    auto c2 = PadicContext::cyclotomic(3, 8, 2);
    Scalar z1 = embed(primitive_root(c1), c2);
    CHECK(z1.equals(primitive_root(c2).pow(3)));
    auto q = PadicContext::rationals(3, 8);
    CHECK(embed(Scalar::from_int(q, 7), c2).equals(Scalar::from_int(c2, 7)));
    CHECK_THROWS_AS(embed(primitive_root(c2), c1), ContextMismatch);
}

TEST_CASE("context mismatch is reported") {
    auto a = PadicContext::rationals(3, 8);
    auto b = PadicContext::cyclotomic(3, 8, 1);
    CHECK_THROWS_AS(Scalar::one(a) + Scalar::one(b), ContextMismatch);
    auto c = PadicContext::rationals(5, 8);
    CHECK_THROWS_AS(Scalar::one(a) * Scalar::one(c), ContextMismatch);
}

TEST_CASE("additive character") {
    auto ch = additive_character(3, 8, Rational(1, 9));
    CHECK(ch.level == 2);
    CHECK(ch.value.equals(primitive_root(ch.value.context())));
    auto ch2 = additive_character(3, 8, Rational(2, 3));
    CHECK(ch2.level == 1);
    CHECK(ch2.value.equals(primitive_root(ch2.value.context()).pow(2)));
    auto ch0 = additive_character(3, 8, Rational(7, 2));
    CHECK(ch0.level == 0);
    CHECK(ch0.value.equals(Scalar::one(ch0.value.context())));
    // e(y1 + y2) = e(y1) e(y2) for levels at most 2
    auto c2 = PadicContext::cyclotomic(3, 8, 2);
    std::vector<Rational> ys{Rational(1, 9), Rational(4, 9), Rational(1, 3), Rational(2, 3),
                             Rational(5, 1), Rational(7, 9)};
    for (const auto& y1 : ys) {
        for (const auto& y2 : ys) {
            auto lift = [&](const Rational& y) {
                auto v = additive_character(3, 8, y);
                return embed(v.value, c2);
            };
            CHECK(lift(y1 + y2).equals(lift(y1) * lift(y2)));
        }
    }
}

TEST_CASE("binomials") {
    auto ctx = PadicContext::rationals(3, 8);
    CHECK(padic_binomial(Scalar::from_int(ctx, 5), 2).equals(Scalar::from_int(ctx, 10)));
    CHECK(padic_binomial(ctx, Rational(5), 2).equals(Scalar::from_int(ctx, 10)));
    // binom(-1, n) = (-1)^n, binom(1/2, 2) = -1/8
    CHECK(padic_binomial(ctx, Rational(-1), 7).equals(Scalar::from_int(ctx, -1)));
    CHECK(padic_binomial(ctx, Rational(1, 2), 2).equals(Scalar::from_rational(ctx, Rational(-1, 8))));
    // Vandermonde: binom(a+b, n) = sum binom(a,k) binom(b,n-k)
    std::vector<Rational> as{Rational(1, 2), Rational(4), Rational(-7, 5), Rational(10)};
    for (const auto& a : as) {
        for (const auto& b : as) {
            for (int n = 0; n <= 6; ++n) {
                Scalar sum = Scalar::zero(ctx);
                for (int k = 0; k <= n; ++k)
                    sum += padic_binomial(ctx, a, k) * padic_binomial(ctx, b, n - k);
                CHECK(sum.equals(padic_binomial(ctx, a + b, n)));
            }
        }
    }
    // the finite-precision variant loses val(n!) digits and then gives up
    Scalar a = Scalar::from_rational(ctx, Rational(1, 2));
    Scalar b5 = padic_binomial(a, 5);
    CHECK(b5.precision_units() == 8 - factorial_valuation(5, 3));
    CHECK(b5.equals(padic_binomial(ctx, Rational(1, 2), 5)));
    CHECK_THROWS_AS(padic_binomial(a, 20), PrecisionError);
}

TEST_CASE("ring axioms on random triples") {
    std::mt19937_64 rng(20240611);
    std::vector<Ctx> ctxs{PadicContext::rationals(3, 8), PadicContext::cyclotomic(3, 8, 2),
                          PadicContext::eisenstein(3, 8, 3), PadicContext::rationals(5, 6)};
    for (const auto& ctx : ctxs) {
        for (int trial = 0; trial < 250; ++trial) {
            Scalar a = random_scalar(rng, ctx);
            Scalar b = random_scalar(rng, ctx);
            Scalar c = random_scalar(rng, ctx);
            CHECK((a + b).equals(b + a));
            CHECK((a * b).equals(b * a));
            CHECK(((a + b) + c).equals(a + (b + c)));
            CHECK(((a * b) * c).equals(a * (b * c)));
            CHECK((a * (b + c)).equals(a * b + a * c));
            CHECK((a - a).is_zero());
            if (!a.is_zero() && !b.is_zero()) {
                CHECK((a * b).val_units() == a.val_units() + b.val_units());
                if (a.relative_units() > 0) CHECK(((a / a) - Scalar::one(ctx)).is_zero());
            }
            if (!(a + b).is_zero() && !a.is_zero() && !b.is_zero())
                CHECK((a + b).val_units() >= std::min(a.val_units(), b.val_units()));
        }
    }
}

TEST_CASE("precision bookkeeping") {
    auto ctx = PadicContext::rationals(3, 8);
    Scalar a = Scalar::from_int(ctx, 1).truncated(4);
    Scalar b = Scalar::from_int(ctx, 9);
    CHECK((a + b).precision_units() == 4);
    CHECK((a * b).precision_units() == 6);  // 9 * O(3^4) = O(3^6)
    CHECK(Scalar::from_int(ctx, 9).inverse().precision_units() == 8 - 4);
    Scalar z = Scalar::zero(ctx, 3);
    CHECK_THROWS_AS(z.inverse(), PrecisionError);
    CHECK_THROWS_AS(z.valuation(), PrecisionError);
    CHECK(b.mul_int(6).equals(Scalar::from_int(ctx, 54)));
    CHECK(b.mul_int(6).precision_units() == 9);
}
