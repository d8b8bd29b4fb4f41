#include "doctest.h"

#include "padic/series.hpp"

#include <random>

using namespace padic;

namespace {

PowerSeries random_series(std::mt19937_64& rng, const Ctx& ctx, int K) {
    std::uniform_int_distribution<std::int64_t> digit(0, ctx->p_power(ctx->precision()) - 1);
    std::vector<Scalar> v;
    for (int i = 0; i <= K; ++i) v.push_back(Scalar::from_int(ctx, digit(rng)));
    return PowerSeries(ctx, std::move(v), TailModel::integral());
}

Rational random_unit(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(1, 40);
    for (;;) {
        int a = d(rng) * (rng() % 2 ? 1 : -1);
        int b = d(rng);
        if (a % 3 != 0 && b % 3 != 0) return Rational(a, b);
    }
}

}  // namespace

TEST_CASE("phi on small inputs") {
    auto c2 = PadicContext::rationals(2, 8);
    PowerSeries px = phi(PowerSeries::variable(c2, 10));
    CHECK(px[1].equals(Scalar::from_int(c2, 2)));
    CHECK(px[2].equals(Scalar::from_int(c2, 1)));
    for (int i = 3; i <= 10; ++i) CHECK(px[i].is_zero());
    auto ctx = PadicContext::rationals(3, 8);
    PowerSeries c = PowerSeries::constant(Scalar::from_int(ctx, 7), 12);
    CHECK(phi(c).equals(c));
    // phi(log(1+X)) = p log(1+X)
    PowerSeries lg = log_series(ctx, 40);
    CHECK(phi(lg).equals(lg.scaled(Scalar::from_int(ctx, 3))));
}

TEST_CASE("psi basics") {
    auto ctx = PadicContext::rationals(3, 8);
    PowerSeries x = PowerSeries::polynomial(ctx, {0, 1});
    PowerSeries px = psi(x);
    CHECK(px.truncation() == 0);
    CHECK(px[0].equals(Scalar::from_int(ctx, -1)));
    PowerSeries x3 = PowerSeries::polynomial(ctx, {0, 0, 0, 1});
    CHECK(psi(x3).equals(PowerSeries::polynomial(ctx, {0, 1})));
    // psi((1+X)^i phi(g)) = 0 for 1 <= i < p
    std::mt19937_64 rng(7);
    PowerSeries g = random_series(rng, ctx, 30);
    for (int i = 1; i < 3; ++i) {
        PowerSeries y = PowerSeries::one_plus_x_power(ctx, i, 30) * phi(g);
        CHECK(psi(y).is_zero());
    }
    CHECK(psi(phi(g)).equals(g));
    // phi(psi(X)) = -1 differs from X
    CHECK_FALSE(phi(psi(x)).equals(x));
}

TEST_CASE("psi output truncation and precision") {
    auto ctx = PadicContext::rationals(3, 8);
    std::mt19937_64 rng(11);
    PowerSeries f = random_series(rng, ctx, 60);
    PowerSeries g = psi(f);
    CHECK(g.truncation() == 20);
    CHECK(g[0].precision_units() == 8);
    CHECK(g[20].precision_units() < 8);
}

TEST_CASE("projection formula on random pairs") {
    auto ctx = PadicContext::rationals(3, 8);
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        PowerSeries f = random_series(rng, ctx, 45);
        PowerSeries g = random_series(rng, ctx, 45);
        CHECK(psi(phi(f) * g).equals(f * psi(g)));
    }
}

TEST_CASE("gamma action") {
    auto ctx = PadicContext::rationals(3, 8);
    std::mt19937_64 rng(99);
    PowerSeries f = random_series(rng, ctx, 30);
    CHECK(gamma_act(Rational(1), f).equals(f));
    PowerSeries lg = log_series(ctx, 30);
    for (int trial = 0; trial < 6; ++trial) {
        Rational a = random_unit(rng);
        Rational b = random_unit(rng);
        CHECK(gamma_act(a, gamma_act(1 / a, f)).equals(f));
        CHECK(gamma_act(a, gamma_act(b, f)).equals(gamma_act(a * b, f)));
        CHECK(gamma_act(a, lg).equals(lg.scaled(Scalar::from_rational(ctx, a))));
        CHECK(gamma_act(a, phi(f)).equals(phi(gamma_act(a, f))));
        CHECK(gamma_act(a, psi(f)).equals(psi(gamma_act(a, f))));
    }
    // finite-precision exponent: binomials eat the digits
    Scalar a = Scalar::from_int(ctx, 4);
    PowerSeries small = random_series(rng, ctx, 10);
    CHECK(gamma_act(a, small).equals(gamma_act(Rational(4), small)));
    CHECK_THROWS_AS(gamma_act(a, f), PrecisionError);
}

TEST_CASE("twisted derivative") {
    auto ctx = PadicContext::rationals(3, 8);
    PowerSeries pw = PowerSeries::one_plus_x_power(ctx, Rational(1, 2), 30);
    CHECK(twisted_derivative(pw, 1).equals(pw.scaled(Scalar::from_rational(ctx, Rational(1, 2)))));
    CHECK(twisted_derivative(PowerSeries::constant(Scalar::from_int(ctx, 5), 10), 1).is_zero());
    PowerSeries d2 = twisted_derivative(PowerSeries::polynomial(ctx, {0, 1}), 2);
    CHECK(d2[0].equals(Scalar::one(ctx)));
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        PowerSeries f = random_series(rng, ctx, 40);
        CHECK(twisted_derivative(phi(f), 1).equals(phi(twisted_derivative(f, 1)).scaled(Scalar::from_int(ctx, 3))));
    }
}

TEST_CASE("log series") {
    auto ctx = PadicContext::rationals(3, 8);
    PowerSeries lg = log_series(ctx, 50);
    CHECK(lg[1].equals(Scalar::one(ctx)));
    CHECK(lg[9].valuation() == -2);
    // log((1+X)^2) = 2 log(1+X)
    CHECK(gamma_act(Rational(2), lg).equals(lg.scaled(Scalar::from_int(ctx, 2))));
    auto tiny = PadicContext::rationals(3, 2);
    CHECK_THROWS_AS(log_series(tiny, 9), PrecisionError);
}

TEST_CASE("disk norms") {
    auto ctx = PadicContext::rationals(3, 8);
    auto n1 = disk_norm(PowerSeries::polynomial(ctx, {0, 1}), Rational(1));
    CHECK(*n1.value == 1);
    auto n2 = disk_norm(PowerSeries::polynomial(ctx, {3, 0, 1}), Rational(1, 2));
    CHECK(*n2.value == 1);
    auto lau = LaurentSlice(2, PowerSeries::polynomial(ctx, {1, 3, 9}));
    CHECK(*gauss_norm(lau).value == 0);
    // multiplicativity at the Gauss point
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        PowerSeries f = random_series(rng, ctx, 20);
        PowerSeries g = random_series(rng, ctx, 20);
        auto nf = disk_norm(f, Rational(0));
        auto ng = disk_norm(g, Rational(0));
        auto nfg = disk_norm(f * g, Rational(0));
        if (nf.clipped || ng.clipped || nfg.clipped) continue;
        CHECK(*nfg.value == *nf.value + *ng.value);
    }
}

TEST_CASE("order estimates") {
    auto ctx = PadicContext::rationals(3, 8);
    PowerSeries lg = log_series(ctx, 200);
    CHECK(order_r_estimate(lg, 1.0).verdict == GrowthVerdict::bounded_so_far);
    CHECK(order_r_estimate(lg * lg, 1.0).verdict == GrowthVerdict::growing);
    CHECK(order_r_estimate(PowerSeries::polynomial(ctx, {1, 2, 3, 4}), 0.0).verdict ==
          GrowthVerdict::bounded_so_far);
}

TEST_CASE("Laurent slices") {
    auto ctx = PadicContext::rationals(3, 8);
    std::mt19937_64 rng(17);
    auto rand_slice = [&](int neg, int K) { return LaurentSlice(neg, random_series(rng, ctx, K), 200); };
    for (int trial = 0; trial < 5; ++trial) {
        LaurentSlice f = rand_slice(2, 40);
        LaurentSlice g = rand_slice(1, 40);
        CHECK(psi(phi(f) * g).equals(f * psi(g)));
        CHECK(psi(phi(f)).equals(f));
    }
    // 1/X times X is 1
    LaurentSlice inv(1, PowerSeries::polynomial(ctx, {1}), 100);
    LaurentSlice x(0, PowerSeries::polynomial(ctx, {0, 1}), 100);
    CHECK((inv * x).equals(LaurentSlice(0, PowerSeries::polynomial(ctx, {1}))));
    // phi(1/X) * phi(X) = 1
    LaurentSlice prod = phi(inv) * phi(x);
    CHECK(prod.equals(LaurentSlice(0, PowerSeries::polynomial(ctx, {1}))));
    // gamma on 1/X
    LaurentSlice gi = gamma_act(Rational(2), inv) * gamma_act(Rational(2), x);
    CHECK(gi.equals(LaurentSlice(0, PowerSeries::polynomial(ctx, {1}))));
    // a small window overflows under phi
    LaurentSlice narrow(1, PowerSeries::polynomial(ctx, {1}), 2);
    CHECK_THROWS_AS(phi(narrow), WindowOverflow);
}

TEST_CASE("phi inverse into L_m[[t]]") {
    auto ctx = PadicContext::rationals(3, 8);
    TSeries tx = phi_inverse_m(PowerSeries::polynomial(ctx, {0, 1}), 1, 3);
    CHECK(tx.rows.size() == 2);
    CHECK(tx.rows[0][0].equals(primitive_root(tx.ctx) - Scalar::one(tx.ctx)));
    TSeries tc = phi_inverse_m(PowerSeries::constant(Scalar::from_int(ctx, 5), 20), 2, 3);
    CHECK(tc.rows.size() == 6);
    for (const auto& row : tc.rows) {
        CHECK(row[0].equals(Scalar::from_int(tc.ctx, 5)));
        for (int j = 1; j <= 3; ++j) CHECK(row[j].is_zero());
    }
    // log(1+X) goes to t/p^m + log(zeta), and log(zeta) has positive valuation
    TSeries tl = phi_inverse_m(log_series(ctx, 60), 1, 2);
    for (const auto& row : tl.rows) {
        CHECK(row[1].equals(Scalar::from_rational(tl.ctx, Rational(1, 3))));
        CHECK(row[0].val_bound_units() > 0);
    }
}
