#include "doctest.h"

#include "padic/mahler.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace padic;

namespace {

// Mahler coefficients of a rational-valued function on 0..M, exactly.
std::vector<Rational> exact_mahler(const std::function<Rational(int)>& f, int M) {
    std::vector<Rational> vals;
    for (int i = 0; i <= M; ++i) vals.push_back(f(i));
    std::vector<Rational> out;
    for (int m = 0; m <= M; ++m) {
        Rational s = 0;
        for (int i = 0; i <= m; ++i)
            s += Rational(binomial_coefficient(m, i)) * vals[i] * ((m - i) % 2 ? -1 : 1);
        out.push_back(s);
    }
    return out;
}

PowerSeries random_poly(std::mt19937_64& rng, const Ctx& ctx, int K) {
    std::vector<Scalar> v;
    for (int i = 0; i <= K; ++i) v.push_back(Scalar::from_int(ctx, static_cast<std::int64_t>(rng() % 6561)));
    return PowerSeries::polynomial(v);
}

}  // namespace

TEST_CASE("Mahler coefficients") {
    auto ctx = PadicContext::rationals(3, 8);
    std::vector<Scalar> ident, cst;
    for (int i = 0; i <= 10; ++i) {
        ident.push_back(Scalar::from_int(ctx, i));
        cst.push_back(Scalar::from_int(ctx, 4));
    }
    auto fi = mahler_coeffs(ident);
    CHECK(fi.coeffs[1].equals(Scalar::one(ctx)));
    CHECK(fi.coeffs[0].is_zero());
    for (int n = 2; n <= 10; ++n) CHECK(fi.coeffs[n].is_zero());
    auto fc = mahler_coeffs(cst);
    CHECK(fc.coeffs[0].equals(Scalar::from_int(ctx, 4)));
    for (int n = 1; n <= 10; ++n) CHECK(fc.coeffs[n].is_zero());
    auto c2 = PadicContext::rationals(2, 12);
    std::vector<Scalar> pw;
    for (int i = 0; i <= 12; ++i) pw.push_back(Scalar::from_int(c2, 1LL << i));
    auto f2 = mahler_coeffs(pw);
    for (int n = 0; n <= 12; ++n) CHECK(f2.coeffs[n].equals(Scalar::one(c2)));
    // round trip on the grid
    std::mt19937_64 rng(1);
    std::vector<Scalar> vals;
    for (int i = 0; i <= 20; ++i) vals.push_back(Scalar::from_int(ctx, static_cast<std::int64_t>(rng() % 1000)));
    auto f = mahler_coeffs(vals);
    for (int i = 0; i <= 20; ++i) CHECK(eval_mahler(f, Rational(i)).equals(vals[i]));
}

TEST_CASE("C^r norms") {
    auto ctx = PadicContext::rationals(3, 8);
    MahlerFunction f{ctx, {Scalar::zero(ctx), Scalar::one(ctx)}, 0.0};
    CHECK(cr_norm(f, 0.0).log_norm == doctest::Approx(0.0));
    CHECK(cr_norm(f, 1.0).log_norm == doctest::Approx(log_p(2.0, 3)));
    // sup norm equals the sup of the coefficients, seen on sampled points
    std::mt19937_64 rng(4);
    std::vector<Scalar> c;
    for (int i = 0; i <= 15; ++i) c.push_back(Scalar::from_rational(ctx, Rational(static_cast<int>(rng() % 50) + 1, 9)));
    MahlerFunction g{ctx, c, 0.0};
    int min_val = 1000;
    for (int i = 0; i < 200; ++i) {
        Rational z(static_cast<long long>(rng() % 100000), static_cast<long long>(1 + 3 * (rng() % 50)));
        Scalar v = eval_mahler(g, z);
        if (!v.is_zero()) min_val = std::min(min_val, v.val_units());
    }
    for (int i = 0; i <= 15; ++i) {
        Scalar v = eval_mahler(g, Rational(i));
        if (!v.is_zero()) min_val = std::min(min_val, v.val_units());
    }
    CHECK(static_cast<double>(-min_val) == doctest::Approx(cr_norm(g, 0.0).log_norm));
}

TEST_CASE("moments of Dirac masses") {
    auto ctx = PadicContext::rationals(3, 8);
    auto d = dirac(ctx, Rational(5), 20);
    std::int64_t power = 1;
    for (int j = 0; j <= 3; ++j, power *= 5) CHECK(moment(d, Rational(0), 0, j).equals(Scalar::from_int(ctx, power)));
    auto d1 = dirac(ctx, Rational(1), 20);
    CHECK(moment(d1, Rational(0), 1, 0).is_zero());
    CHECK(moment(d1, Rational(1), 1, 0).equals(Scalar::one(ctx)));
    CHECK(moment(d1, Rational(4), 1, 2).equals(Scalar::from_int(ctx, 9)));
    // point mass at a rational
    auto dh = dirac(ctx, Rational(1, 2), 40);
    CHECK(moment(dh, Rational(2), 1, 1).equals(Scalar::from_rational(ctx, Rational(-3, 2))));
}

TEST_CASE("moments agree with the Mahler pairing") {
    auto ctx = PadicContext::rationals(3, 8);
    std::mt19937_64 rng(12);
    const int K = 30;
    for (int trial = 0; trial < 10; ++trial) {
        PowerSeries w = random_poly(rng, ctx, K);
        AmiceDistribution mu{w, 0.0};
        int n = static_cast<int>(rng() % 3);
        int a = static_cast<int>(rng() % 9);
        int j = static_cast<int>(rng() % 3);
        auto coeffs = exact_mahler(
            [&](int z) {
                Rational d = Rational(z - a);
                BigInt mod = int_pow(BigInt(3), n);
                if (((z - a) % static_cast<int>(mod)) != 0) return Rational(0);
                Rational r = 1;
                for (int t = 0; t < j; ++t) r *= d;
                return r;
            },
            K);
        Scalar oracle = Scalar::zero(ctx);
        for (int m = 0; m <= K; ++m) oracle += w[m] * Scalar::from_rational(ctx, coeffs[m]);
        CHECK(moment(mu, Rational(a), n, j).equals(oracle));
    }
}

TEST_CASE("restriction coherence and the psi dictionary") {
    auto ctx = PadicContext::rationals(3, 8);
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        AmiceDistribution mu{random_poly(rng, ctx, 40), 0.0};
        Scalar total = moment(mu, 0, 0, 0);
        Scalar parts = moment(mu, 0, 1, 0) + moment(mu, 1, 1, 0) + moment(mu, 2, 1, 0);
        CHECK(total.equals(parts));
        AmiceDistribution pm{psi(mu.transform), 0.0};
        for (int j = 0; j <= 2; ++j)
            CHECK(moment(pm, 0, 0, j).equals(moment(mu, 0, 1, j).mul_p_power(-j)));
    }
}

TEST_CASE("Amice-Velu criterion") {
    auto ctx = PadicContext::rationals(3, 8);
    AmiceOptions opt;
    for (int r = 0; r <= 2; ++r) {
        opt.r = r;
        CHECK(amice_velu_check(dirac(ctx, 0, 30), opt).verdict == Verdict::pass);
    }
    // log(1+X) is the derivative at 0: order 1, all moments integral
    opt.r = 1;
    AmiceDistribution lg{log_series(ctx, 500), 1.0};
    CHECK(amice_velu_check(lg, opt).verdict == Verdict::pass);
    // at a short window the level-3 moments lose their digits
    AmiceDistribution lg60{log_series(ctx, 60), 1.0};
    CHECK(amice_velu_check(lg60, opt).verdict == Verdict::inconclusive);
    // sum p^{-n} X^{p^n} is not of order 0
    std::vector<Scalar> w(28, Scalar::zero(ctx));
    for (int n = 0; n <= 3; ++n) w[static_cast<int>(std::pow(3, n))] = Scalar::from_rational(ctx, Rational(1, static_cast<int>(std::pow(3, n))));
    opt.r = 0;
    opt.band = 1;
    CHECK(amice_velu_check({PowerSeries::polynomial(w), 0.0}, opt).verdict == Verdict::fail);
}

TEST_CASE("locally polynomial functions") {
    auto ctx = PadicContext::rationals(3, 8);
    auto f = parse_locpoly("# two cosets\n0 1 : 1 2\n1 1 : 3\n", 3);
    CHECK(f.pieces.size() == 2);
    CHECK(f.evaluate(3, 3) == 7);
    CHECK(f.evaluate(4, 3) == 3);
    CHECK(f.evaluate(2, 3) == 0);
    CHECK_THROWS_AS(parse_locpoly("0 1 : 1\n3 2 : 1\n", 3), std::invalid_argument);
    auto again = parse_locpoly(format_locpoly(f, 3), 3);
    CHECK(again.pieces.size() == 2);
    CHECK(again.pieces[0].coeffs[1] == 2);
    // 1_{Z_p} against a point mass
    auto one = parse_locpoly("0 0 : 1", 3);
    CHECK(integrate_locpoly(dirac(ctx, 7, 20), one).equals(Scalar::one(ctx)));
    // additivity over disjoint pieces
    std::mt19937_64 rng(2);
    AmiceDistribution mu{random_poly(rng, ctx, 30), 0.0};
    auto a = parse_locpoly("0 1 : 1 2", 3);
    auto b = parse_locpoly("1 1 : 3", 3);
    CHECK(integrate_locpoly(mu, f).equals(integrate_locpoly(mu, a) + integrate_locpoly(mu, b)));
    // the dual distribution of a single piece: f^{(i)}(a)/i! pairs to the coefficient
    for (int i = 0; i <= 2; ++i) {
        auto dual = dirac_derivative(ctx, 4, i, 60);
        LocPolyFunction piece{Domain::zp, {{Rational(4), 2, std::vector<Rational>(i + 1, Rational(0))}}};
        piece.pieces[0].coeffs[i] = Rational(5);
        CHECK(integrate_locpoly(dual, piece).equals(Scalar::from_int(ctx, 5)));
    }
}
