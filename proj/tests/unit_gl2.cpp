#include "doctest.h"

#include "padic/gl2.hpp"

#include <cmath>
#include <random>

using namespace padic;

namespace {

FilteredPhiModule defaults() { return make_module(3, 3, 3, 6); }

double as_double(const Rational& x) { return static_cast<double>(x); }

// Riemann-sum oracle for int_{c + p^n Z_p} rho^{val(z - x)} dx, refining only the coset
// that contains z. Real-valued: the only ratio that occurs is rho / p, of absolute value < 1.
double coset_oracle(const Rational& z, const Rational& c, int n, int depth, double rho, std::int64_t p) {
    Rational diff = z - c;
    if (diff != 0 && p_valuation(diff, p) < n) return std::pow(rho, p_valuation(diff, p)) * std::pow(double(p), -n);
    if (n >= depth) return 0.0;
    double s = 0.0;
    for (std::int64_t t = 0; t < p; ++t)
        s += coset_oracle(z, c + Rational(t) * rat_pow(Rational(p), n), n + 1, depth, rho, p);
    return s;
}

Rational random_small(std::mt19937_64& rng, int lo_val) {
    long long num = static_cast<long long>(rng() % 61) - 30;
    return Rational(num) * rat_pow(Rational(3), lo_val);
}

}  // namespace

TEST_CASE("Bruhat factorization reproduces the matrix") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        GL2Element g{random_small(rng, -1), random_small(rng, 0), trial % 3 ? random_small(rng, 1) : Rational(0),
                     random_small(rng, 0)};
        if (g.det() == 0) continue;
        GL2Element prod = GL2Element::identity();
        for (const auto& f : bruhat_factor(g, 3)) prod = prod * f.matrix(3);
        CHECK(prod == g);
    }
    CHECK_THROWS(bruhat_factor(GL2Element{1, 2, 2, 4}, 3));
}

TEST_CASE("chart swap and central character") {
    auto mod = defaults();
    auto ctx = PadicContext::rationals(3, 8);
    auto gen = lalpha_generator(mod, ctx, LAlphaKind::translate, Rational(1, 3), 0, 30);
    const auto& f = gen.pair;
    GL2Element w = GL2Element::chart_swap(3);
    // (w f)_1 = (p / beta)(-p)^{k-2} f_2 = -3/2 f_2; w^2 = p acts by 1/2
    for (int i = 0; i < 4; ++i) {
        Rational z(3 * i + 1);
        CHECK(gl2_act_point(w, f, 3 * z).equals(f.chart_value(2, z) * Scalar::from_rational(ctx, Rational(-3, 2))));
        CHECK(gl2_act_point(w * w, f, z).equals(f.value(z) * Scalar::from_rational(ctx, Rational(1, 2))));
        CHECK(gl2_act_point(GL2Element::scalar(2), f, z).equals(f.value(z) * Scalar::from_int(ctx, 2)));
        CHECK(gl2_act_point(GL2Element::identity(), f, z).equals(f.value(z)));
    }
}

TEST_CASE("group law at sample points") {
    auto mod = defaults();
    auto ctx = PadicContext::rationals(3, 8);
    auto gen = lalpha_generator(mod, ctx, LAlphaKind::translate, Rational(1, 3), 0, 30);
    GL2Element g{2, Rational(1, 3), 3, 5}, h{1, 1, Rational(1, 9), 4};
    auto hf = gl2_act_pair(h, gen.pair, 30).pair;
    for (Rational z : {Rational(1, 3), Rational(5), Rational(7, 9), Rational(2, 27)})
        CHECK(gl2_act_point(g * h, gen.pair, z).equals(gl2_act_point(g, hf, z)));
}

TEST_CASE("L(alpha) generators") {
    auto mod = defaults();
    auto ctx = PadicContext::rationals(3, 8);
    CHECK_THROWS_AS(lalpha_generator(mod, ctx, LAlphaKind::monomial, 0, 1, 20), std::invalid_argument);
    for (auto kind : {LAlphaKind::monomial, LAlphaKind::translate}) {
        auto gen = lalpha_generator(mod, ctx, kind, Rational(2), 0, 40);
        CHECK(gen.norm1.verdict == GrowthVerdict::bounded_so_far);
        CHECK(gen.norm2.verdict == GrowthVerdict::bounded_so_far);
    }
    // the translate generator at a = 0 is z -> rho^{val z} z
    auto t0 = lalpha_generator(mod, ctx, LAlphaKind::translate, 0, 0, 20);
    CHECK(t0.pair.value(Rational(1, 9)).equals(Scalar::from_rational(ctx, Rational(4, 9) * Rational(1, 9))));
    CHECK(t0.pair.value(Rational(5)).equals(Scalar::from_int(ctx, 5)));
    // the Dirac mass at 0 kills every tail piece
    auto tails = lalpha_tail_decay(mod, dirac(ctx, 0, 60), 0, 3);
    CHECK(tails.ok);
    for (const auto& pc : tails.pieces) CHECK(pc.value.is_zero());
}

TEST_CASE("smooth intertwiner closed forms") {
    auto mod = defaults();
    const Rational c0 = Rational(4, 3);  // (1 - 1/p) / (1 - alpha/beta)
    SmoothCompactFunction unit_ball{{{0, 0, 1}}, {}};
    CHECK(intertwine_at(mod, unit_ball, 0, 0) == c0);
    CHECK(intertwine_at(mod, unit_ball, 0, 2) == c0);
    CHECK(intertwine_at(mod, unit_ball, 0, Rational(1, 3)) == Rational(2, 3));
    CHECK(intertwine_at(mod, unit_ball, 1, Rational(1, 3)) == Rational(2, 9));
    auto img = smooth_intertwiner(mod, unit_ball, 0, 0, 1);
    CHECK(img.outer_mass == 1);
    CHECK_FALSE(img.compact_support);
    SmoothCompactFunction balanced{{{0, 0, 1}, {0, 1, -3}}, {}};
    CHECK(balanced.total_mass(3) == 0);
    CHECK(smooth_intertwiner(mod, balanced, 0, 0, 1).compact_support);
    // the ratio beta/alpha = 2 summed over all shells below a bound is a formal sum, defined
    SmoothCompactFunction below{{}, {{1, 0, true}}};
    CHECK_NOTHROW(intertwine_at(mod, below, 0, 1));
}

TEST_CASE("smooth intertwiner against a Riemann sum") {
    auto mod = defaults();
    const double rho = 1.5;
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        SmoothCompactFunction h;
        int npieces = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < npieces; ++i) {
            int level = static_cast<int>(rng() % 3);
            Rational center = Rational(static_cast<long long>(rng() % 27)) * rat_pow(Rational(3), -1);
            Rational value(static_cast<long long>(rng() % 11) - 5);
            // keep the pieces disjoint
            bool clash = false;
            for (const auto& q : h.pieces) clash = clash || cosets_meet(center, level, q.center, q.level, 3);
            if (!clash) h.pieces.push_back({center, level, value});
        }
        for (int s = 0; s < 4; ++s) {
            Rational z = Rational(static_cast<long long>(rng() % 200) - 100, 9);
            double expect = 0.0;
            for (const auto& pc : h.pieces)
                expect += as_double(pc.value) * coset_oracle(z, pc.center, pc.level, 60, rho, 3);
            for (int j = 0; j <= 1; ++j) {
                double got = as_double(intertwine_at(mod, h, j, z));
                CHECK(got == doctest::Approx(expect * std::pow(as_double(z), j)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("intertwiner identities pick out one reading") {
    auto mod = defaults();
    for (int j = 0; j <= 1; ++j) {
        auto rep = intertwiner_identity_check(mod, j, 42, 100);
        CHECK(rep.pass);
        CHECK(rep.reading == "one-minus-indicator");
        CHECK(rep.closed_a.agree == 100);
        CHECK(rep.open_a.agree == 100);
        CHECK(rep.closed_b.disagree > 0);
    }
}

TEST_CASE("intertwiner commutes with the Borel") {
    auto mod = defaults();
    SmoothCompactFunction h{{{0, 0, 2}, {1, 1, -1}, {Rational(1, 3), 2, 5}}, {}};
    for (GL2Element g : {GL2Element::diag(3), GL2Element::diag(2), GL2Element::unipotent(Rational(1, 3)),
                         GL2Element{3, 1, 0, 1}}) {
        SmoothCompactFunction gh = smooth_act(mod, g, h);
        for (Rational z : {Rational(0), Rational(1, 3), Rational(4), Rational(-7, 9), Rational(2, 27)}) {
            Rational lhs = intertwine_at(mod, gh, 0, z);
            Rational rhs = smooth_act_point(mod, g, [&](const Rational& x) { return intertwine_at(mod, h, 0, x); }, z);
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("dual conditions on chart functionals") {
    auto mod = defaults();
    auto ctx = PadicContext::rationals(3, 8);
    auto zero = AmiceDistribution{PowerSeries::zero(ctx, 60), 1.0};
    DualOptions opt;
    opt.window = 1;
    opt.n_max = 1;
    auto z = dual_conditions_check(mod, chart_pair_functional(mod, zero, zero), opt);
    CHECK(z.verdict == Verdict::pass);
    CHECK(z.annihilation == Verdict::pass);
    CHECK(z.checked > 0);
    // a Dirac mass at 0 of chart 1 does not kill z^0 near 0
    auto d0 = dirac(ctx, 0, 60);
    auto rep = dual_conditions_check(mod, chart_pair_functional(mod, d0, zero), opt);
    CHECK(rep.annihilation == Verdict::fail);
    CHECK(rep.verdict == Verdict::fail);
    // near and far functions split the constant function
    auto nf = near_function(mod, 0, 0, 0);
    auto ff = far_function(mod, Rational(1, 3), 1, 0);
    CHECK(nf.pieces.size() == 1);
    CHECK(ff.far_level >= 1);
}
