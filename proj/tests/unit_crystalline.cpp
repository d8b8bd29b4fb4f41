#include "doctest.h"

#include "padic/crystalline.hpp"

#include <random>

using namespace padic;

namespace {

Ctx base() { return PadicContext::rationals(3, 8); }

WachVector constant_vector(const Ctx& ctx, std::int64_t a, std::int64_t b, int K) {
    return {PowerSeries::polynomial(ctx, {a}).truncated(K), PowerSeries::polynomial(ctx, {b}).truncated(K)};
}

PowerSeries random_poly(std::mt19937_64& rng, const Ctx& ctx, int deg) {
    std::vector<std::int64_t> c;
    for (int i = 0; i <= deg; ++i) c.push_back(static_cast<std::int64_t>(rng() % 81) - 40);
    return PowerSeries::polynomial(ctx, c);
}

Rational random_unit(std::mt19937_64& rng) {
    for (;;) {
        long long n = static_cast<long long>(rng() % 40) - 20, d = static_cast<long long>(rng() % 9) + 1;
        if (n % 3 != 0 && d % 3 != 0) return Rational(n, d);
    }
}

std::vector<std::int64_t> reduce_poly(const PowerSeries& f, int K, std::int64_t m) {
    std::vector<std::int64_t> out(K, 0);
    for (int d = 0; d < K && d <= f.truncation(); ++d) {
        Rational r = f[d].representative();
        BigInt num = numerator(r), den = denominator(r);
        REQUIRE(den == 1);
        BigInt v = num % m;
        if (v < 0) v += m;
        out[d] = static_cast<std::int64_t>(v);
    }
    return out;
}

}  // namespace

TEST_CASE("module validation") {
    CHECK_NOTHROW(make_module(3, 3, 3, 6));
    auto kind = [](auto&& fn) {
        try {
            fn();
        } catch (const ModuleError& e) {
            return e.kind();
        }
        return std::string("none");
    };
    CHECK(kind([] { make_module(3, 3, 3, 3 * 9); }) == "not-admissible");
    CHECK(kind([] { make_module(3, 3, Rational(1, 3), 27); }) == "not-admissible");
    CHECK(kind([] { make_module(3, 3, 9, 2); }) == "not-irreducible");
    CHECK(kind([] { make_module(3, 3, 3, 3); }) == "not-irreducible");
    CHECK(kind([] { make_module(3, 4, 3, 18); }) == "ordering");
    CHECK(kind([] { make_module(3, 1, 1, 1); }) == "not-irreducible");
}

TEST_CASE("admissibility bookkeeping on random modules") {
    std::mt19937_64 rng(31);
    int built = 0;
    for (int trial = 0; trial < 60; ++trial) {
        int k = 3 + static_cast<int>(rng() % 3);
        int vb = 1 + static_cast<int>(rng() % (k - 2));
        int va = k - 1 - vb;
        if (va < vb) std::swap(va, vb);
        Rational alpha = rat_pow(Rational(3), va) * random_unit(rng);
        Rational beta = rat_pow(Rational(3), vb) * random_unit(rng);
        if (alpha == beta) continue;
        auto mod = make_module(3, k, alpha, beta);
        auto rep = admissibility(mod);
        CHECK(rep.admissible);
        CHECK(rep.tN_det == k - 1);
        CHECK(rep.tH_det == k - 1);
        CHECK(rep.gap_alpha > 0);
        CHECK(rep.gap_beta > 0);
        ++built;
    }
    CHECK(built > 40);
}

TEST_CASE("coordinate operators") {
    auto ctx = base();
    auto mod = make_module(3, 3, 3, 6);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        WachVector v{random_poly(rng, ctx, 8), random_poly(rng, ctx, 8)};
        CHECK(coord_psi(mod, coord_phi(mod, v)).equals(v));
        Rational a = random_unit(rng), b = random_unit(rng);
        CHECK(coord_gamma(a, coord_gamma(b, v)).equals(coord_gamma(a * b, v)));
    }
}

TEST_CASE("Wach basis satisfies its functional equation") {
    auto ctx = base();
    auto mod = make_module(3, 3, 3, 6);
    const int K = 40;
    auto basis = wach_basis(mod, ctx, K);
    for (const auto& c : basis.a)
        if (c != 0) CHECK(p_valuation(c, 3) >= 0);
    CHECK(p_valuation(basis.u, 3) == 0);
    // M = Lambda phi(M) Q, row by row
    std::vector<Scalar> qh, a;
    for (const auto& c : basis.q_pow) qh.push_back(wide_rational(ctx, c));
    for (const auto& c : basis.a) a.push_back(wide_rational(ctx, c));
    PowerSeries Qqh = PowerSeries::polynomial(qh), Qa = PowerSeries::polynomial(a);
    Scalar minus_u = wide_rational(ctx, -basis.u);
    const Rational lam[2] = {1 / mod.alpha, 1 / mod.beta};
    for (int r = 0; r < 2; ++r) {
        PowerSeries p0 = phi(basis.matrix[r][0]), p1 = phi(basis.matrix[r][1]);
        PowerSeries c0 = (p1 * Qqh).scaled(wide_rational(ctx, lam[r])).truncated(K);
        PowerSeries c1 = (p0.scaled(minus_u) + p1 * Qa).scaled(wide_rational(ctx, lam[r])).truncated(K);
        CHECK(c0.equals(basis.matrix[r][0]));
        CHECK(c1.equals(basis.matrix[r][1]));
    }
    CHECK_THROWS_AS(wach_basis(make_module(3, 3, 27, Rational(1, 3)), ctx, K), std::exception);
}

TEST_CASE("Fil^0 test on known vectors") {
    auto ctx = base();
    auto mod = make_module(3, 3, 3, 6);
    auto basis = wach_basis(mod, ctx, 60);
    for (int b = 0; b < 2; ++b)
        for (int m = 1; m <= 2; ++m) {
            auto rep = fil0_test(mod, basis.column(b), m);
            CHECK(rep.verdict == Verdict::pass);
            CHECK(rep.decomposition_verdict == Verdict::pass);
        }
    // the Hodge line itself: Delta_0 = alpha^m - beta^m
    auto line = fil0_test(mod, constant_vector(ctx, 1, 1, 60), 1);
    CHECK(line.verdict == Verdict::fail);
    CHECK(line.residues.front().delta.valuation() == 1);
    WachVector xh{PowerSeries::polynomial(ctx, {0, 0, 1}).truncated(60), PowerSeries::zero(ctx, 60)};
    CHECK(fil0_test(mod, xh, 1).verdict == Verdict::fail);
    CHECK(fil0_test(mod, xh, 2).verdict == Verdict::fail);
    // R^+-combinations of basis columns stay inside
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 4; ++trial) {
        auto v = basis.apply(random_poly(rng, ctx, 5), random_poly(rng, ctx, 5)).truncated(60);
        auto rep = wach_membership(mod, v, 2);
        CHECK(rep.verdict == Verdict::pass);
        CHECK_FALSE(rep.depth_changed);
    }
}

TEST_CASE("Fil^0 verdicts agree between the two computations") {
    auto ctx = base();
    auto mod = make_module(3, 3, 3, 6);
    auto basis = wach_basis(mod, ctx, 60);
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 12; ++trial) {
        WachVector v = trial % 2 ? basis.apply(random_poly(rng, ctx, 4), random_poly(rng, ctx, 4)).truncated(60)
                                 : WachVector{random_poly(rng, ctx, 6), random_poly(rng, ctx, 6)};
        for (int m = 1; m <= 2; ++m) {
            auto rep = fil0_test(mod, v, m);
            if (rep.verdict != Verdict::inconclusive && rep.decomposition_verdict != Verdict::inconclusive)
                CHECK(rep.verdict == rep.decomposition_verdict);
        }
    }
}

TEST_CASE("finite lattices") {
    LatticeApprox L(3, 2, 4);
    CHECK(L.log_size() == 0);
    std::vector<std::int64_t> e(8, 0);
    e[0] = 3;
    L.insert(e);
    CHECK(L.log_size() == 1);
    e[0] = 1;
    CHECK_FALSE(L.contains(e));
    e[0] = 6;
    CHECK(L.contains(e));
    L.insert_module({1, 0, 0, 0, 2, 0, 0, 0});
    CHECK(L.log_size() == 1 + 4 * 2);
    LatticeApprox full(3, 2, 4);
    for (int c = 0; c < 8; ++c) {
        std::vector<std::int64_t> u(8, 0);
        u[c] = 1;
        full.insert(u);
    }
    CHECK(full.log_size() == 16);
    CHECK(full.contains(L));
    CHECK_FALSE(L.contains(full));
    // insertion order does not matter
    std::mt19937_64 rng(3);
    std::vector<std::vector<std::int64_t>> gens;
    for (int i = 0; i < 5; ++i) {
        std::vector<std::int64_t> g(8);
        for (auto& x : g) x = static_cast<std::int64_t>(rng() % 9);
        gens.push_back(g);
    }
    LatticeApprox A(3, 2, 4), B(3, 2, 4);
    for (const auto& g : gens) A.insert(g);
    for (auto it = gens.rbegin(); it != gens.rend(); ++it) B.insert(*it);
    CHECK(A == B);
}

TEST_CASE("lattice psi agrees with series psi") {
    auto ctx = base();
    auto mod = make_module(3, 3, 3, 6);
    auto basis = wach_basis(mod, ctx, 20);
    const std::int64_t m = 9;
    std::vector<Scalar> qh, a;
    for (const auto& c : basis.q_pow) qh.push_back(wide_rational(ctx, c));
    for (const auto& c : basis.a) a.push_back(wide_rational(ctx, c));
    PowerSeries Qqh = PowerSeries::polynomial(qh), Qa = PowerSeries::polynomial(a);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::int64_t> f0(12), f1(12);
        for (auto& x : f0) x = static_cast<std::int64_t>(rng() % 9);
        for (auto& x : f1) x = static_cast<std::int64_t>(rng() % 9);
        auto out = lattice_psi(basis, m, {f0, f1});
        PowerSeries s0 = PowerSeries::polynomial(ctx, f0), s1 = PowerSeries::polynomial(ctx, f1);
        PowerSeries g0 = psi(s1.scaled(wide_rational(ctx, -basis.u)));
        PowerSeries g1 = psi(Qqh * s0 + Qa * s1);
        // the denominators of a are prime to 3; clear them before reducing
        BigInt den = 1;
        for (const auto& c : basis.a) den = boost::multiprecision::lcm(den, denominator(c));
        den = boost::multiprecision::lcm(den, denominator(basis.u));
        Scalar D = Scalar::from_big(ctx, den);
        auto r0 = reduce_poly(g0.scaled(D), static_cast<int>(out[0].size()), m);
        auto r1 = reduce_poly(g1.scaled(D), static_cast<int>(out[1].size()), m);
        const std::int64_t dm = static_cast<std::int64_t>(den % m);
        for (size_t d = 0; d < out[0].size(); ++d) CHECK((out[0][d] * dm) % m == r0[d]);
        for (size_t d = 0; d < out[1].size(); ++d) CHECK((out[1][d] * dm) % m == r1[d]);
    }
}

TEST_CASE("D-sharp sandwich at (2, 20)") {
    auto ctx = base();
    auto mod = make_module(3, 3, 3, 6);
    auto sol = solve_wach_lattice(mod, ctx, 2, 20, 2);
    CHECK(sol.contains_Xh_basis);
    for (const auto& c : sol.certificates) CHECK(c.verdict == Verdict::pass);
    auto res = dsharp_iterate(sol, mod.h());
    CHECK(res.steps <= 10);
    CHECK(res.monotone);
    CHECK(res.contains_XhN);
    CHECK(res.inside_N);
    CHECK(res.psi_surjective);
    // frozen from the run: X^2 N-hat has index 3^8, and D-sharp misses a single p
    CHECK(res.sizes.front() == 72);
    CHECK(res.sizes.back() == 79);
    CHECK_THROWS_AS(dsharp_iterate(sol, mod.h(), 1), NoStabilization);
}

TEST_CASE("psi-fixed points") {
    auto ctx = PadicContext::rationals(3, 20);
    auto mod = make_module(3, 3, 3, 6);
    auto seed = constant_vector(ctx, 1, 1, 60);
    auto fp = psi_fixed_point(mod, seed, 8);
    CHECK(fp.verified);
    CHECK(fp.nonzero);
    CHECK(fp.window >= 10);
    CHECK(fp.digits >= 1);
    // y alone is killed by psi
    auto py = coord_psi(mod, fp.y);
    for (int d = 0; d <= py.alpha.truncation(); ++d) CHECK(py.alpha[d].is_zero());
    CHECK_THROWS_AS(psi_fixed_point(mod, seed, 3), std::domain_error);
    // truncating the series too early is visible in the residual
    auto wrong = fp;
    wrong.z = fp.y;
    auto residual = coord_psi(mod, wrong.z) - wrong.z;
    CHECK_FALSE(residual.is_zero());
}

TEST_CASE("Borel action on psi-compatible windows") {
    auto ctx = PadicContext::rationals(3, 12);
    auto mod = make_module(3, 3, 3, 6);
    auto fp = psi_fixed_point(mod, constant_vector(ctx, 1, 1, 60), 6);
    auto seq = fixed_point_sequence(mod, fp.z, Rational(1), 4);
    CHECK(psi_compatible(mod, seq));
    CHECK(same_on_overlap(borel_act(mod, BorelElement{}, seq), seq));
    auto back = borel_act(mod, BorelElement::diag_p(-1), borel_act(mod, BorelElement::diag_p(1), seq));
    CHECK(same_on_overlap(back, seq));
    CHECK_THROWS_AS(borel_act(mod, BorelElement::unipotent(Rational(1, 3 * 3 * 3 * 3 * 3 * 3)), seq), WindowExhausted);
    auto u = borel_act(mod, BorelElement::unipotent(Rational(1, 9)), seq);
    CHECK(u.consumed == 2);
    CHECK(u.terms.size() == seq.terms.size() - 2);
    CHECK(psi_compatible(mod, u));
    // group law on random words
    std::mt19937_64 rng(41);
    auto random_generator = [&]() {
        switch (rng() % 3) {
            case 0: return BorelElement::diag_p(static_cast<int>(rng() % 2));
            case 1: return BorelElement::diag_unit(random_unit(rng));
            default: return BorelElement::unipotent(Rational(static_cast<long long>(rng() % 7) - 3, rng() % 2 ? 3 : 1));
        }
    };
    for (int trial = 0; trial < 6; ++trial) {
        BorelElement g = random_generator(), h = random_generator();
        auto lhs = borel_act(mod, g, borel_act(mod, h, seq));
        auto rhs = borel_act(mod, g * h, seq);
        CHECK(same_on_overlap(lhs, rhs));
    }
}

TEST_CASE("sequence bounds") {
    auto ctx = base();
    auto mod = make_module(3, 3, 3, 6);
    PsiSequence zero;
    for (int n = 0; n < 4; ++n) zero.terms.push_back(constant_vector(ctx, 0, 0, 30));
    auto b = sequence_bound_check(mod, zero);
    CHECK(b.sup == 0.0);
    CHECK(b.verdict == GrowthVerdict::bounded_so_far);
    // w_n = p^{-2n}: norms climb two digits a step
    PsiSequence up;
    for (int n = 0; n < 4; ++n) {
        auto c = Scalar::from_rational(ctx, rat_pow(Rational(3), -2 * n));
        up.terms.push_back({PowerSeries::constant(c, 30), PowerSeries::constant(c, 30)});
    }
    CHECK(sequence_bound_check(mod, up).verdict == GrowthVerdict::growing);
}
