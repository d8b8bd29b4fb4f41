#include "padic/crystalline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <tuple>

namespace padic {

namespace {

using Poly = std::vector<Rational>;
using i64 = std::int64_t;

double to_double(const Rational& r) {
    return static_cast<double>(numerator(r).convert_to<long double>() / denominator(r).convert_to<long double>());
}

int to_units(double v, int e) {
    if (v >= 1e15) return Scalar::kInfinite / 2;
    return static_cast<int>(std::floor(v * e + 1e-9));
}

Scalar exact_zero(const Ctx& ctx) { return Scalar::zero(ctx, Scalar::kInfinite / 2); }

Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, Rational(0));
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    return r;
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), Rational(0));
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

Poly poly_scale(const Poly& a, const Rational& c) {
    Poly r = a;
    for (auto& x : r) x *= c;
    return r;
}

// g(f(X)) by Horner
Poly poly_compose(const Poly& g, const Poly& f) {
    Poly acc;
    for (size_t i = g.size(); i-- > 0;) {
        acc = poly_mul(acc, f);
        if (acc.empty()) acc.push_back(0);
        acc[0] += g[i];
    }
    return acc;
}

// remainder modulo a monic polynomial
Poly poly_rem(Poly a, const Poly& m) {
    const size_t n = m.size() - 1;
    for (size_t d = a.size(); d-- > n;) {
        Rational c = a[d];
        if (c == 0) continue;
        for (size_t i = 0; i <= n; ++i) a[d - n + i] -= c * m[i];
    }
    a.resize(std::min(a.size(), n), Rational(0));
    a.resize(n, Rational(0));
    return a;
}

// Solves A x = b over Q; empty result when singular.
std::vector<Rational> solve_linear(std::vector<std::vector<Rational>> A, std::vector<Rational> b) {
    const size_t n = b.size();
    for (size_t c = 0; c < n; ++c) {
        size_t piv = c;
        while (piv < n && A[piv][c] == 0) ++piv;
        if (piv == n) return {};
        std::swap(A[piv], A[c]);
        std::swap(b[piv], b[c]);
        for (size_t r = 0; r < n; ++r) {
            if (r == c || A[r][c] == 0) continue;
            Rational f = A[r][c] / A[c][c];
            for (size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<Rational> x(n);
    for (size_t i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
    return x;
}

i64 mulmod(i64 a, i64 b, i64 m) { return static_cast<i64>((static_cast<__int128>(a) * b) % m); }

i64 reduce_rational(const Rational& r, i64 m) {
    BigInt mm = m;
    BigInt n = numerator(r) % mm;
    if (n < 0) n += mm;
    BigInt d = denominator(r) % mm;
    // d is prime to p, so invertible modulo m
    i64 di = static_cast<i64>(d), inv = 1;
    {
        i64 g0 = m, g1 = di, x0 = 0, x1 = 1;
        while (g1 != 0) {
            i64 q = g0 / g1;
            std::tie(g0, g1) = std::make_pair(g1, g0 - q * g1);
            std::tie(x0, x1) = std::make_pair(x1, x0 - q * x1);
        }
        if (g0 != 1) throw std::domain_error("denominator divisible by p in a lattice matrix");
        inv = ((x0 % m) + m) % m;
    }
    return mulmod(static_cast<i64>(n), inv, m);
}

Scalar level_scalar(const Ctx& L, const Rational& r) { return wide_rational(L, r); }

// Taylor coefficients S_j = sum_{i >= j} a_i binom(i, j) z^{i-j}, j <= J.
std::vector<Scalar> taylor_at(const std::vector<Scalar>& a, const Scalar& z, int J) {
    std::vector<Scalar> b = a;
    std::vector<Scalar> out;
    for (int j = 0; j <= J; ++j) {
        if (b.empty()) {
            out.push_back(exact_zero(z.context()));
            continue;
        }
        // synthetic division by X - z
        std::vector<Scalar> q(b.size() > 1 ? b.size() - 1 : 0, exact_zero(z.context()));
        Scalar acc = b.back();
        for (size_t i = b.size() - 1; i-- > 0;) {
            q[i] = acc;
            acc = b[i] + acc * z;
        }
        out.push_back(acc);
        b = std::move(q);
    }
    return out;
}

Verdict combine(Verdict a, Verdict b) {
    if (a == Verdict::fail || b == Verdict::fail) return Verdict::fail;
    if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
    return Verdict::pass;
}

}  // namespace

// ---------------------------------------------------------------- module

double FilteredPhiModule::r_alpha() const { return to_double(val_alpha()); }
double FilteredPhiModule::r_beta() const { return to_double(val_beta()); }

FilteredPhiModule make_module(std::int64_t p, int k, const Rational& alpha, const Rational& beta) {
    if (k < 2) throw ModuleError("not-irreducible", "k must be at least 2 (weights 0 and k-1 distinct)");
    if (alpha == 0 || beta == 0) throw ModuleError("not-admissible", "alpha and beta must be nonzero");
    FilteredPhiModule m{p, k, alpha, beta};
    Rational va = m.val_alpha(), vb = m.val_beta();
    if (va + vb != k - 1)
        throw ModuleError("not-admissible", "t_N(det) = val(alpha) + val(beta) = " + to_string(va + vb) +
                                                " differs from t_H(det) = k - 1 = " + std::to_string(k - 1));
    if (va < 0 || vb < 0)
        throw ModuleError("not-admissible", "a phi-stable line has t_N < t_H (negative valuation)");
    if (va == 0 || vb == 0)
        throw ModuleError("not-irreducible", "val(beta) = 0 or val(alpha) = 0: the reducible case");
    if (alpha == beta) throw ModuleError("not-irreducible", "alpha = beta: phi is not semisimple with two lines");
    if (vb > va)
        throw ModuleError("ordering", "the convention 0 < val(beta) <= val(alpha) < k - 1 requires swapping alpha and beta");
    return m;
}

AdmissibilityReport admissibility(const FilteredPhiModule& mod) {
    AdmissibilityReport r;
    r.tN_det = mod.val_alpha() + mod.val_beta();
    r.tH_det = mod.k - 1;
    // Fil^{k-1} is the line e_alpha + e_beta, so neither eigenline meets it
    r.gap_alpha = mod.val_alpha();
    r.gap_beta = mod.val_beta();
    r.admissible = r.tN_det == r.tH_det && r.gap_alpha >= 0 && r.gap_beta >= 0;
    return r;
}

// ---------------------------------------------------------------- coordinates

WachVector coord_phi(const FilteredPhiModule& mod, const WachVector& v) {
    const Ctx& ctx = v.context();
    return {phi(v.alpha).scaled(wide_rational(ctx, 1 / mod.alpha)),
            phi(v.beta).scaled(wide_rational(ctx, 1 / mod.beta))};
}

WachVector coord_psi(const FilteredPhiModule& mod, const WachVector& v) {
    const Ctx& ctx = v.context();
    return {psi(v.alpha).scaled(wide_rational(ctx, mod.alpha)), psi(v.beta).scaled(wide_rational(ctx, mod.beta))};
}

WachVector coord_gamma(const Rational& a, const WachVector& v) {
    return {gamma_act(a, v.alpha), gamma_act(a, v.beta)};
}

// ---------------------------------------------------------------- Fil^0

Fil0Report fil0_test(const FilteredPhiModule& mod, const WachVector& v, int m, const Fil0Options& opt) {
    if (m < 1) throw std::invalid_argument("fil0_test: level m must be >= 1");
    const Ctx& base = v.context();
    if (base->degree() != 1) throw ContextMismatch("fil0_test expects coordinates over Q_p");
    const i64 p = mod.p;
    const int J = mod.k - 2;
    Ctx L = PadicContext::cyclotomic(p, base->precision(), m);
    const int e = L->degree();
    const double slope = 1.0 / e;
    const Scalar am = level_scalar(L, rat_pow(mod.alpha, m));
    const Scalar bm = level_scalar(L, rat_pow(mod.beta, m));
    const double cap_a = tail_floor(v.alpha, slope) + m * mod.r_alpha();
    const double cap_b = tail_floor(v.beta, slope) + m * mod.r_beta();
    std::vector<Scalar> ca, cb;
    for (const auto& c : v.alpha.coeffs()) ca.push_back(embed(c, L));
    for (const auto& c : v.beta.coeffs()) cb.push_back(embed(c, L));

    Fil0Report rep;
    rep.m = m;
    rep.min_digits = 1e18;
    bool failed = false;
    double weakest = 1e18;
    const Scalar zeta = primitive_root(L);
    const i64 order = static_cast<i64>(int_pow(BigInt(p), static_cast<unsigned>(m)));
    for (i64 c = 1; c < order; ++c) {
        if (c % p == 0) continue;
        Scalar z = zeta.pow(c) - Scalar::one(L);
        auto sa = taylor_at(ca, z, J);
        auto sb = taylor_at(cb, z, J);
        for (int j = 0; j <= J; ++j) {
            double cap = std::min(cap_a, cap_b) - j * slope;
            Scalar d = (am * sa[j] - bm * sb[j]).truncated(to_units(cap, e));
            double digits = static_cast<double>(d.precision_units()) / e;
            if (!d.is_zero() && !failed) {
                failed = true;
                rep.witness = "m=" + std::to_string(m) + " zeta^" + std::to_string(c) + " j=" + std::to_string(j) +
                              " delta=" + d.str();
            }
            if (d.is_zero() && digits < weakest && !failed) {
                weakest = digits;
                rep.witness = "m=" + std::to_string(m) + " zeta^" + std::to_string(c) + " j=" + std::to_string(j) +
                              " zero to " + std::to_string(digits) + " digits";
            }
            rep.min_digits = std::min(rep.min_digits, digits);
            rep.residues.push_back({m, c, j, d});
        }
    }
    rep.verdict = failed ? Verdict::fail : (rep.min_digits < opt.min_digits ? Verdict::inconclusive : Verdict::pass);

    // the same condition read off phi^{-m}(w) in L_m[[t]], variable s = t / p^m
    TSeries ta = phi_inverse_m(v.alpha, m, J);
    TSeries tb = phi_inverse_m(v.beta, m, J);
    const Ctx& L2 = ta.ctx;
    const Scalar am2 = level_scalar(L2, rat_pow(mod.alpha, m));
    const Scalar bm2 = level_scalar(L2, rat_pow(mod.beta, m));
    bool dfail = false;
    double dmin = 1e18;
    for (size_t row = 0; row < ta.rows.size(); ++row) {
        for (int j = 0; j <= J; ++j) {
            Scalar d = (am2 * ta.rows[row][j] - bm2 * tb.rows[row][j]).mul_p_power(m * j);
            if (!d.is_zero()) dfail = true;
            dmin = std::min(dmin, static_cast<double>(d.precision_units()) / e);
        }
    }
    rep.decomposition_verdict = dfail ? Verdict::fail : (dmin < opt.min_digits ? Verdict::inconclusive : Verdict::pass);
    return rep;
}

MembershipReport wach_membership(const FilteredPhiModule& mod, const WachVector& v, int depth,
                                 const Fil0Options& opt) {
    MembershipReport rep;
    rep.order_alpha = order_r_estimate(v.alpha, mod.r_alpha(), opt.order);
    rep.order_beta = order_r_estimate(v.beta, mod.r_beta(), opt.order);
    Verdict v0 = (rep.order_alpha.verdict == GrowthVerdict::growing || rep.order_beta.verdict == GrowthVerdict::growing)
                     ? Verdict::fail
                     : Verdict::pass;
    Verdict acc = v0;
    for (int m = 1; m <= depth; ++m) {
        rep.levels.push_back(fil0_test(mod, v, m, opt));
        acc = combine(acc, rep.levels.back().verdict);
        if (m > 1 && rep.levels[m - 1].verdict != rep.levels[m - 2].verdict) rep.depth_changed = true;
    }
    rep.verdict = acc;
    return rep;
}

// ---------------------------------------------------------------- Wach basis

WachVector WachBasis::apply(const PowerSeries& f0, const PowerSeries& f1) const {
    return {matrix[0][0] * f0 + matrix[0][1] * f1, matrix[1][0] * f0 + matrix[1][1] * f1};
}

namespace {

struct QSolve {
    Rational ratio;
    Poly a;
};

// Coefficients M_0..M_{n-1} of M = Lambda phi(M) Q, given Q mod X^n.
std::vector<std::array<std::array<Rational, 2>, 2>> rational_jets(const FilteredPhiModule& mod, const Rational& ratio,
                                                                   const std::array<std::array<Poly, 2>, 2>& Q,
                                                                   int n) {
    const i64 p = mod.p;
    const Rational ph = rat_pow(Rational(p), mod.h());
    const std::array<Rational, 2> lam{1 / mod.alpha, 1 / mod.beta};
    auto qc = [&](int r, int c, int d) { return d < static_cast<int>(Q[r][c].size()) ? Q[r][c][d] : Rational(0); };
    std::vector<std::array<std::array<Rational, 2>, 2>> M(n);
    M[0] = {{{ratio * ph / mod.alpha, ratio}, {ph / mod.beta, Rational(1)}}};
    Poly phix(p + 1);
    for (int i = 0; i <= p; ++i) phix[i] = Rational(binomial_coefficient(static_cast<int>(p), i));
    phix[0] = 0;
    std::vector<Poly> phipow(n);
    phipow[0] = {Rational(1)};
    for (int i = 1; i < n; ++i) {
        phipow[i] = poly_mul(phipow[i - 1], phix);
        phipow[i].resize(std::min<size_t>(phipow[i].size(), n), 0);
    }
    auto pp = [&](int i, int e) { return e < static_cast<int>(phipow[i].size()) ? phipow[i][e] : Rational(0); };
    for (int d = 1; d < n; ++d) {
        std::array<std::array<Rational, 2>, 2> R{};
        for (int e = 0; e <= d; ++e) {
            // [X^e] phi(M) without the M_d term
            std::array<std::array<Rational, 2>, 2> Phi{};
            for (int i = 0; i <= std::min(e, d - 1); ++i) {
                Rational c = pp(i, e);
                if (c == 0) continue;
                for (int r = 0; r < 2; ++r)
                    for (int s = 0; s < 2; ++s) Phi[r][s] += M[i][r][s] * c;
            }
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s)
                    for (int t = 0; t < 2; ++t) R[r][s] += Phi[r][t] * qc(t, s, d - e);
        }
        const Rational pd = rat_pow(Rational(p), d);
        for (int r = 0; r < 2; ++r) {
            Rational c = pd * lam[r];
            Rational q01 = qc(0, 1, 0), q10 = qc(1, 0, 0), q11 = qc(1, 1, 0);
            // (I - c Q0)^{-1}
            Rational det = (1 - c * q11) - c * c * q01 * q10;
            if (det == 0) throw std::domain_error("resonant parameters: 1 = p^d alpha_i / alpha_j");
            Rational r0 = lam[r] * R[r][0], r1 = lam[r] * R[r][1];
            M[d][r][0] = (r0 * (1 - c * q11) + r1 * c * q10) / det;
            M[d][r][1] = (r0 * c * q01 + r1) / det;
        }
    }
    return M;
}

std::array<std::array<Poly, 2>, 2> q_matrix(const FilteredPhiModule& mod, const Poly& a, const Poly& qh,
                                            const Rational& u) {
    return {{{Poly{Rational(0)}, Poly{-u}}, {qh, a}}};
}

QSolve solve_q(const FilteredPhiModule& mod, const Poly& qh, const Rational& u) {
    const i64 p = mod.p;
    const int h = mod.h();
    const int n = static_cast<int>(p - 1) * h;
    Poly phix(p + 1);
    for (int i = 1; i <= p; ++i) phix[i] = Rational(binomial_coefficient(static_cast<int>(p), i));
    Poly a_low(h, Rational(0));
    a_low[0] = mod.alpha + mod.beta;
    std::vector<Rational> candidates;
    for (int height = 1; height <= 40; ++height) {
        for (int num = -height; num <= height; ++num) {
            for (int den = 1; den <= height; ++den) {
                if (std::max(std::abs(num), den) != height || num == 0) continue;
                if (std::gcd(std::abs(num), den) != 1) continue;
                candidates.push_back(Rational(num, den));
            }
        }
    }
    for (const auto& ratio : candidates) {
        auto Q = q_matrix(mod, a_low, qh, u);
        std::vector<std::array<std::array<Rational, 2>, 2>> jets;
        try {
            jets = rational_jets(mod, ratio, Q, h);
        } catch (const std::domain_error&) {
            continue;
        }
        Poly D1(h), D2(h);
        for (int d = 0; d < h; ++d) {
            D1[d] = jets[d][0][0] - jets[d][1][0];
            D2[d] = jets[d][0][1] - jets[d][1][1];
        }
        Poly P1 = poly_compose(D1, phix), P2 = poly_compose(D2, phix);
        Poly target = poly_rem(poly_add(poly_scale(P1, u), poly_scale(poly_mul(a_low, P2), Rational(-1))), qh);
        std::vector<std::vector<Rational>> A(n, std::vector<Rational>(n));
        for (int i = 0; i < n; ++i) {
            Poly xi(h + i + 1, Rational(0));
            xi[h + i] = 1;
            Poly col = poly_rem(poly_mul(xi, P2), qh);
            for (int r = 0; r < n; ++r) A[r][i] = col[r];
        }
        auto b = solve_linear(A, target);
        if (b.empty()) continue;
        Poly a = a_low;
        a.resize(h + n, Rational(0));
        for (int i = 0; i < n; ++i) a[h + i] = b[i];
        bool integral = true;
        for (const auto& c : a)
            if (c != 0 && p_valuation(c, p) < 0) integral = false;
        if (!integral) continue;
        while (a.size() > 1 && a.back() == 0) a.pop_back();
        return {ratio, a};
    }
    throw std::domain_error("no integral Q found for these parameters");
}

}  // namespace

WachBasis wach_basis(const FilteredPhiModule& mod, const Ctx& ctx, int K) {
    const i64 p = mod.p;
    const int h = mod.h();
    WachBasis out;
    out.mod = mod;
    out.u = mod.alpha * mod.beta / rat_pow(Rational(p), h);
    if (p_valuation(out.u, p) != 0) throw std::domain_error("alpha beta / p^{k-1} is not a unit");
    Poly q(p);
    for (int i = 0; i < p; ++i) q[i] = Rational(binomial_coefficient(static_cast<int>(p), i + 1));
    Poly qh{Rational(1)};
    for (int i = 0; i < h; ++i) qh = poly_mul(qh, q);
    out.q_pow = qh;
    QSolve qs = solve_q(mod, qh, out.u);
    out.ratio = qs.ratio;
    out.a = qs.a;

    // M to order K in ctx
    auto Qr = q_matrix(mod, out.a, qh, out.u);
    std::array<std::array<std::vector<Scalar>, 2>, 2> Qs;
    int qdeg = 0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            for (const auto& x : Qr[r][c]) Qs[r][c].push_back(wide_rational(ctx, x));
            qdeg = std::max(qdeg, static_cast<int>(Qr[r][c].size()));
        }
    auto qs_at = [&](int r, int c, int d) {
        return d < static_cast<int>(Qs[r][c].size()) ? Qs[r][c][d] : exact_zero(ctx);
    };
    // [X^e] phi(X)^i for i <= e <= K
    std::vector<std::vector<Scalar>> phipow(K + 1);
    {
        std::vector<BigInt> cur{1};
        std::vector<BigInt> phix(p + 1, 0);
        for (int i = 1; i <= p; ++i) phix[i] = binomial_coefficient(static_cast<int>(p), i);
        for (int i = 0; i <= K; ++i) {
            phipow[i].assign(K + 1, exact_zero(ctx));
            for (int e = i; e <= K && e < static_cast<int>(cur.size()); ++e)
                if (cur[e] != 0) phipow[i][e] = wide_rational(ctx, Rational(cur[e]));
            std::vector<BigInt> next(std::min<size_t>(cur.size() + p, K + 1), 0);
            for (size_t a = 0; a < cur.size(); ++a) {
                if (cur[a] == 0) continue;
                for (int b = 1; b <= p && a + b < next.size(); ++b) next[a + b] += cur[a] * phix[b];
            }
            cur = std::move(next);
        }
    }
    using Mat = std::array<std::array<Scalar, 2>, 2>;
    auto zero_mat = [&]() {
        Mat z;
        for (auto& r : z)
            for (auto& c : r) c = exact_zero(ctx);
        return z;
    };
    std::vector<Mat> M(K + 1, zero_mat());
    std::vector<Mat> Phi(K + 1, zero_mat());
    const Rational ph = rat_pow(Rational(p), h);
    std::array<std::array<Rational, 2>, 2> M0r{{{out.ratio * ph / mod.alpha, out.ratio}, {ph / mod.beta, Rational(1)}}};
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) M[0][r][c] = wide_rational(ctx, M0r[r][c]);
    auto absorb = [&](int d) {
        for (int e = d; e <= K; ++e) {
            if (phipow[d][e].is_zero()) continue;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) Phi[e][r][c] += M[d][r][c] * phipow[d][e];
        }
    };
    absorb(0);
    const std::array<Rational, 2> lam{1 / mod.alpha, 1 / mod.beta};
    const Rational q01 = Qr[0][1][0], q10 = Qr[1][0][0], q11 = Qr[1][1][0];
    for (int d = 1; d <= K; ++d) {
        Mat R = zero_mat();
        for (int e = std::max(0, d - qdeg); e <= d; ++e) {
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s)
                    for (int t = 0; t < 2; ++t) {
                        Scalar q = qs_at(t, s, d - e);
                        if (q.is_zero()) continue;
                        R[r][s] += Phi[e][r][t] * q;
                    }
        }
        const Rational pd = rat_pow(Rational(p), d);
        for (int r = 0; r < 2; ++r) {
            Rational c = pd * lam[r];
            Rational det = (1 - c * q11) - c * c * q01 * q10;
            if (det == 0) throw std::domain_error("resonant parameters: 1 = p^d alpha_i / alpha_j");
            Scalar r0 = R[r][0] * wide_rational(ctx, lam[r]);
            Scalar r1 = R[r][1] * wide_rational(ctx, lam[r]);
            M[d][r][0] = r0 * wide_rational(ctx, (1 - c * q11) / det) + r1 * wide_rational(ctx, c * q10 / det);
            M[d][r][1] = r0 * wide_rational(ctx, c * q01 / det) + r1 * wide_rational(ctx, 1 / det);
        }
        absorb(d);
    }
    const int N = ctx->precision();
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            std::vector<Scalar> coeffs;
            for (int d = 0; d <= K; ++d) coeffs.push_back(M[d][r][c].truncated(N));
            double order = r == 0 ? mod.r_alpha() : mod.r_beta();
            out.matrix[r][c] = PowerSeries(ctx, std::move(coeffs), TailModel::of_order(order));
        }
    return out;
}

// ---------------------------------------------------------------- finite lattices

LatticeApprox::LatticeApprox(std::int64_t p, int j, int K) : p_(p), j_(j), K_(K) {
    if (j < 1 || K < 1) throw std::invalid_argument("lattice levels must be positive");
    mod_ = 1;
    for (int i = 0; i < j; ++i) mod_ *= p;
    pivot_.assign(2 * K, -1);
}

int LatticeApprox::val(std::int64_t x) const {
    if (x == 0) return j_;
    int v = 0;
    while (x % p_ == 0) {
        x /= p_;
        ++v;
    }
    return v;
}

void LatticeApprox::insert(std::vector<std::int64_t> v) {
    const int n = dimension();
    for (auto& x : v) x = ((x % mod_) + mod_) % mod_;
    std::deque<std::vector<i64>> work{std::move(v)};
    while (!work.empty()) {
        auto x = std::move(work.front());
        work.pop_front();
        for (int c = 0; c < n; ++c) {
            if (x[c] == 0) continue;
            int vx = val(x[c]);
            int idx = pivot_[c];
            if (idx >= 0) {
                auto& row = rows_[idx];
                int a = val(row[c]);
                if (vx >= a) {
                    i64 pa = 1;
                    for (int i = 0; i < a; ++i) pa *= p_;
                    i64 f = x[c] / pa;
                    for (int i = c; i < n; ++i) x[i] = ((x[i] - mulmod(f, row[i], mod_)) % mod_ + mod_) % mod_;
                    continue;
                }
            }
            // x becomes the pivot row at c
            i64 pv = 1;
            for (int i = 0; i < vx; ++i) pv *= p_;
            i64 unit = x[c] / pv;
            i64 inv = 1;
            {
                i64 g0 = mod_, g1 = unit % mod_, x0 = 0, x1 = 1;
                while (g1 != 0) {
                    i64 q = g0 / g1;
                    std::tie(g0, g1) = std::make_pair(g1, g0 - q * g1);
                    std::tie(x0, x1) = std::make_pair(x1, x0 - q * x1);
                }
                inv = ((x0 % mod_) + mod_) % mod_;
            }
            for (int i = c; i < n; ++i) x[i] = mulmod(x[i], inv, mod_);
            std::vector<i64> multiple(n, 0);
            i64 scale = mod_ / pv;
            bool nonzero = false;
            for (int i = c; i < n; ++i) {
                multiple[i] = mulmod(x[i], scale, mod_);
                nonzero = nonzero || multiple[i] != 0;
            }
            if (idx >= 0) {
                work.push_back(rows_[idx]);
                rows_[idx] = x;
            } else {
                pivot_[c] = static_cast<int>(rows_.size());
                rows_.push_back(x);
            }
            if (nonzero) work.push_back(std::move(multiple));
            break;
        }
    }
}

void LatticeApprox::insert_module(const std::vector<std::int64_t>& v) {
    std::vector<i64> cur = v;
    for (int s = 0; s < K_; ++s) {
        insert(cur);
        std::vector<i64> next(2 * K_, 0);
        bool nonzero = false;
        for (int comp = 0; comp < 2; ++comp)
            for (int d = 0; d + 1 < K_; ++d) {
                next[comp * K_ + d + 1] = cur[comp * K_ + d];
                nonzero = nonzero || next[comp * K_ + d + 1] != 0;
            }
        if (!nonzero) break;
        cur = std::move(next);
    }
}

bool LatticeApprox::contains(std::vector<std::int64_t> x) const {
    const int n = dimension();
    for (auto& y : x) y = ((y % mod_) + mod_) % mod_;
    for (int c = 0; c < n; ++c) {
        if (x[c] == 0) continue;
        int idx = pivot_[c];
        if (idx < 0) return false;
        const auto& row = rows_[idx];
        int a = val(row[c]);
        if (val(x[c]) < a) return false;
        i64 pa = 1;
        for (int i = 0; i < a; ++i) pa *= p_;
        i64 f = x[c] / pa;
        for (int i = c; i < n; ++i) x[i] = ((x[i] - mulmod(f, row[i], mod_)) % mod_ + mod_) % mod_;
    }
    return true;
}

bool LatticeApprox::contains(const LatticeApprox& other) const {
    for (const auto& r : other.rows_)
        if (!contains(r)) return false;
    return true;
}

bool LatticeApprox::operator==(const LatticeApprox& other) const {
    return log_size() == other.log_size() && contains(other);
}

int LatticeApprox::log_size() const {
    int s = 0;
    for (size_t c = 0; c < pivot_.size(); ++c)
        if (pivot_[c] >= 0) s += j_ - val(rows_[pivot_[c]][c]);
    return s;
}

std::vector<int> LatticeApprox::graded_ranks() const {
    std::vector<int> out(K_, 0);
    for (size_t c = 0; c < pivot_.size(); ++c)
        if (pivot_[c] >= 0) out[c % K_] += 1;
    return out;
}

namespace {

std::vector<i64> int_psi(const std::vector<i64>& f, i64 p, i64 m) {
    const int n = static_cast<int>(f.size());
    if (n == 0) return {};
    std::vector<std::vector<i64>> C(n, std::vector<i64>(n, 0));
    for (int i = 0; i < n; ++i) {
        C[i][0] = 1 % m;
        for (int l = 1; l <= i; ++l) C[i][l] = (C[i - 1][l - 1] + (l < i ? C[i - 1][l] : 0)) % m;
    }
    const int top = (n - 1) / static_cast<int>(p);
    std::vector<i64> b(top + 1, 0);
    for (int t = 0; t <= top; ++t) {
        int l = static_cast<int>(p) * t;
        i64 s = 0;
        for (int i = l; i < n; ++i) {
            i64 c = mulmod(f[i], C[i][l], m);
            s = ((i - l) % 2) ? (s - c + m) % m : (s + c) % m;
        }
        b[t] = s;
    }
    std::vector<i64> out(top + 1, 0);
    for (int c = 0; c <= top; ++c) {
        i64 s = 0;
        for (int t = c; t <= top; ++t) s = (s + mulmod(b[t], C[t][c], m)) % m;
        out[c] = s;
    }
    return out;
}

std::vector<i64> int_mul(const std::vector<i64>& a, const std::vector<i64>& b, i64 m) {
    if (a.empty() || b.empty()) return {};
    std::vector<i64> r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + mulmod(a[i], b[j], m)) % m;
    }
    return r;
}

std::vector<i64> int_add(const std::vector<i64>& a, const std::vector<i64>& b, i64 m) {
    std::vector<i64> r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] = (r[i] + b[i]) % m;
    return r;
}

std::vector<i64> to_vec(const std::array<std::vector<i64>, 2>& f, int K) {
    std::vector<i64> v(2 * K, 0);
    for (int c = 0; c < 2; ++c)
        for (int d = 0; d < K && d < static_cast<int>(f[c].size()); ++d) v[c * K + d] = f[c][d];
    return v;
}

std::array<std::vector<i64>, 2> from_vec(const std::vector<i64>& v, int K) {
    return {std::vector<i64>(v.begin(), v.begin() + K), std::vector<i64>(v.begin() + K, v.end())};
}

}  // namespace

std::array<std::vector<std::int64_t>, 2> lattice_psi(const WachBasis& basis, std::int64_t m,
                                                      const std::array<std::vector<std::int64_t>, 2>& f) {
    std::vector<i64> q00{0}, q01{reduce_rational(-basis.u, m)}, q10, q11;
    for (const auto& c : basis.q_pow) q10.push_back(reduce_rational(c, m));
    for (const auto& c : basis.a) q11.push_back(reduce_rational(c, m));
    auto g0 = int_add(int_mul(q00, f[0], m), int_mul(q01, f[1], m), m);
    auto g1 = int_add(int_mul(q10, f[0], m), int_mul(q11, f[1], m), m);
    const i64 p = basis.mod.p;
    return {int_psi(g0, p, m), int_psi(g1, p, m)};
}

LatticeSolution solve_wach_lattice(const FilteredPhiModule& mod, const Ctx& ctx, int j, int K, int depth,
                                   int series_K) {
    LatticeSolution sol;
    sol.basis = wach_basis(mod, ctx, series_K);
    sol.lattice = LatticeApprox(mod.p, j, K);
    for (int c = 0; c < 2 * K; ++c) {
        std::vector<i64> e(2 * K, 0);
        e[c] = 1;
        sol.lattice.insert(e);
    }
    const int h = mod.h();
    bool ok = true;
    for (int b = 0; b < 2; ++b) {
        auto col = sol.basis.column(b);
        sol.certificates.push_back(wach_membership(mod, col, depth));
        WachVector shifted{col.alpha.shifted(h).truncated(series_K), col.beta.shifted(h).truncated(series_K)};
        auto rep = wach_membership(mod, shifted, depth);
        ok = ok && rep.verdict != Verdict::fail;
        std::vector<i64> e(2 * K, 0);
        if (h < K) e[b * K + h] = 1;
        ok = ok && sol.lattice.contains(e);
    }
    sol.contains_Xh_basis = ok;
    return sol;
}

DSharpResult dsharp_iterate(const LatticeSolution& sol, int h, int budget) {
    const auto& L = sol.lattice;
    const i64 p = L.prime();
    const i64 m = L.modulus();
    const int K = L.truncation();
    if (K < h * p) throw std::invalid_argument("dsharp_iterate: truncation too short for the X^h N model");
    LatticeApprox XhN(p, L.level(), K);
    std::vector<std::vector<i64>> fixed;
    for (int b = 0; b < 2; ++b) {
        std::array<std::vector<i64>, 2> f{std::vector<i64>(h + 1, 0), std::vector<i64>(h + 1, 0)};
        f[b][h] = 1;
        XhN.insert_module(to_vec(f, K));
        for (int i = 0; i < p; ++i) {
            std::vector<i64> binom(i + 1);
            for (int l = 0; l <= i; ++l) binom[l] = static_cast<i64>(binomial_coefficient(i, l) % BigInt(m));
            std::array<std::vector<i64>, 2> g{int_mul(binom, f[0], m), int_mul(binom, f[1], m)};
            fixed.push_back(to_vec(lattice_psi(sol.basis, m, g), K));
        }
    }
    auto step = [&](const LatticeApprox& S) {
        LatticeApprox T(p, L.level(), K);
        for (const auto& g : fixed) T.insert_module(g);
        for (const auto& row : S.rows()) {
            auto f = from_vec(row, K);
            for (int i = 0; i < p; ++i) {
                std::vector<i64> binom(i + 1);
                for (int l = 0; l <= i; ++l) binom[l] = static_cast<i64>(binomial_coefficient(i, l) % BigInt(m));
                std::array<std::vector<i64>, 2> g{int_mul(binom, f[0], m), int_mul(binom, f[1], m)};
                T.insert_module(to_vec(lattice_psi(sol.basis, m, g), K));
            }
        }
        return T;
    };
    DSharpResult out;
    LatticeApprox S = XhN;
    out.sizes.push_back(S.log_size());
    bool stable = false;
    for (int it = 1; it <= budget; ++it) {
        LatticeApprox T = step(S);
        out.sizes.push_back(T.log_size());
        out.monotone = out.monotone && T.contains(S);
        if (T == S) {
            out.steps = it;
            stable = true;
            break;
        }
        S = std::move(T);
    }
    if (!stable) throw NoStabilization("dsharp_iterate: no stabilization within the budget", out.sizes);
    out.dsharp = S;
    out.contains_XhN = S.contains(XhN);
    out.inside_N = L.contains(S);
    out.psi_surjective = step(S) == S;
    return out;
}

// ---------------------------------------------------------------- psi-fixed points

FixedPoint psi_fixed_point(const FilteredPhiModule& mod, const WachVector& x, int J) {
    const Ctx& ctx = x.context();
    const i64 p = mod.p;
    const int K = std::max(x.alpha.truncation(), x.beta.truncation());
    if (J < 0 || int_pow(BigInt(p), static_cast<unsigned>(J)) <= K)
        throw std::domain_error("budget-too-small: need p^J > K");
    const int h = mod.h();
    WachVector seed{x.alpha.shifted(h + 1).truncated(K), x.beta.shifted(h + 1).truncated(K)};
    PowerSeries onex = PowerSeries::polynomial(ctx, {1, 1});
    FixedPoint out;
    out.y = coord_phi(mod, seed).times(onex).truncated(K);
    WachVector z = out.y;
    WachVector term = out.y;
    for (int j = 1; j <= J; ++j) {
        term = coord_phi(mod, term);
        z = z + term;
    }
    // the omitted terms j > J, coefficient by coefficient
    auto capped = [&](const PowerSeries& w, const PowerSeries& s, double v) {
        std::vector<Scalar> c;
        double vseed = 1e18;
        for (int d = 0; d <= K; ++d) {
            if (d < static_cast<int>(s.coeffs().size())) vseed = std::min(vseed, s[d].val_bound_units() / 1.0);
            Scalar a = w.coeff(d);
            if (d >= h + 1) {
                int fl = floor_log(d, p);
                double worst = 1e18;
                for (int j = J + 1; j <= J + 60; ++j)
                    worst = std::min(worst, -(j + 1) * v + vseed + (h + 1) * std::max(0, j + 1 - fl));
                a = a.truncated(to_units(worst, 1));
            }
            c.push_back(a);
        }
        return PowerSeries(ctx, std::move(c), TailModel::of_order(v));
    };
    out.z = {capped(z.alpha, x.alpha, mod.r_alpha()), capped(z.beta, x.beta, mod.r_beta())};
    out.residual = coord_psi(mod, out.z) - out.z;
    out.digits = 1e18;
    const int top = std::min(out.residual.alpha.truncation(), out.residual.beta.truncation());
    bool zero = true;
    for (int d = 0; d <= top; ++d) {
        const Scalar& ra = out.residual.alpha[d];
        const Scalar& rb = out.residual.beta[d];
        int prec = std::min(ra.precision_units(), rb.precision_units());
        if (prec < 1) break;
        out.window = d;
        out.digits = std::min<double>(out.digits, prec);
        zero = zero && ra.is_zero() && rb.is_zero();
    }
    if (out.window < 0) out.digits = 0;
    out.verified = zero && out.window >= h + 1;
    out.nonzero = !out.z.is_zero();
    return out;
}

// ---------------------------------------------------------------- sequences

PsiSequence fixed_point_sequence(const FilteredPhiModule& mod, const WachVector& z, const Rational& twist, int T) {
    PsiSequence s;
    const Ctx& ctx = z.context();
    const int K = std::max(z.alpha.truncation(), z.beta.truncation());
    for (int n = 0; n <= T; ++n) {
        Rational e = twist * rat_pow(Rational(mod.p), n);
        s.terms.push_back(z.times(PowerSeries::one_plus_x_power(ctx, e, K)).truncated(K));
    }
    s.bound = sequence_bound_check(mod, s).sup;
    return s;
}

BorelElement BorelElement::operator*(const BorelElement& o) const {
    return {o.z + z * o.a * rat_pow(Rational(prime), o.j), a * o.a, j + o.j, prime};
}

PsiSequence borel_act(const FilteredPhiModule& mod, const BorelElement& g, const PsiSequence& s) {
    if (g.prime != mod.p) throw std::invalid_argument("borel_act: element built for another prime");
    if (g.a == 0 || p_valuation(g.a, mod.p) != 0) throw std::invalid_argument("borel_act: a must be a p-adic unit");
    PsiSequence cur = s;
    if (g.z != 0) {
        const int v = -p_valuation(g.z, mod.p);
        const int mu = std::max(0, v - cur.start);
        if (cur.end() - mu < cur.start) throw WindowExhausted("borel_act: unipotent action exhausts the window");
        PsiSequence next;
        next.start = cur.start;
        next.bound = cur.bound;
        next.consumed = cur.consumed + mu;
        const Ctx& ctx = cur.terms.front().context();
        for (int n = cur.start; n <= cur.end() - mu; ++n) {
            const WachVector& src = cur.at(n + mu);
            const int K = std::max(src.alpha.truncation(), src.beta.truncation());
            Rational e = g.z * rat_pow(Rational(mod.p), n + mu);
            WachVector w = src.times(PowerSeries::one_plus_x_power(ctx, e, K)).truncated(K);
            for (int i = 0; i < mu; ++i) w = coord_psi(mod, w);
            next.terms.push_back(std::move(w));
        }
        cur = std::move(next);
    }
    if (g.a != 1) {
        // gamma_{1/a}: the dual of f(z) -> f(az); with gamma_a the three
        // generator formulas do not compose to a group action
        for (auto& t : cur.terms) t = coord_gamma(1 / g.a, t);
    }
    cur.start += g.j;
    return cur;
}

SequenceBound sequence_bound_check(const FilteredPhiModule& mod, const PsiSequence& s) {
    SequenceBound out;
    bool growing = false;
    for (const auto& t : s.terms) {
        auto ea = order_r_estimate(t.alpha, mod.r_alpha());
        auto eb = order_r_estimate(t.beta, mod.r_beta());
        growing = growing || ea.verdict == GrowthVerdict::growing || eb.verdict == GrowthVerdict::growing;
        out.norms.push_back(std::max(ea.sup, eb.sup));
    }
    if (!out.norms.empty()) {
        out.sup = *std::max_element(out.norms.begin(), out.norms.end());
        if (out.norms.size() > 1) out.trend = (out.norms.back() - out.norms.front()) / (out.norms.size() - 1);
        if (out.norms.back() - out.norms.front() > 1.0) growing = true;
    }
    out.verdict = growing ? GrowthVerdict::growing : GrowthVerdict::bounded_so_far;
    return out;
}

bool psi_compatible(const FilteredPhiModule& mod, const PsiSequence& s) {
    for (int n = s.start + 1; n <= s.end(); ++n)
        if (!coord_psi(mod, s.at(n)).equals(s.at(n - 1))) return false;
    return true;
}

bool same_on_overlap(const PsiSequence& a, const PsiSequence& b) {
    int lo = std::max(a.start, b.start), hi = std::min(a.end(), b.end());
    if (lo > hi) return false;
    for (int n = lo; n <= hi; ++n)
        if (!a.at(n).equals(b.at(n))) return false;
    return true;
}

}  // namespace padic
