#include "padic/correspondence.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

namespace padic {

namespace {

constexpr int kNoVal = INT_MAX / 4;

int vval(const Rational& x, std::int64_t p) { return x == 0 ? kNoVal : p_valuation(x, p); }

Rational ppow(std::int64_t p, int e) { return rat_pow(Rational(p), e); }

std::vector<Rational> poly_shift(const std::vector<Rational>& P, const Rational& s) {
    std::vector<Rational> out(P.size(), Rational(0));
    for (std::size_t i = 0; i < P.size(); ++i) {
        if (P[i] == 0) continue;
        for (std::size_t m = 0; m <= i; ++m)
            out[m] += P[i] * Rational(binomial_coefficient(static_cast<int>(i), static_cast<int>(m))) *
                      rat_pow(s, static_cast<int>(i - m));
    }
    return out;
}

LocPolyFunction single(const Rational& c, int n, std::vector<Rational> coeffs) {
    LocPolyFunction f;
    f.domain = Domain::qp;
    f.pieces.push_back({c, n, std::move(coeffs)});
    return f;
}

std::vector<Rational> monomial(int e) {
    std::vector<Rational> out(e + 1, Rational(0));
    out[e] = 1;
    return out;
}

CompactQpDistribution side_levels(const PsiSequence& s, const Rational& eigen, bool alpha_side) {
    CompactQpDistribution mu;
    mu.eigenvalue = eigen;
    mu.alpha_side = alpha_side;
    mu.first = s.start;
    for (int n = s.start; n <= s.end(); ++n) {
        const PowerSeries& w = alpha_side ? s.at(n).alpha : s.at(n).beta;
        mu.levels.push_back({w.scaled(wide_rational(w.context(), rat_pow(eigen, n))), 0.0});
    }
    return mu;
}

Scalar moment_on(const CompactQpDistribution& mu, const Rational& c, int n, int e, std::int64_t p) {
    return integrate_qp(mu, single(c, n, monomial(e)), p);
}

double digits_of(const Scalar& diff) {
    const double e = diff.context()->degree();
    return (diff.is_zero() ? diff.precision_units() : diff.val_units()) / e;
}

}  // namespace

DistributionPair sequence_to_distributions(const FilteredPhiModule& mod, const PsiSequence& s) {
    if (s.terms.empty()) throw std::invalid_argument("empty sequence");
    DistributionPair out{side_levels(s, mod.alpha, true), side_levels(s, mod.beta, false)};
    for (auto& lv : out.alpha.levels) lv.order = mod.r_alpha();
    for (auto& lv : out.beta.levels) lv.order = mod.r_beta();
    if (!level_coherent(out.alpha) || !level_coherent(out.beta))
        throw CoherenceViolation("coherence-violation: the sequence is not psi-compatible at precision");
    return out;
}

bool level_coherent(const CompactQpDistribution& mu) {
    for (std::size_t i = 1; i < mu.levels.size(); ++i) {
        PowerSeries down = psi(mu.levels[i].transform);
        if (!down.equals(mu.levels[i - 1].transform)) return false;
    }
    return true;
}

VersfinTable extend_versfin(const FilteredPhiModule& mod, const DistributionPair& mu, int n_max) {
    const std::int64_t p = mod.p;
    if (mod.alpha == mod.beta || mod.beta == Rational(p) * mod.alpha)
        throw std::domain_error("inconsistent-input: the extension constant is undefined");
    VersfinTable t;
    t.kappa = (1 - mod.alpha / mod.beta) / (1 - mod.beta / (Rational(p) * mod.alpha));
    t.c0 = (1 - Rational(1, p)) / (1 - mod.alpha / mod.beta);
    t.n_max = n_max;
    const Ctx& ctx = mu.alpha.levels.front().transform.context();
    const Rational rho = chart_twist(mod);
    const Rational sigma = Rational(p) * mod.beta / mod.alpha;
    const Scalar kappa = wide_rational(ctx, t.kappa);
    const Scalar c0 = wide_rational(ctx, t.c0);
    std::vector<Scalar> ea, eb;
    for (int e = 0; e <= mod.k - 2; ++e) {
        Scalar a_zp = moment_on(mu.alpha, 0, 0, e, p);
        Scalar a_pzp = moment_on(mu.alpha, 0, 1, e, p);
        Scalar b_zp = moment_on(mu.beta, 0, 0, e, p);
        Scalar b_pzp = moment_on(mu.beta, 0, 1, e, p);
        // int_{Z_p} z^e dmu_beta = kappa (c0 int_{Z_p} z^e dmu_alpha + far_alpha)
        Scalar far_a = b_zp / kappa - c0 * a_zp;
        // int_{val z <= 0} sigma^{val z} z^e dmu_beta = kappa (int_{pZ_p} + c0 (int_{Z_p^x} + far_alpha)) against mu_alpha
        Scalar far_b0 = kappa * (a_pzp + c0 * ((a_zp - a_pzp) + far_a));
        ea.push_back(far_a);
        eb.push_back(far_b0 - (b_zp - b_pzp));
    }
    // deeper truncations: remove the shells -L < val z <= -1
    t.alpha_far.assign(n_max + 1, {});
    t.beta_far.assign(n_max + 1, {});
    for (int L = 0; L <= n_max; ++L) {
        for (int e = 0; e <= mod.k - 2; ++e) {
            Scalar fa = ea[e], fb = eb[e];
            if (L == 0) {
                fa += moment_on(mu.alpha, 0, 0, e, p) - moment_on(mu.alpha, 0, 1, e, p);
                fb += moment_on(mu.beta, 0, 0, e, p) - moment_on(mu.beta, 0, 1, e, p);
            }
            for (int m = -L + 1; m <= -1; ++m) {
                Scalar sa = moment_on(mu.alpha, 0, m, e, p) - moment_on(mu.alpha, 0, m + 1, e, p);
                Scalar sb = moment_on(mu.beta, 0, m, e, p) - moment_on(mu.beta, 0, m + 1, e, p);
                fa -= wide_rational(ctx, rat_pow(rho, m)) * sa;
                fb -= wide_rational(ctx, rat_pow(sigma, m)) * sb;
            }
            t.alpha_far[L].push_back(fa);
            t.beta_far[L].push_back(fb);
        }
    }
    return t;
}

QpFunctional qp_functional(const FilteredPhiModule& mod, const DistributionPair& mu, const VersfinTable& table,
                           bool alpha_side) {
    const CompactQpDistribution& dist = alpha_side ? mu.alpha : mu.beta;
    const auto& far = alpha_side ? table.alpha_far : table.beta_far;
    const std::int64_t p = mod.p;
    const int k = mod.k;
    return [dist, far, p, k](const QpTestFunction& f) {
        const Ctx& ctx = dist.levels.front().transform.context();
        Scalar total = Scalar::zero(ctx, Scalar::kInfinite / 2);
        if (!f.pieces.empty()) {
            LocPolyFunction compact;
            compact.domain = Domain::qp;
            compact.pieces = f.pieces;
            total += integrate_qp(dist, compact, p);
        }
        if (f.far_level >= 0) {
            if (f.far_level >= static_cast<int>(far.size()))
                throw SupportExceedsWindow("support-exceeds-window: extension table too short");
            for (std::size_t i = 0; i < f.far_poly.size(); ++i) {
                if (f.far_poly[i] == 0) continue;
                total += wide_rational(ctx, f.far_poly[i]) * far[f.far_level][k - 2 - i];
            }
        }
        return total;
    };
}

ScalingCheck debutinter_check(const FilteredPhiModule& mod, const DistributionPair& mu, const SmoothCompactFunction& h,
                              int j, double min_digits) {
    const std::int64_t p = mod.p;
    if (h.total_mass(p) != 0) throw std::invalid_argument("debutinter_check needs a function of total mass 0");
    int window = 0, fine = 0;
    for (const auto& pc : h.pieces) {
        window = std::min({window, pc.level, vval(pc.center, p) == kNoVal ? pc.level : vval(pc.center, p)});
        fine = std::max(fine, pc.level);
    }
    IntertwinerImage img = smooth_intertwiner(mod, h, 0, window, fine);
    LocPolyFunction left, right;
    left.domain = right.domain = Domain::qp;
    for (const auto& pc : h.pieces) {
        std::vector<Rational> c = poly_shift(monomial(j), pc.center);
        for (auto& x : c) x *= pc.value;
        left.pieces.push_back({pc.center, pc.level, c});
    }
    for (const auto& pc : img.pieces) {
        if (pc.value == 0) continue;
        std::vector<Rational> c = poly_shift(monomial(j), pc.center);
        for (auto& x : c) x *= pc.value;
        right.pieces.push_back({pc.center, pc.level, c});
    }
    ScalingCheck out;
    out.lhs = integrate_qp(mu.beta, left, p);
    const Ctx& ctx = out.lhs.context();
    out.rhs = right.pieces.empty() ? Scalar::zero(ctx, Scalar::kInfinite / 2) : integrate_qp(mu.alpha, right, p);
    Rational kappa = (1 - mod.alpha / mod.beta) / (1 - mod.beta / (Rational(p) * mod.alpha));
    out.rhs = wide_rational(ctx, kappa) * out.rhs;
    Scalar diff = out.lhs - out.rhs;
    out.digits = digits_of(diff);
    out.verdict = !diff.is_zero() ? Verdict::fail : out.digits >= min_digits ? Verdict::pass : Verdict::inconclusive;
    return out;
}

SequenceRecovery distributions_to_sequence(const FilteredPhiModule& mod, const DistributionPair& mu) {
    if (mu.alpha.first != mu.beta.first || mu.alpha.top() != mu.beta.top())
        throw std::invalid_argument("the two sides cover different levels");
    SequenceRecovery out;
    out.sequence.start = mu.alpha.first;
    for (int n = mu.alpha.first; n <= mu.alpha.top(); ++n) {
        const PowerSeries& a = mu.alpha.levels[n - mu.alpha.first].transform;
        const PowerSeries& b = mu.beta.levels[n - mu.beta.first].transform;
        WachVector v{a.scaled(wide_rational(a.context(), rat_pow(mod.alpha, -n))),
                     b.scaled(wide_rational(b.context(), rat_pow(mod.beta, -n)))};
        double na = order_r_estimate(v.alpha, mod.r_alpha()).sup;
        double nb = order_r_estimate(v.beta, mod.r_beta()).sup;
        out.level_norms.push_back(std::max(na, nb));
        out.sequence.terms.push_back(std::move(v));
    }
    out.bound = *std::max_element(out.level_norms.begin(), out.level_norms.end());
    out.sequence.bound = out.bound;
    out.psi_compatible = psi_compatible(mod, out.sequence);
    return out;
}

std::vector<LocPolyFunction> test_functions(std::int64_t p, const TestFamily& fam) {
    std::vector<LocPolyFunction> out;
    for (int n = -fam.window; n <= fam.n_top; ++n) {
        const std::int64_t count = static_cast<std::int64_t>(std::llround(std::pow(double(p), n + fam.window)));
        for (std::int64_t t = 0; t < count; ++t) {
            Rational c = Rational(t) * ppow(p, -fam.window);
            for (int i = 0; i <= fam.degree; ++i) out.push_back(single(c, n, monomial(i)));
        }
    }
    return out;
}

LocPolyFunction borel_pullback(const FilteredPhiModule& mod, const BorelElement& g, const LocPolyFunction& F,
                               bool alpha_side) {
    const std::int64_t p = mod.p;
    // g = [[1, z], [0, a p^j]], g^{-1} = [[1, -z/(a p^j)], [0, 1/(a p^j)]]
    const Rational d = 1 / (g.a * ppow(p, g.j));
    const Rational b = -g.z * d;
    const Rational eigen = alpha_side ? mod.alpha : mod.beta;
    const Rational scale = rat_pow(eigen, -vval(d, p));
    LocPolyFunction out;
    out.domain = Domain::qp;
    for (const auto& pc : F.pieces) {
        // d x - b in c + p^n Z_p  <=>  x in (c + b)/d + p^{n - val d} Z_p; (z - c) = d (x - x0)
        std::vector<Rational> coeffs(pc.coeffs.size());
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            coeffs[i] = scale * pc.coeffs[i] * rat_pow(d, static_cast<int>(i));
        out.pieces.push_back({(pc.center + b) / d, pc.level - vval(d, p), coeffs});
    }
    return out;
}

EquivarianceReport borel_equivariance_check(const FilteredPhiModule& mod, const PsiSequence& s, const BorelElement& g,
                                            const TestFamily& fam) {
    const std::int64_t p = mod.p;
    PsiSequence moved = borel_act(mod, g, s);
    DistributionPair before = sequence_to_distributions(mod, s);
    DistributionPair after = sequence_to_distributions(mod, moved);
    EquivarianceReport rep;
    bool first = true;
    for (const auto& F : test_functions(p, fam)) {
        for (int side = 0; side < 2; ++side) {
            const bool alpha_side = side == 0;
            Scalar lhs, rhs;
            try {
                lhs = integrate_qp(alpha_side ? after.alpha : after.beta, F, p);
                rhs = integrate_qp(alpha_side ? before.alpha : before.beta, borel_pullback(mod, g, F, alpha_side), p);
            } catch (const SupportExceedsWindow&) {
                ++rep.skipped;
                continue;
            }
            ++rep.tests;
            Scalar diff = lhs - rhs;
            double dg = digits_of(diff);
            if (first || dg < rep.digits) rep.digits = dg;
            first = false;
            if (!diff.is_zero() && rep.verdict != Verdict::fail) {
                rep.verdict = Verdict::fail;
                rep.witness = std::string(alpha_side ? "alpha" : "beta") + " side, " + format_locpoly(F, p);
            } else if (diff.is_zero() && dg < 1.0 && rep.verdict == Verdict::pass) {
                rep.verdict = Verdict::inconclusive;
                rep.witness = "low precision: " + format_locpoly(F, p);
            }
        }
    }
    if (rep.tests == 0) throw WindowExhausted("window-exhausted: no test functional fits both windows");
    return rep;
}

}  // namespace padic
