#include "padic/mahler.hpp"

#include <algorithm>
#include <sstream>

namespace padic {

MahlerFunction mahler_coeffs(const std::vector<Scalar>& values, double r) {
    if (values.empty()) throw std::invalid_argument("mahler_coeffs needs at least one value");
    const Ctx& ctx = values.front().context();
    const int K = static_cast<int>(values.size()) - 1;
    auto bt = binomial_table(*ctx, K);
    MahlerFunction f{ctx, {}, r};
    f.coeffs.reserve(K + 1);
    for (int n = 0; n <= K; ++n) {
        Scalar s = Scalar::zero(ctx, Scalar::kInfinite / 2);
        for (int i = 0; i <= n; ++i) {
            std::int64_t b = (*bt)[n][i];
            s += values[i].mul_int((n - i) % 2 ? -b : b);
        }
        f.coeffs.push_back(s);
    }
    return f;
}

Scalar eval_mahler(const MahlerFunction& f, const Rational& z) {
    if (z != 0 && p_valuation(z, f.ctx->prime()) < 0)
        throw std::invalid_argument("Mahler expansions are evaluated on Z_p");
    Scalar s = Scalar::zero(f.ctx, Scalar::kInfinite / 2);
    for (size_t n = 0; n < f.coeffs.size(); ++n)
        s += f.coeffs[n] * padic_binomial(f.ctx, z, static_cast<int>(n));
    return s;
}

NormEstimate cr_norm(const MahlerFunction& f, double r, const OrderThresholds& th) {
    PowerSeries s(f.ctx, f.coeffs, TailModel::integral());
    OrderEstimate oe = order_r_estimate(s, -r, th);
    NormEstimate out;
    out.log_norm = oe.sup;
    out.slope = oe.slope;
    out.verdict = oe.verdict;
    double best = -1e18;
    for (size_t n = 0; n < f.coeffs.size(); ++n) {
        if (f.coeffs[n].is_zero()) continue;
        double v = -static_cast<double>(f.coeffs[n].val_units()) / f.ctx->degree() +
                   r * log_p(static_cast<double>(n) + 1.0, f.ctx->prime());
        if (v > best) {
            best = v;
            out.argmax = static_cast<int>(n);
        }
    }
    return out;
}

AmiceDistribution dirac(const Ctx& ctx, const Rational& c, int K) {
    return {PowerSeries::one_plus_x_power(ctx, c, K), 0.0};
}

AmiceDistribution dirac_derivative(const Ctx& ctx, const Rational& c, int i, int K) {
    PowerSeries lg = log_series(ctx, K);
    PowerSeries w = PowerSeries::one_plus_x_power(ctx, c, K).truncated(K);
    BigInt fact = 1;
    for (int t = 0; t < i; ++t) {
        w = w * lg;
        fact *= (t + 1);
    }
    return {w.scaled(Scalar::from_rational(ctx, Rational(BigInt(1), fact))), static_cast<double>(i)};
}

BigInt nonpositive_representative(const Rational& a, int n, std::int64_t p) {
    if (n < 0) throw std::invalid_argument("negative level");
    BigInt mod = int_pow(BigInt(p), static_cast<unsigned>(n));
    if (a != 0 && p_valuation(a, p) < 0) throw std::invalid_argument("center outside Z_p");
    BigInt num = numerator(a) % mod;
    BigInt den = denominator(a) % mod;
    if (num < 0) num += mod;
    // den is prime to p: invert by extended Euclid
    BigInt r0 = mod, r1 = den, s0 = 0, s1 = 1;
    while (r1 != 0) {
        BigInt q = r0 / r1;
        BigInt t = r0 - q * r1;
        r0 = r1;
        r1 = t;
        t = s0 - q * s1;
        s0 = s1;
        s1 = t;
    }
    BigInt inv = mod == 1 ? BigInt(0) : ((s0 % mod) + mod) % mod;
    BigInt rep = (num * inv) % mod;
    return rep == 0 ? BigInt(0) : rep - mod;
}

namespace {

// w * (1+X)^shift with integer binomials, so no precision is lost.
PowerSeries times_one_plus_x(const PowerSeries& w, int shift) {
    if (shift == 0) return w;
    const int K = w.is_exact() ? w.truncation() + shift : w.truncation();
    std::vector<Scalar> v;
    v.reserve(K + 1);
    for (int i = 0; i <= K; ++i) {
        Scalar s = Scalar::zero(w.context(), Scalar::kInfinite / 2);
        for (int k = 0; k <= std::min(i, shift); ++k) {
            if (i - k > w.truncation()) continue;
            s += w[i - k].mul_int(static_cast<std::int64_t>(binomial_coefficient(shift, k)));
        }
        v.push_back(s);
    }
    return PowerSeries(w.context(), std::move(v), w.tail());
}

}  // namespace

Scalar moment(const AmiceDistribution& mu, const Rational& a, int n, int j) {
    const PowerSeries& w = mu.transform;
    const Ctx& ctx = w.context();
    const std::int64_t p = ctx->prime();
    if (j < 0) throw std::invalid_argument("negative moment degree");
    BigInt rep = nonpositive_representative(a, n, p);
    // translate so that the coset becomes p^n Z_p, keeping polynomials polynomial
    int shift = static_cast<int>(-rep);
    PowerSeries g = times_one_plus_x(w, shift);
    for (int t = 0; t < n; ++t) g = psi(g);
    std::vector<Scalar> centered;
    centered.reserve(j + 1);
    for (int i = 0; i <= j; ++i) {
        if (g.is_exact() || i <= g.truncation()) {
            centered.push_back(twisted_derivative(g, i)[0].mul_p_power(n * i));
            continue;
        }
        // window too short: only the size bound on the coefficients is known
        double low = 1e18;
        for (int d = 0; d <= i; ++d) {
            double v = d <= g.truncation() ? static_cast<double>(g[d].val_bound_units()) / ctx->degree()
                                           : g.tail().lower(d, p);
            low = std::min(low, v);
        }
        centered.push_back(Scalar::zero(ctx, static_cast<int>(std::floor(low * ctx->degree() + 1e-9)))
                               .mul_p_power(n * i));
    }
    // (z - a)^j = sum_i binom(j, i) (z - rep)^i (rep - a)^{j - i}
    Scalar delta = Scalar::from_rational(ctx, Rational(rep) - a);
    Scalar total = Scalar::zero(ctx, Scalar::kInfinite / 2);
    Scalar dpow = Scalar::one(ctx);
    for (int i = j; i >= 0; --i) {
        total += centered[i] * dpow * Scalar::from_big(ctx, binomial_coefficient(j, i));
        dpow *= delta;
    }
    return total;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive-precision";
    }
    return "?";
}

AmiceCheck amice_velu_check(const AmiceDistribution& mu, const AmiceOptions& opt) {
    const Ctx& ctx = mu.transform.context();
    const std::int64_t p = ctx->prime();
    const int e = ctx->degree();
    AmiceCheck out;
    bool first = true;
    bool failed = false;
    bool below = false;
    for (int n = 0; n <= opt.n_max; ++n) {
        std::int64_t count = static_cast<std::int64_t>(int_pow(BigInt(p), static_cast<unsigned>(n)));
        for (std::int64_t a = 0; a < count; ++a) {
            for (int j = 0; j <= opt.d; ++j) {
                Scalar m = moment(mu, Rational(a), n, j);
                Rational shift = Rational(n) * (Rational(j) - opt.r);
                Rational margin;
                bool exact = !m.is_zero();
                if (exact) {
                    margin = m.valuation() - shift;
                    if (margin < opt.c_val - opt.band) failed = true;
                    else if (margin < opt.c_val) below = true;
                } else {
                    margin = Rational(m.precision_units(), e) - shift;
                    if (margin < opt.c_val) ++out.inconclusive_count;
                }
                if (first || margin < out.margin || (margin == out.margin && exact && !out.margin_exact)) {
                    out.margin = margin;
                    out.margin_exact = exact;
                    out.witness = {Rational(a), n, j};
                    first = false;
                }
            }
        }
    }
    if (failed)
        out.verdict = Verdict::fail;
    else if (below || out.inconclusive_count > 0)
        out.verdict = Verdict::inconclusive;
    else
        out.verdict = Verdict::pass;
    return out;
}

// ---------------------------------------------------------------- locally polynomial functions

bool cosets_meet(const Rational& a, int n, const Rational& b, int m, std::int64_t p) {
    Rational d = a - b;
    if (d == 0) return true;
    return p_valuation(d, p) >= std::min(n, m);
}

void LocPolyFunction::validate(std::int64_t p) const {
    for (size_t i = 0; i < pieces.size(); ++i) {
        const auto& pc = pieces[i];
        if (domain == Domain::zp) {
            if (pc.level < 0) throw std::invalid_argument("piece level must be >= 0 on Z_p");
            if (pc.center != 0 && p_valuation(pc.center, p) < 0)
                throw std::invalid_argument("piece center outside Z_p");
        }
        for (size_t k = 0; k < i; ++k) {
            if (cosets_meet(pc.center, pc.level, pieces[k].center, pieces[k].level, p))
                throw std::invalid_argument("overlapping cosets in locally polynomial function");
        }
    }
}

Rational LocPolyFunction::evaluate(const Rational& z, std::int64_t p) const {
    for (const auto& pc : pieces) {
        Rational d = z - pc.center;
        if (d != 0 && p_valuation(d, p) < pc.level) continue;
        Rational s = 0;
        Rational pw = 1;
        for (const auto& l : pc.coeffs) {
            s += l * pw;
            pw *= d;
        }
        return s;
    }
    return 0;
}

LocPolyFunction parse_locpoly(const std::string& text, std::int64_t p, Domain domain) {
    LocPolyFunction f;
    f.domain = domain;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto colon = line.find(':');
        std::istringstream head(line.substr(0, colon));
        std::string center;
        if (!(head >> center)) continue;
        if (colon == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 'a n : coefficients'");
        LocPolyPiece pc;
        pc.center = parse_rational(center, p);
        if (!(head >> pc.level)) throw std::invalid_argument("line " + std::to_string(lineno) + ": missing level");
        std::istringstream tail(line.substr(colon + 1));
        std::string tok;
        while (tail >> tok) pc.coeffs.push_back(parse_rational(tok, p));
        if (pc.coeffs.empty())
            throw std::invalid_argument("line " + std::to_string(lineno) + ": no coefficients");
        f.pieces.push_back(std::move(pc));
    }
    f.validate(p);
    return f;
}

std::string format_locpoly(const LocPolyFunction& f, std::int64_t p) {
    std::ostringstream os;
    for (const auto& pc : f.pieces) {
        os << format_rational(pc.center, p) << ' ' << pc.level << " :";
        for (const auto& l : pc.coeffs) os << ' ' << format_rational(l, p);
        os << '\n';
    }
    return os.str();
}

Scalar integrate_locpoly(const AmiceDistribution& mu, const LocPolyFunction& f) {
    const Ctx& ctx = mu.transform.context();
    if (f.domain != Domain::zp) throw std::invalid_argument("integrate_locpoly expects a function on Z_p");
    f.validate(ctx->prime());
    Scalar total = Scalar::zero(ctx, Scalar::kInfinite / 2);
    for (const auto& pc : f.pieces) {
        for (size_t i = 0; i < pc.coeffs.size(); ++i) {
            if (pc.coeffs[i] == 0) continue;
            total += moment(mu, pc.center, pc.level, static_cast<int>(i)) *
                     Scalar::from_rational(ctx, pc.coeffs[i]);
        }
    }
    return total;
}

}  // namespace padic
