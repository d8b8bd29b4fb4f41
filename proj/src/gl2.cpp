#include "padic/gl2.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <random>
#include <sstream>

namespace padic {

namespace {

constexpr int kNoVal = INT_MAX / 4;

int vval(const Rational& x, std::int64_t p) { return x == 0 ? kNoVal : p_valuation(x, p); }

Rational ppow(std::int64_t p, int e) { return rat_pow(Rational(p), e); }

bool in_coset(const Rational& z, const Rational& c, int n, std::int64_t p) { return vval(z - c, p) >= n; }

// coefficients of P(t + s) given those of P(t)
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

std::vector<Rational> poly_mul(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<Rational> out(a.size() + b.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<Rational> poly_pow(const std::vector<Rational>& a, int e) {
    std::vector<Rational> out{Rational(1)};
    for (int i = 0; i < e; ++i) out = poly_mul(out, a);
    return out;
}

std::vector<Rational> monomial(int e, const Rational& c = 1) {
    std::vector<Rational> out(e + 1, Rational(0));
    out[e] = c;
    return out;
}

Scalar rational_scalar(const Ctx& ctx, const Rational& v) { return wide_rational(ctx, v); }

Verdict worse(Verdict a, Verdict b) {
    if (a == Verdict::fail || b == Verdict::fail) return Verdict::fail;
    if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
    return Verdict::pass;
}

}  // namespace

Rational chart_twist(const FilteredPhiModule& mod) { return Rational(mod.p) * mod.alpha / mod.beta; }

FilteredPhiModule swap_sides(const FilteredPhiModule& mod) {
    FilteredPhiModule out = mod;
    std::swap(out.alpha, out.beta);
    return out;
}

// ---- matrices

GL2Element GL2Element::operator*(const GL2Element& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
}

GL2Element GL2Element::inverse() const {
    Rational D = det();
    if (D == 0) throw std::domain_error("singular matrix");
    return {d / D, -b / D, -c / D, a / D};
}

std::string to_string(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::scalar: return "scalar";
        case GeneratorKind::chart_swap: return "chart-swap";
        case GeneratorKind::diag: return "diag";
        case GeneratorKind::unipotent: return "unipotent";
    }
    return "?";
}

GL2Element Generator::matrix(std::int64_t p) const {
    switch (kind) {
        case GeneratorKind::scalar: return GL2Element::scalar(lambda);
        case GeneratorKind::chart_swap: return GL2Element::chart_swap(p);
        case GeneratorKind::diag: return GL2Element::diag(lambda);
        case GeneratorKind::unipotent: return GL2Element::unipotent(lambda);
    }
    return {};
}

namespace {

void push_upper(std::vector<Generator>& out, const Rational& a, const Rational& b, const Rational& d) {
    // [[a, b], [0, d]] = a * U(b/d) * diag(d/a)
    if (a != 1) out.push_back({GeneratorKind::scalar, a});
    if (b != 0) out.push_back({GeneratorKind::unipotent, b / d});
    if (d != a) out.push_back({GeneratorKind::diag, d / a});
}

}  // namespace

std::vector<Generator> bruhat_factor(const GL2Element& g, std::int64_t p) {
    Rational D = g.det();
    if (D == 0) throw std::domain_error("singular matrix");
    std::vector<Generator> out;
    if (g.c == 0) {
        push_upper(out, g.a, g.b, g.d);
        return out;
    }
    // g = U(a/c) * w * [[c, d], [0, -det/(c p)]]
    if (g.a != 0) out.push_back({GeneratorKind::unipotent, g.a / g.c});
    out.push_back({GeneratorKind::chart_swap, 1});
    push_upper(out, g.c, g.d, -D / (g.c * Rational(p)));
    return out;
}

// ---- B(alpha)

Scalar BanachFunctionPair::chart_value(int chart, const Rational& w) const {
    if (chart != 1 && chart != 2) throw std::invalid_argument("chart must be 1 or 2");
    if (w != 0 && p_valuation(w, mod.p) < 0) throw std::invalid_argument("chart argument outside Z_p");
    if (source) return source(chart, w);
    return eval_mahler(chart == 1 ? f1 : f2, w);
}

Scalar BanachFunctionPair::homogeneous(const Rational& u, const Rational& v) const {
    const std::int64_t p = mod.p;
    if (u == 0 && v == 0) throw std::domain_error("pole-at-sample: both coordinates vanish");
    const Rational rho = chart_twist(mod);
    if (u != 0 && (v == 0 || vval(v, p) - vval(u, p) >= 1)) {
        Rational c = rat_pow(rho, vval(u, p)) * rat_pow(u, mod.k - 2);
        return rational_scalar(ctx, c) * chart_value(1, v / (u * Rational(p)));
    }
    Rational c = rat_pow(rho, vval(v, p)) * rat_pow(v, mod.k - 2);
    return rational_scalar(ctx, c) * chart_value(2, u / v);
}

Scalar BanachFunctionPair::value(const Rational& z) const { return homogeneous(1, z); }

NormEstimate BanachFunctionPair::chart_norm(int chart) const {
    return cr_norm(chart == 1 ? f1 : f2, mod.r_alpha());
}

double BanachFunctionPair::norm() const { return std::max(chart_norm(1).log_norm, chart_norm(2).log_norm); }

BanachFunctionPair sample_pair(const FilteredPhiModule& mod, const Ctx& ctx, ChartSource source, int K) {
    BanachFunctionPair out;
    out.mod = mod;
    out.ctx = ctx;
    out.source = std::move(source);
    for (int chart = 1; chart <= 2; ++chart) {
        std::vector<Scalar> vals;
        vals.reserve(K + 1);
        for (int i = 0; i <= K; ++i) vals.push_back(out.source(chart, Rational(i)));
        (chart == 1 ? out.f1 : out.f2) = mahler_coeffs(vals, mod.r_alpha());
    }
    return out;
}

BanachFunctionPair pair_from_charts(const FilteredPhiModule& mod, MahlerFunction f1, MahlerFunction f2) {
    BanachFunctionPair out;
    out.mod = mod;
    out.ctx = f1.ctx;
    out.f1 = std::move(f1);
    out.f2 = std::move(f2);
    return out;
}

Scalar gl2_act_point(const GL2Element& g, const BanachFunctionPair& f, const Rational& z) {
    Rational D = g.det();
    if (D == 0) throw std::domain_error("singular matrix");
    Scalar c = rational_scalar(f.ctx, rat_pow(f.mod.alpha, -vval(D, f.mod.p)));
    return c * f.homogeneous(-g.c * z + g.a, g.d * z - g.b);
}

namespace {

// g.f with charts read lazily from f
BanachFunctionPair lazy_act(const GL2Element& g, const BanachFunctionPair& f) {
    BanachFunctionPair out;
    out.mod = f.mod;
    out.ctx = f.ctx;
    const std::int64_t p = f.mod.p;
    Scalar c = rational_scalar(f.ctx, rat_pow(f.mod.alpha, -vval(g.det(), p)));
    out.source = [g, f, c, p](int chart, const Rational& w) {
        if (chart == 1) return c * f.homogeneous(g.a - g.c * Rational(p) * w, g.d * Rational(p) * w - g.b);
        return c * f.homogeneous(g.a * w - g.c, g.d - g.b * w);
    };
    return out;
}

}  // namespace

ActedPair gl2_act_pair(const GL2Element& g, const BanachFunctionPair& f, int K) {
    ActedPair out;
    out.factors = bruhat_factor(g, f.mod.p);
    BanachFunctionPair cur = f;
    for (auto it = out.factors.rbegin(); it != out.factors.rend(); ++it) cur = lazy_act(it->matrix(f.mod.p), cur);
    out.pair = sample_pair(f.mod, f.ctx, cur.source ? cur.source : ChartSource([f](int chart, const Rational& w) {
        return f.chart_value(chart, w);
    }), K);
    out.norm_in = f.norm();
    out.norm_out = out.pair.norm();
    out.ratio = out.norm_out - out.norm_in;
    return out;
}

LAlphaGenerator lalpha_generator(const FilteredPhiModule& mod, const Ctx& ctx, LAlphaKind kind, const Rational& a,
                                 int j, int K) {
    if (j < 0 || Rational(j) >= mod.val_alpha())
        throw std::invalid_argument("generator degree must satisfy 0 <= j < val(alpha)");
    const std::int64_t p = mod.p;
    const Rational rho = chart_twist(mod);
    const int e = mod.k - 2 - j;
    ChartSource src;
    if (kind == LAlphaKind::monomial) {
        src = [=](int chart, const Rational& w) {
            if (chart == 1) return rational_scalar(ctx, rat_pow(Rational(p) * w, j));
            if (w == 0) return Scalar::zero(ctx);
            return rational_scalar(ctx, rat_pow(rho, vval(w, p)) * rat_pow(w, e));
        };
    } else {
        src = [=](int chart, const Rational& w) {
            if (chart == 1) {
                Rational t = Rational(p) * w - a;
                if (t == 0) return Scalar::zero(ctx);
                return rational_scalar(ctx, rat_pow(rho, vval(t, p)) * rat_pow(t, e));
            }
            Rational t = 1 - a * w;
            if (t == 0) return Scalar::zero(ctx);
            return rational_scalar(ctx, rat_pow(rho, vval(t, p)) * rat_pow(w, j) * rat_pow(t, e));
        };
    }
    LAlphaGenerator out;
    out.kind = kind;
    out.center = a;
    out.j = j;
    out.pair = sample_pair(mod, ctx, src, K);
    out.norm1 = out.pair.chart_norm(1);
    out.norm2 = out.pair.chart_norm(2);
    return out;
}

TailDecayReport lalpha_tail_decay(const FilteredPhiModule& mod, const AmiceDistribution& mu, int j, int n_max) {
    const Rational r = mod.val_alpha();
    const int e = mod.k - 2 - j;
    AmiceOptions ao;
    ao.r = r;
    ao.d = mod.k - 2;
    ao.n_max = n_max + 1;
    ao.c_val = 0;
    AmiceCheck ac = amice_velu_check(mu, ao);
    TailDecayReport out;
    // the p^{n+1} Z_p term carries one extra level, worth e - r
    out.c_val = ac.margin + std::min(Rational(0), Rational(e) - r);
    const Ctx& ctx = mu.transform.context();
    const Rational rho = chart_twist(mod);
    for (int n = 0; n <= n_max; ++n) {
        TailPairing tp;
        tp.n = n;
        Scalar diff = moment(mu, 0, n, e) - moment(mu, 0, n + 1, e);
        tp.value = rational_scalar(ctx, rat_pow(rho, n)) * diff;
        tp.required = out.c_val + Rational(n) * (r - Rational(j));
        Rational got = tp.value.is_zero() ? tp.value.precision() : tp.value.valuation();
        tp.ok = got >= tp.required;
        out.ok = out.ok && tp.ok;
        out.pieces.push_back(tp);
    }
    return out;
}

// ---- smooth principal series

Rational SmoothCompactFunction::evaluate(const Rational& x, const FilteredPhiModule& mod) const {
    const std::int64_t p = mod.p;
    Rational total = 0;
    for (const auto& pc : pieces)
        if (in_coset(x, pc.center, pc.level, p)) total += pc.value;
    if (!tails.empty()) {
        if (x == 0) throw std::domain_error("radial tail evaluated at 0");
        const Rational sigma = Rational(p) * mod.beta / mod.alpha;
        int v = p_valuation(x, p);
        for (const auto& t : tails)
            if (t.below ? v < t.bound : v >= t.bound) total += t.coeff * rat_pow(sigma, v);
    }
    return total;
}

Rational SmoothCompactFunction::total_mass(std::int64_t p) const {
    if (!compact()) throw std::domain_error("total mass of a non-compact function");
    Rational m = 0;
    for (const auto& pc : pieces) m += pc.value * ppow(p, -pc.level);
    return m;
}

namespace {

// sum_{i = lo}^{hi} q^i; empty optionals mean -infinity / +infinity (formal closed forms)
Rational geometric(const Rational& q, std::optional<int> lo, std::optional<int> hi) {
    if (lo && hi) {
        if (*hi < *lo) return 0;
        if (q == 1) return Rational(*hi - *lo + 1);
        return (rat_pow(q, *hi + 1) - rat_pow(q, *lo)) / (q - 1);
    }
    if (q == 1) throw DivergentParameter("divergent-parameter: geometric ratio equals 1", q);
    if (!lo && hi) return rat_pow(q, *hi + 1) / (q - 1);
    if (lo && !hi) return rat_pow(q, *lo) / (1 - q);
    throw std::invalid_argument("two-sided geometric sum");
}

struct ShellModel {
    std::int64_t p;
    Rational rho, sigma, c0;
    Rational ratio;  // beta / alpha = sigma / p
};

ShellModel shell_model(const FilteredPhiModule& mod) {
    ShellModel m;
    m.p = mod.p;
    m.rho = chart_twist(mod);
    m.sigma = Rational(mod.p) * mod.beta / mod.alpha;
    Rational q = m.rho / Rational(mod.p);
    if (q == 1) throw DivergentParameter("divergent-parameter: alpha/beta equals 1", q);
    m.c0 = (1 - Rational(1, mod.p)) / (1 - q);
    m.ratio = mod.beta / mod.alpha;
    return m;
}

// int_{c + p^n Z_p} rho^{val(z - x)} dx
Rational coset_mass(const ShellModel& m, const Rational& c, int n, const Rational& z) {
    int v = vval(z - c, m.p);
    if (v < n) return rat_pow(m.rho, v) * ppow(m.p, -n);
    return rat_pow(m.rho / Rational(m.p), n) * m.c0;
}

// sum over shells i in [lo, hi] of sigma^i int_{val x = i} rho^{val(z - x)} dx
Rational radial_mass(const ShellModel& m, std::optional<int> lo, std::optional<int> hi, const Rational& z) {
    const Rational one_minus = 1 - Rational(1, m.p);
    int v = vval(z, m.p);
    Rational total = 0;
    // shells below val z
    std::optional<int> a_hi = hi;
    if (v != kNoVal) a_hi = hi ? std::min(*hi, v - 1) : v - 1;
    if (!(lo && a_hi && *a_hi < *lo)) total += one_minus * geometric(Rational(m.p), lo, a_hi);
    if (v == kNoVal) return total;
    if ((!lo || *lo <= v) && (!hi || v <= *hi))
        total += ppow(m.p, v) * (m.c0 - Rational(1, m.p));
    std::optional<int> c_lo = lo ? std::max(*lo, v + 1) : v + 1;
    if (!(hi && *hi < *c_lo)) total += rat_pow(m.rho, v) * one_minus * geometric(m.ratio, c_lo, hi);
    return total;
}

}  // namespace

Rational intertwine_at(const FilteredPhiModule& mod, const SmoothCompactFunction& h, int j, const Rational& z) {
    ShellModel m = shell_model(mod);
    Rational total = 0;
    for (const auto& pc : h.pieces) total += pc.value * coset_mass(m, pc.center, pc.level, z);
    for (const auto& t : h.tails) {
        std::optional<int> lo, hi;
        if (t.below)
            hi = t.bound - 1;
        else
            lo = t.bound;
        total += t.coeff * radial_mass(m, lo, hi, z);
    }
    return total * rat_pow(z, j);
}

IntertwinerImage smooth_intertwiner(const FilteredPhiModule& mod, const SmoothCompactFunction& h, int j, int window,
                                    int fine) {
    if (!h.compact()) throw std::invalid_argument("smooth_intertwiner needs a compact input");
    const std::int64_t p = mod.p;
    for (const auto& pc : h.pieces) {
        if (pc.level < window || vval(pc.center, p) < window)
            throw std::invalid_argument("piece outside the requested window");
        if (pc.level > fine) throw std::invalid_argument("piece finer than the requested level");
    }
    IntertwinerImage out;
    out.j = j;
    out.window = window;
    out.fine = fine;
    const BigInt count = int_pow(BigInt(p), static_cast<unsigned>(fine - window));
    for (BigInt t = 0; t < count; ++t) {
        Rational c = Rational(t) * ppow(p, window);
        out.pieces.push_back({c, fine, intertwine_at(mod, h, 0, c)});
    }
    out.outer_mass = h.total_mass(p);
    out.compact_support = out.outer_mass == 0;
    return out;
}

SmoothCompactFunction smooth_act(const FilteredPhiModule& mod, const GL2Element& g, const SmoothCompactFunction& h) {
    if (g.c != 0) throw std::invalid_argument("smooth_act handles upper triangular elements only");
    if (!h.compact()) throw std::invalid_argument("smooth_act needs a compact input");
    const std::int64_t p = mod.p;
    const Rational sigma = Rational(p) * mod.beta / mod.alpha;
    Rational scale = rat_pow(mod.beta, -vval(g.det(), p)) * rat_pow(sigma, vval(g.a, p)) * rat_pow(g.a, mod.k - 2);
    SmoothCompactFunction out;
    for (const auto& pc : h.pieces) {
        // (d x - b)/a in c + p^n Z_p  <=>  x in (a c + b)/d + p^{n + val a - val d} Z_p
        out.pieces.push_back({(g.a * pc.center + g.b) / g.d, pc.level + vval(g.a, p) - vval(g.d, p), scale * pc.value});
    }
    return out;
}

Rational smooth_act_point(const FilteredPhiModule& mod, const GL2Element& g,
                          const std::function<Rational(const Rational&)>& f, const Rational& z) {
    const std::int64_t p = mod.p;
    Rational u = -g.c * z + g.a;
    if (u == 0) throw std::domain_error("pole-at-sample");
    return rat_pow(mod.alpha, -vval(g.det(), p)) * rat_pow(chart_twist(mod), vval(u, p)) * rat_pow(u, mod.k - 2) *
           f((g.d * z - g.b) / u);
}

namespace {

void tally(ReadingTally& t, bool ok, const Rational& z) {
    if (ok) {
        ++t.agree;
        return;
    }
    if (t.disagree++ == 0) t.first_mismatch = "z = " + to_string(z);
}

bool all_agree(const ReadingTally& t) { return t.disagree == 0 && t.agree > 0; }

}  // namespace

IdentityReport intertwiner_identity_check(const FilteredPhiModule& mod, int j, std::uint64_t seed, int samples) {
    if (j < 0 || j > mod.k - 2) throw std::invalid_argument("identity check needs 0 <= j <= k-2");
    const std::int64_t p = mod.p;
    ShellModel m = shell_model(mod);
    IdentityReport rep;
    rep.j = j;
    rep.samples = samples;
    SmoothCompactFunction unit_ball{{{0, 0, 1}}, {}};
    // sigma^{val x} off pZ_p; sigma^{val x} everywhere; sigma^{val x} on pZ_p
    SmoothCompactFunction off_pzp{{}, {{1, 1, true}}};
    SmoothCompactFunction radial{{}, {{1, 1, true}, {1, 1, false}}};
    SmoothCompactFunction on_pzp{{}, {{1, 1, false}}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> vdist(-3, 3);
    std::uniform_int_distribution<std::int64_t> udist(1, p * p * p * p);
    for (int s = 0; s < samples; ++s) {
        std::int64_t u = udist(rng);
        while (u % p == 0) u = udist(rng);
        if (rng() & 1) u = -u;
        int v = vdist(rng);
        Rational z = Rational(u) * ppow(p, v);
        Rational zj = rat_pow(z, j);
        Rational rho_v = rat_pow(m.rho, v);
        Rational in_zp = v >= 0 ? 1 : 0;
        Rational in_pzp = v >= 1 ? 1 : 0;

        Rational lhs_c = intertwine_at(mod, unit_ball, j, z);
        tally(rep.closed_a, lhs_c == m.c0 * zj * in_zp + zj * rho_v * (1 - in_zp), z);
        tally(rep.closed_b, lhs_c == m.c0 * zj * in_zp + zj * rho_v * (z - in_zp), z);

        Rational lhs_a = intertwine_at(mod, off_pzp, j, z);
        tally(rep.open_a, lhs_a == zj * in_pzp + m.c0 * zj * rho_v * (1 - in_pzp), z);
        try {
            Rational lhs_b = intertwine_at(mod, radial, j + 1, z) - intertwine_at(mod, on_pzp, j, z);
            tally(rep.open_b, lhs_b == zj * in_pzp + m.c0 * zj * rho_v * (z - in_pzp), z);
        } catch (const DivergentParameter&) {
            tally(rep.open_b, false, z);
        }
    }
    bool a_ok = all_agree(rep.closed_a) && all_agree(rep.open_a);
    bool b_ok = all_agree(rep.closed_b) && all_agree(rep.open_b);
    rep.reading = a_ok && !b_ok ? "one-minus-indicator" : b_ok && !a_ok ? "z-minus-indicator" : "none";
    rep.pass = a_ok != b_ok;
    return rep;
}

// ---- dual side

std::vector<ChartPiece> coset_to_charts(const FilteredPhiModule& mod, const Rational& c, int n,
                                        const std::vector<Rational>& poly) {
    const std::int64_t p = mod.p;
    if (static_cast<int>(poly.size()) > mod.k - 1) throw std::invalid_argument("piece degree exceeds k-2");
    const int vc = vval(c, p);
    if (n >= 1 && vc >= 1) {
        std::vector<Rational> q(poly.size());
        for (std::size_t i = 0; i < poly.size(); ++i) q[i] = poly[i] * ppow(p, static_cast<int>(i));
        return {{1, c / Rational(p), n - 1, q}};
    }
    if (vc < n && vc <= 0) {
        // rho^{val w} w^{k-2} sum l_i (1/w - c)^i = rho^{-v} sum l_i w^{k-2-i} (1 - c w)^i
        std::vector<Rational> g(mod.k - 1, Rational(0));
        for (std::size_t i = 0; i < poly.size(); ++i) {
            auto term = poly_mul(monomial(mod.k - 2 - static_cast<int>(i), poly[i]),
                                 poly_pow({Rational(1), -c}, static_cast<int>(i)));
            for (std::size_t d = 0; d < term.size(); ++d) g[d] += term[d];
        }
        Rational scale = rat_pow(chart_twist(mod), -vc);
        for (auto& x : g) x *= scale;
        Rational center = 1 / c;
        return {{2, center, n - 2 * vc, poly_shift(g, center)}};
    }
    // c + p^n Z_p with n <= 0 contains pZ_p: split into level-1 cosets
    std::vector<ChartPiece> out;
    const std::int64_t count = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(p), 1 - n)));
    for (std::int64_t t = 0; t < count; ++t) {
        Rational shift = Rational(t) * ppow(p, n);
        auto sub = coset_to_charts(mod, c + shift, 1, poly_shift(poly, shift));
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

std::vector<ChartPiece> to_chart_pieces(const FilteredPhiModule& mod, const QpTestFunction& f) {
    std::vector<ChartPiece> out;
    for (const auto& pc : f.pieces) {
        auto sub = coset_to_charts(mod, pc.center, pc.level, pc.coeffs);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    if (f.far_level >= 0) out.push_back({2, 0, f.far_level, f.far_poly});
    return out;
}

QpFunctional chart_pair_functional(const FilteredPhiModule& mod, const AmiceDistribution& mu1,
                                   const AmiceDistribution& mu2) {
    return [mod, mu1, mu2](const QpTestFunction& f) {
        const Ctx& ctx = mu1.transform.context();
        Scalar total = Scalar::zero(ctx, Scalar::kInfinite / 2);
        for (const auto& piece : to_chart_pieces(mod, f)) {
            const AmiceDistribution& mu = piece.chart == 1 ? mu1 : mu2;
            for (std::size_t i = 0; i < piece.poly.size(); ++i) {
                if (piece.poly[i] == 0) continue;
                total += rational_scalar(ctx, piece.poly[i]) *
                         moment(mu, piece.center, piece.level, static_cast<int>(i));
            }
        }
        return total;
    };
}

QpTestFunction near_function(const FilteredPhiModule&, const Rational& a, int n, int j) {
    QpTestFunction f;
    f.pieces.push_back({a, n, monomial(j)});
    return f;
}

QpTestFunction far_function(const FilteredPhiModule& mod, const Rational& a, int n, int j) {
    const std::int64_t p = mod.p;
    const int e = mod.k - 2 - j;
    const int va = vval(a, p);
    const int m0 = std::min({n, va, 0});
    QpTestFunction f;
    // val(z - a) < m0: near infinity the second chart reads w^j (1 - a w)^e
    f.far_level = 1 - m0;
    f.far_poly = poly_mul(monomial(j), poly_pow({Rational(1), -a}, e));
    const Rational rho = chart_twist(mod);
    for (int s = m0; s < n; ++s) {
        for (std::int64_t u = 1; u < p; ++u) {
            Rational shift = Rational(u) * ppow(p, s);
            f.pieces.push_back({a + shift, s + 1, poly_shift(monomial(e, rat_pow(rho, s)), shift)});
        }
    }
    return f;
}

DualConditionsReport dual_conditions_check(const FilteredPhiModule& mod, const QpFunctional& mu,
                                           const DualOptions& opt) {
    const std::int64_t p = mod.p;
    const Rational r = mod.val_alpha();
    DualConditionsReport rep;
    bool first = true;
    auto record = [&](const std::string& cond, const Rational& a, int n, int j, const Scalar& value,
                      const Rational& required, bool annihilation) {
        ++rep.checked;
        Verdict v;
        Rational margin;
        if (value.is_zero()) {
            margin = value.precision() - required;
            v = margin >= 0 ? Verdict::pass : Verdict::inconclusive;
        } else {
            margin = value.valuation() - required;
            v = margin >= 0 ? Verdict::pass : Verdict::fail;
        }
        if (v == Verdict::inconclusive) ++rep.inconclusive_count;
        if (v != Verdict::inconclusive && (!rep.has_margin || margin < rep.margin)) {
            rep.margin = margin;
            rep.has_margin = true;
        }
        bool take = first || (v == Verdict::fail && rep.verdict != Verdict::fail) ||
                    (v == Verdict::inconclusive && rep.verdict == Verdict::pass);
        if (take) rep.witness = {cond, a, n, j};
        first = false;
        rep.verdict = worse(rep.verdict, v);
        if (annihilation) rep.annihilation = worse(rep.annihilation, v);
    };
    for (int j = 0; j <= mod.k - 2; ++j) {
        const bool below = Rational(j) < r;
        // near cosets a + p^n Z_p inside p^{-window} Z_p
        for (int n = -opt.window; n <= opt.n_max; ++n) {
            const std::int64_t count = static_cast<std::int64_t>(std::llround(std::pow(double(p), n + opt.window)));
            for (std::int64_t t = 0; t < count; ++t) {
                Rational a = Rational(t) * ppow(p, -opt.window);
                Scalar val = mu(near_function(mod, a, n, j));
                record("near", a, n, j, val, opt.c_val + Rational(n) * (Rational(j) - r), below && t == 0 && n < 0);
            }
        }
        // far complements for n >= 0
        for (int n = 0; n <= opt.n_max; ++n) {
            const std::int64_t count = static_cast<std::int64_t>(std::llround(std::pow(double(p), n + opt.window)));
            for (std::int64_t t = 0; t < count; ++t) {
                Rational a = Rational(t) * ppow(p, -opt.window);
                Scalar val = mu(far_function(mod, a, n, j));
                record("far", a, n, j, val, opt.c_val + Rational(n) * (r - Rational(j)), below && t == 0);
            }
        }
        for (int n = -opt.n_max; n < 0; ++n) {
            Scalar val = mu(far_function(mod, 0, n, j));
            record("far", 0, n, j, val, opt.c_val + Rational(n) * (r - Rational(j)), false);
        }
    }
    return rep;
}

// ---- distributions on Q_p

AmiceDistribution CompactQpDistribution::level(int n) const {
    if (levels.empty()) throw std::out_of_range("empty distribution");
    if (n > top()) throw std::out_of_range("level above the window");
    if (n >= first) return levels.at(n - first);
    AmiceDistribution mu = levels.front();
    for (int i = n; i < first; ++i) mu.transform = psi(mu.transform);
    return mu;
}

namespace {

int admissible_level(const LocPolyPiece& piece, std::int64_t p) {
    int N = std::max(0, -piece.level);
    if (piece.center != 0) N = std::max(N, -p_valuation(piece.center, p));
    return N;
}

Scalar integrate_piece_at(const AmiceDistribution& muN, const LocPolyPiece& piece, std::int64_t p, int N) {
    const Ctx& ctx = muN.transform.context();
    Scalar total = Scalar::zero(ctx, Scalar::kInfinite / 2);
    Rational center = piece.center * ppow(p, N);
    for (std::size_t i = 0; i < piece.coeffs.size(); ++i) {
        if (piece.coeffs[i] == 0) continue;
        Rational c = piece.coeffs[i] * ppow(p, -N * static_cast<int>(i));
        total += rational_scalar(ctx, c) * moment(muN, center, N + piece.level, static_cast<int>(i));
    }
    return total;
}

}  // namespace

Scalar integrate_qp_at(const CompactQpDistribution& mu, const LocPolyFunction& f, std::int64_t p, int N) {
    if (N > mu.top()) throw SupportExceedsWindow("support-exceeds-window: level " + std::to_string(N));
    AmiceDistribution muN = mu.level(N);
    Scalar total = Scalar::zero(muN.transform.context(), Scalar::kInfinite / 2);
    for (const auto& piece : f.pieces) {
        if (admissible_level(piece, p) > N) throw std::invalid_argument("level below the admissible one");
        total += integrate_piece_at(muN, piece, p, N);
    }
    return total;
}

Scalar integrate_qp(const CompactQpDistribution& mu, const LocPolyFunction& f, std::int64_t p) {
    if (mu.levels.empty()) throw std::invalid_argument("empty distribution");
    const Ctx& ctx = mu.levels.front().transform.context();
    Scalar total = Scalar::zero(ctx, Scalar::kInfinite / 2);
    std::vector<std::pair<int, AmiceDistribution>> cache;
    for (const auto& piece : f.pieces) {
        int N = admissible_level(piece, p);
        if (N > mu.top())
            throw SupportExceedsWindow("support-exceeds-window: piece needs level " + std::to_string(N));
        auto it = std::find_if(cache.begin(), cache.end(), [N](const auto& c) { return c.first == N; });
        if (it == cache.end()) {
            cache.emplace_back(N, mu.level(N));
            it = cache.end() - 1;
        }
        total += integrate_piece_at(it->second, piece, p, N);
    }
    return total;
}

Scalar fourier_integral(const CompactQpDistribution& mu, const Rational& y, int N, int j, std::int64_t p) {
    if (y == 0 || p_valuation(y, p) >= N) throw std::invalid_argument("fourier_integral needs N > val(y)");
    AmiceDistribution muN = mu.level(N);
    PowerSeries w = twisted_derivative(muN.transform, j);
    const Ctx& base = w.context();
    CharacterValue ch = additive_character(p, base->precision(), y * ppow(p, -N));
    const Ctx& L = ch.value.context();
    std::vector<Scalar> lifted;
    lifted.reserve(w.coeffs().size());
    for (const auto& c : w.coeffs()) lifted.push_back(embed(c, L));
    PowerSeries wl(L, std::move(lifted), w.tail());
    Scalar value = wl.evaluate(ch.value - Scalar::one(L));
    return value.mul_p_power(-N * j);
}

FourierReport fourier_condition_check(const FilteredPhiModule& mod, const CompactQpDistribution& mu_alpha,
                                      const CompactQpDistribution& mu_beta, const Rational& y, int N, int j,
                                      const FourierOptions& opt) {
    FourierReport rep;
    rep.lhs = fourier_integral(mu_beta, y, N, j, mod.p);
    Scalar a = fourier_integral(mu_alpha, y, N, j, mod.p);
    const Ctx& L = a.context();
    rep.level = L->level();
    rep.rhs = wide_rational(L, rat_pow(mod.beta / mod.alpha, p_valuation(y, mod.p))) * a;
    Scalar diff = rep.lhs - rep.rhs;
    const double e = L->degree();
    if (!diff.is_zero()) {
        rep.verdict = Verdict::fail;
        rep.digits = diff.val_units() / e;
        return rep;
    }
    rep.digits = diff.precision_units() / e;
    rep.verdict = rep.digits >= opt.min_digits ? Verdict::pass : Verdict::inconclusive;
    return rep;
}

}  // namespace padic
