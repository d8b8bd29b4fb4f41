#include "padic/series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace padic {

namespace {

constexpr double kNoBound = 1e18;
constexpr int kExactZeroPrec = Scalar::kInfinite / 2;

Scalar exact_zero(const Ctx& ctx) { return Scalar::zero(ctx, kExactZeroPrec); }

int to_units(double v, int e) {
    if (v >= 1e15) return kExactZeroPrec;
    if (v <= -1e15) return -kExactZeroPrec;
    return static_cast<int>(std::floor(v * e + 1e-9));
}

double val_double(const Scalar& x) {
    return static_cast<double>(x.val_units()) / x.context()->degree();
}

// min over d >= d0 of lower(d) + slope*d. The function is convex in d.
double tail_min(const TailModel& t, std::int64_t d0, double slope, std::int64_t p) {
    if (t.exact) return kNoBound;
    auto at = [&](double d) { return t.lower(static_cast<std::int64_t>(d), p) + slope * d; };
    double best = at(static_cast<double>(d0));
    if (slope > 0 && t.order > 0) {
        double dstar = t.order / (slope * std::log(static_cast<double>(p))) - 1.0;
        if (dstar > static_cast<double>(d0)) {
            best = std::min(best, at(std::floor(dstar)));
            best = std::min(best, at(std::ceil(dstar)));
        }
    } else if (slope <= 0) {
        return -kNoBound;
    }
    return best;
}

// Widen the tail model so that it also covers the known coefficients.
TailModel normalized(const std::vector<Scalar>& coeffs, TailModel t, std::int64_t p) {
    double worst = -kNoBound;
    for (size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i].is_zero()) continue;
        double order = t.exact ? 0.0 : t.order;
        worst = std::max(worst, -val_double(coeffs[i]) - order * log_p(static_cast<double>(i) + 1.0, p));
    }
    if (t.exact) {
        t.order = 0.0;
        t.bound = worst == -kNoBound ? 0.0 : worst;
    } else {
        t.bound = std::max(t.bound, worst);
    }
    return t;
}

void check_same(const PowerSeries& a, const PowerSeries& b) {
    if (!a.context() || !b.context()) throw std::invalid_argument("uninitialized series");
    if (a.context().get() != b.context().get() && !a.context()->same_field(*b.context()))
        throw ContextMismatch("series over different fields");
}

// truncation of a combination: exact only if both are exact
int joint_truncation(const PowerSeries& a, const PowerSeries& b, int exact_degree) {
    if (a.is_exact() && b.is_exact()) return exact_degree;
    if (a.is_exact()) return b.truncation();
    if (b.is_exact()) return a.truncation();
    return std::min(a.truncation(), b.truncation());
}

}  // namespace

double log_p(double x, std::int64_t p) { return std::log(x) / std::log(static_cast<double>(p)); }

double tail_floor(const PowerSeries& f, double slope) {
    return tail_min(f.tail(), f.truncation() + 1, slope, f.context()->prime());
}

// ---------------------------------------------------------------- tails

double TailModel::lower(std::int64_t d, std::int64_t p) const {
    if (exact) return kNoBound;
    return -bound - order * log_p(static_cast<double>(d) + 1.0, p);
}

TailModel TailModel::combine_product(const TailModel& o) const {
    return {exact && o.exact, bound + o.bound, order + o.order};
}

TailModel TailModel::weaker(const TailModel& o) const {
    if (exact) return o.exact ? TailModel{true, std::max(bound, o.bound), 0.0} : o;
    if (o.exact) return *this;
    return {false, std::max(bound, o.bound), std::max(order, o.order)};
}

// ---------------------------------------------------------------- binomials

std::shared_ptr<const BinomialTable> binomial_table(const PadicContext& ctx, int n) {
    static std::mutex mu;
    static std::map<std::pair<std::int64_t, std::int64_t>, std::shared_ptr<const BinomialTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(ctx.prime(), ctx.modulus());
    auto it = cache.find(key);
    if (it != cache.end() && static_cast<int>(it->second->size()) > n) return it->second;
    const std::int64_t m = ctx.modulus();
    int rows = std::max(n + 1, 2 * (it == cache.end() ? 0 : static_cast<int>(it->second->size())));
    auto table = std::make_shared<BinomialTable>();
    table->reserve(rows);
    for (int i = 0; i < rows; ++i) {
        std::vector<std::int64_t> row(i + 1, 1);
        for (int j = 1; j < i; ++j) {
            std::int64_t s = (*table)[i - 1][j - 1] + (*table)[i - 1][j];
            row[j] = s >= m ? s - m : s;
        }
        table->push_back(std::move(row));
    }
    std::shared_ptr<const BinomialTable> out = table;
    cache[key] = out;
    return out;
}

// ---------------------------------------------------------------- power series

PowerSeries::PowerSeries(Ctx ctx, std::vector<Scalar> coeffs, TailModel tail)
    : ctx_(std::move(ctx)), coeffs_(std::move(coeffs)) {
    if (!ctx_) throw std::invalid_argument("series needs a context");
    if (coeffs_.empty()) throw std::invalid_argument("series needs at least one coefficient");
    for (const auto& c : coeffs_) {
        if (!c.valid() || (c.context().get() != ctx_.get() && !c.context()->same_field(*ctx_)))
            throw ContextMismatch("coefficient from a different field");
    }
    tail_ = normalized(coeffs_, tail, ctx_->prime());
}

PowerSeries PowerSeries::zero(const Ctx& ctx, int K) {
    return PowerSeries(ctx, std::vector<Scalar>(K + 1, Scalar::zero(ctx)), TailModel::integral());
}

PowerSeries PowerSeries::constant(const Scalar& c, int K) {
    std::vector<Scalar> v(K + 1, exact_zero(c.context()));
    v[0] = c;
    return PowerSeries(c.context(), std::move(v), TailModel::integral());
}

PowerSeries PowerSeries::polynomial(const Ctx& ctx, const std::vector<std::int64_t>& coeffs) {
    std::vector<Scalar> v;
    for (auto c : coeffs) v.push_back(Scalar::from_int(ctx, c));
    if (v.empty()) v.push_back(Scalar::zero(ctx));
    return PowerSeries(ctx, std::move(v), TailModel::polynomial());
}

PowerSeries PowerSeries::polynomial(const std::vector<Scalar>& coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("empty polynomial");
    return PowerSeries(coeffs.front().context(), coeffs, TailModel::polynomial());
}

PowerSeries PowerSeries::variable(const Ctx& ctx, int K) {
    if (K < 1) return polynomial(ctx, {0, 1});
    std::vector<Scalar> v(K + 1, exact_zero(ctx));
    v[0] = Scalar::zero(ctx);
    v[1] = Scalar::one(ctx);
    return PowerSeries(ctx, std::move(v), TailModel::polynomial());
}

PowerSeries PowerSeries::one_plus_x_power(const Ctx& ctx, const Rational& a, int K) {
    bool natural = a >= 0 && denominator(a) == 1 && a <= K;
    int top = natural ? static_cast<int>(numerator(a)) : K;
    std::vector<Scalar> v;
    v.reserve(top + 1);
    for (int n = 0; n <= top; ++n) v.push_back(padic_binomial(ctx, a, n));
    return PowerSeries(ctx, std::move(v), natural ? TailModel::polynomial() : TailModel::integral());
}

Scalar PowerSeries::coeff(int i) const {
    if (i < 0) throw std::out_of_range("negative coefficient index");
    if (i < static_cast<int>(coeffs_.size())) return coeffs_[i];
    if (tail_.exact) return exact_zero(ctx_);
    throw std::out_of_range("coefficient beyond the truncation order");
}

PowerSeries PowerSeries::truncated(int K) const {
    if (K >= truncation() && !tail_.exact) return *this;
    std::vector<Scalar> v;
    v.reserve(K + 1);
    for (int i = 0; i <= K; ++i) v.push_back(coeff(i));
    TailModel t = tail_;
    t.exact = false;
    return PowerSeries(ctx_, std::move(v), t);
}

PowerSeries PowerSeries::operator-() const {
    std::vector<Scalar> v;
    v.reserve(coeffs_.size());
    for (const auto& c : coeffs_) v.push_back(-c);
    return PowerSeries(ctx_, std::move(v), tail_);
}

PowerSeries operator+(const PowerSeries& a, const PowerSeries& b) {
    check_same(a, b);
    int K = joint_truncation(a, b, std::max(a.truncation(), b.truncation()));
    std::vector<Scalar> v;
    v.reserve(K + 1);
    for (int i = 0; i <= K; ++i) v.push_back(a.coeff(i) + b.coeff(i));
    return PowerSeries(a.ctx_, std::move(v), a.tail_.weaker(b.tail_));
}

PowerSeries operator-(const PowerSeries& a, const PowerSeries& b) { return a + (-b); }

PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
    check_same(a, b);
    int K = joint_truncation(a, b, a.truncation() + b.truncation());
    std::vector<Scalar> v(K + 1, exact_zero(a.ctx_));
    const int ka = std::min(a.truncation(), K);
    const int kb = std::min(b.truncation(), K);
    for (int i = 0; i <= ka; ++i) {
        if (a.coeffs_[i].is_zero() && a.coeffs_[i].precision_units() >= kExactZeroPrec) continue;
        for (int j = 0; j <= kb && i + j <= K; ++j) v[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return PowerSeries(a.ctx_, std::move(v), a.tail_.combine_product(b.tail_));
}

PowerSeries PowerSeries::scaled(const Scalar& c) const {
    std::vector<Scalar> v;
    v.reserve(coeffs_.size());
    for (const auto& x : coeffs_) v.push_back(x * c);
    TailModel t = tail_;
    double vc = c.is_zero() ? static_cast<double>(c.precision_units()) / c.context()->degree()
                            : val_double(c);
    t.bound -= vc;
    return PowerSeries(ctx_, std::move(v), t);
}

PowerSeries PowerSeries::shifted(int k) const {
    if (k < 0) throw std::invalid_argument("negative shift");
    std::vector<Scalar> v(k, exact_zero(ctx_));
    v.insert(v.end(), coeffs_.begin(), coeffs_.end());
    return PowerSeries(ctx_, std::move(v), tail_);
}

PowerSeries PowerSeries::compose(const PowerSeries& g) const {
    check_same(*this, g);
    if (!g.coeff(0).is_zero()) throw std::invalid_argument("compose: g(0) must vanish");
    for (const auto& c : g.coeffs_) {
        if (c.val_bound_units() < 0) throw std::invalid_argument("compose: g must be integral");
    }
    if (!g.tail_.exact && (g.tail_.bound > 0 || g.tail_.order > 0))
        throw std::invalid_argument("compose: g must have an integral tail");
    const int D = truncation();
    int K;
    if (tail_.exact && g.tail_.exact)
        K = D * g.truncation();
    else if (tail_.exact)
        K = g.truncation();
    else if (g.tail_.exact)
        K = D;
    else
        K = std::min(D, g.truncation());
    PowerSeries acc = PowerSeries::polynomial({coeffs_[D]});
    const PowerSeries gk = g.tail_.exact ? g : g.truncated(K);
    for (int i = D - 1; i >= 0; --i) {
        acc = acc * gk;
        if (acc.truncation() > K) acc = acc.truncated(K);
        std::vector<Scalar> v = acc.coeffs_;
        v[0] += coeffs_[i];
        acc = PowerSeries(ctx_, std::move(v), acc.tail_);
    }
    if (acc.truncation() < K) {
        // only happens for exact inputs of small degree
        std::vector<Scalar> v = acc.coeffs_;
        v.resize(K + 1, exact_zero(ctx_));
        acc = PowerSeries(ctx_, std::move(v), acc.tail_);
    }
    TailModel t = tail_;
    t.exact = tail_.exact && g.tail_.exact;
    return PowerSeries(ctx_, acc.coeffs_, t);
}

Scalar PowerSeries::evaluate(const Scalar& x) const {
    const Ctx& xc = x.context();
    const int e = xc->degree();
    double vx = static_cast<double>(x.val_bound_units()) / e;
    if (!(vx > 0)) throw std::invalid_argument("evaluate: needs val(x) > 0");
    const bool same = xc.get() == ctx_.get() || xc->same_field(*ctx_);
    auto lift = [&](const Scalar& c) { return same ? c : embed(c, xc); };
    Scalar acc = lift(coeffs_.back());
    for (int i = truncation() - 1; i >= 0; --i) acc = acc * x + lift(coeffs_[i]);
    double err = tail_min(tail_, truncation() + 1, vx, ctx_->prime());
    return acc.truncated(to_units(err, e));
}

PowerSeries PowerSeries::inverse(int K) const {
    if (K < 0) K = truncation();
    if (!tail_.exact) K = std::min(K, truncation());
    const Scalar& a0 = coeffs_[0];
    if (a0.is_zero() || a0.val_units() != 0)
        throw std::invalid_argument("inverse needs a unit constant term");
    Scalar inv0 = a0.inverse();
    std::vector<Scalar> b;
    b.reserve(K + 1);
    b.push_back(inv0);
    for (int n = 1; n <= K; ++n) {
        Scalar s = exact_zero(ctx_);
        for (int i = 1; i <= n; ++i) {
            if (i > truncation()) break;
            s += coeffs_[i] * b[n - i];
        }
        b.push_back(-(s * inv0));
    }
    TailModel t = tail_;
    t.exact = false;
    return PowerSeries(ctx_, std::move(b), t);
}

PowerSeries PowerSeries::pow(int n) const {
    if (n < 0) return inverse().pow(-n);
    PowerSeries r = PowerSeries::polynomial({Scalar::one(ctx_)});
    for (int i = 0; i < n; ++i) r = r * *this;
    return r;
}

bool PowerSeries::is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Scalar& c) { return c.is_zero(); });
}

bool PowerSeries::equals(const PowerSeries& other) const { return (*this - other).is_zero(); }

int PowerSeries::min_precision_units() const {
    int best = kExactZeroPrec;
    for (const auto& c : coeffs_) best = std::min(best, c.precision_units());
    return best;
}

// ---------------------------------------------------------------- phi, psi, gamma

namespace {

PowerSeries phi_of_x(const Ctx& ctx) {
    const std::int64_t p = ctx->prime();
    auto bt = binomial_table(*ctx, static_cast<int>(p));
    std::vector<std::int64_t> c(p + 1, 0);
    for (std::int64_t i = 1; i <= p; ++i) c[i] = (*bt)[p][i];
    return PowerSeries::polynomial(ctx, c);
}

}  // namespace

PowerSeries phi(const PowerSeries& f) { return f.compose(phi_of_x(f.context())); }

PowerSeries psi(const PowerSeries& f) {
    const Ctx& ctx = f.context();
    const std::int64_t p = ctx->prime();
    const int e = ctx->degree();
    const double slope = 1.0 / static_cast<double>(p);
    const double loss = static_cast<double>(p - 1) / static_cast<double>(p);
    // Coefficients known only to low precision do more harm than good: cut the
    // input where the tail estimate starts to beat them.
    int K = f.truncation();
    if (!f.is_exact()) {
        double prefix = kNoBound;
        double best = -kNoBound;
        int best_k = 0;
        for (int k = 0; k <= f.truncation(); ++k) {
            prefix = std::min(prefix, static_cast<double>(f[k].precision_units()) / e);
            double score = std::min(prefix, tail_min(f.tail(), k + 1, slope, p) - loss);
            if (score >= best) {
                best = score;
                best_k = k;
            }
        }
        K = best_k;
    }
    const int Kout = K / static_cast<int>(p);
    auto bt = binomial_table(*ctx, K);
    // coefficients of f in the basis (1+X)^l at the indices l = p j
    std::vector<Scalar> b;
    b.reserve(Kout + 1);
    for (int j = 0; j <= Kout; ++j) {
        const int l = static_cast<int>(p) * j;
        Scalar s = exact_zero(ctx);
        for (int i = l; i <= K; ++i) {
            std::int64_t c = (*bt)[i][l];
            s += f[i].mul_int(((i - l) % 2) ? -c : c);
        }
        b.push_back(s);
    }
    double base = tail_min(f.tail(), K + 1, slope, p) - loss;
    std::vector<Scalar> out;
    out.reserve(Kout + 1);
    for (int c = 0; c <= Kout; ++c) {
        Scalar s = exact_zero(ctx);
        for (int j = c; j <= Kout; ++j) s += b[j].mul_int((*bt)[j][c]);
        out.push_back(s.truncated(to_units(base - c, e)));
    }
    TailModel t = f.tail();
    if (!t.exact) t.bound += 1.5 * t.order;
    return PowerSeries(ctx, std::move(out), t);
}

namespace {

void require_unit(const Rational& a, std::int64_t p) {
    if (a == 0 || p_valuation(a, p) != 0) throw std::invalid_argument("gamma_act needs a p-adic unit");
}

PowerSeries gamma_of_x(const Ctx& ctx, const Rational& a, int K) {
    PowerSeries g = PowerSeries::one_plus_x_power(ctx, a, K);
    std::vector<Scalar> v = g.coeffs();
    v[0] = exact_zero(ctx);
    return PowerSeries(ctx, std::move(v), g.tail());
}

}  // namespace

PowerSeries gamma_act(const Rational& a, const PowerSeries& f) {
    require_unit(a, f.context()->prime());
    return f.compose(gamma_of_x(f.context(), a, f.truncation()));
}

PowerSeries gamma_act(const Scalar& a, const PowerSeries& f) {
    const Ctx& ctx = f.context();
    if (a.is_zero() || a.val_units() != 0) throw std::invalid_argument("gamma_act needs a p-adic unit");
    const int K = f.truncation();
    std::vector<Scalar> v;
    v.reserve(K + 1);
    v.push_back(exact_zero(ctx));
    for (int n = 1; n <= K; ++n) v.push_back(padic_binomial(a, n));
    return f.compose(PowerSeries(ctx, std::move(v), TailModel::integral()));
}

PowerSeries twisted_derivative(const PowerSeries& f, int j) {
    if (j < 0) throw std::invalid_argument("negative derivative order");
    PowerSeries g = f;
    for (int step = 0; step < j; ++step) {
        const int K = g.truncation();
        const int Kout = g.is_exact() ? K : K - 1;
        if (Kout < 0) throw std::out_of_range("derivative order exceeds the truncation");
        std::vector<Scalar> v;
        v.reserve(Kout + 1);
        for (int n = 0; n <= Kout; ++n) {
            Scalar s = g.coeff(n).mul_int(n);
            if (n + 1 <= K) s += g.coeff(n + 1).mul_int(n + 1);
            v.push_back(s);
        }
        TailModel t = g.tail();
        if (!t.exact) t.bound += t.order;
        g = PowerSeries(g.context(), std::move(v), t);
    }
    return g;
}

PowerSeries log_series(const Ctx& ctx, int K) {
    const std::int64_t p = ctx->prime();
    if (K >= 1 && floor_log(K, p) >= ctx->precision())
        throw PrecisionError("log_series: K >= p^N leaves no guaranteed digits");
    std::vector<Scalar> v;
    v.reserve(K + 1);
    v.push_back(exact_zero(ctx));
    for (int n = 1; n <= K; ++n) v.push_back(Scalar::from_rational(ctx, Rational(n % 2 ? 1 : -1, n)));
    return PowerSeries(ctx, std::move(v), TailModel::of_order(1.0));
}

// ---------------------------------------------------------------- Laurent slices

LaurentSlice::LaurentSlice(int neg, PowerSeries body, int capacity, int floor_units)
    : neg_(neg), body_(std::move(body)), capacity_(capacity), floor_(floor_units) {
    if (capacity_ < 0) capacity_ = std::max(neg_, body_.truncation());
    if (neg_ < 0) {
        body_ = body_.shifted(-neg_);
        neg_ = 0;
    }
    normalize();
}

void LaurentSlice::normalize() {
    if (floor_ < kExactZeroPrec) {
        std::vector<Scalar> v;
        v.reserve(body_.coeffs().size());
        for (const auto& c : body_.coeffs()) v.push_back(c.truncated(floor_));
        body_ = PowerSeries(body_.context(), std::move(v), body_.tail());
    }
    int drop = 0;
    while (drop < neg_ && drop < body_.truncation() && body_[drop].is_zero()) {
        floor_ = std::min(floor_, body_[drop].precision_units());
        ++drop;
    }
    if (drop > 0) {
        std::vector<Scalar> v(body_.coeffs().begin() + drop, body_.coeffs().end());
        body_ = PowerSeries(body_.context(), std::move(v), body_.tail());
        neg_ -= drop;
    }
    if (neg_ > capacity_)
        throw WindowOverflow("Laurent window overflow: exponent " + std::to_string(-neg_) +
                             " below -" + std::to_string(capacity_));
}

Scalar LaurentSlice::coeff(int exponent) const {
    if (exponent < -neg_) return Scalar::zero(body_.context(), floor_);
    return body_.coeff(exponent + neg_);
}

namespace {
int min_val_units(const PowerSeries& f) {
    int best = kExactZeroPrec;
    for (const auto& c : f.coeffs()) best = std::min(best, c.val_bound_units());
    return best;
}
int add_floor(int a, int b) {
    if (a >= kExactZeroPrec || b >= kExactZeroPrec) return kExactZeroPrec;
    return a + b;
}
}  // namespace

LaurentSlice operator+(const LaurentSlice& a, const LaurentSlice& b) {
    int M = std::max(a.neg_, b.neg_);
    return LaurentSlice(M, a.body_.shifted(M - a.neg_) + b.body_.shifted(M - b.neg_),
                        std::min(a.capacity_, b.capacity_), std::min(a.floor_, b.floor_));
}

LaurentSlice operator-(const LaurentSlice& a, const LaurentSlice& b) {
    return a + LaurentSlice(b.neg_, -b.body_, b.capacity_, b.floor_);
}

LaurentSlice operator*(const LaurentSlice& a, const LaurentSlice& b) {
    int fl = std::min(add_floor(a.floor_, min_val_units(b.body_)), add_floor(b.floor_, min_val_units(a.body_)));
    return LaurentSlice(a.neg_ + b.neg_, a.body_ * b.body_, std::min(a.capacity_, b.capacity_), fl);
}

bool LaurentSlice::equals(const LaurentSlice& other) const {
    int M = std::max(neg_, other.neg_);
    int fl = std::min(floor_, other.floor_);
    PowerSeries d = body_.shifted(M - neg_) - other.body_.shifted(M - other.neg_);
    return std::all_of(d.coeffs().begin(), d.coeffs().end(),
                       [&](const Scalar& c) { return c.truncated(fl).is_zero(); });
}

LaurentSlice phi(const LaurentSlice& f) {
    const int m = f.negative_order();
    if (m == 0) return LaurentSlice(0, phi(f.body()), f.capacity(), f.floor_units());
    const Ctx& ctx = f.context();
    const std::int64_t p = ctx->prime();
    const int e = ctx->degree();
    PowerSeries pg = phi(f.body());
    // phi(X)^{-1} = X^{-p} (1 + V(1/X))^{-1} with V(Y) = (1+Y)^p - 1 - Y^p, whose
    // coefficients are divisible by p; expand in Y = 1/X until the terms vanish.
    int minval = 0;
    int maxprec = 0;
    for (const auto& c : pg.coeffs()) {
        if (!c.is_zero()) minval = std::min(minval, c.val_units());
        maxprec = std::max(maxprec, std::min(c.precision_units(), e * (ctx->width() - 2)));
    }
    const int kmax = (maxprec - minval + e - 1) / e;
    const int D = static_cast<int>(p - 1) * kmax;
    auto bt = binomial_table(*ctx, static_cast<int>(p));
    std::vector<std::int64_t> vpoly(p, 0);
    vpoly[0] = 1;
    for (std::int64_t j = 1; j < p; ++j) vpoly[j] = (*bt)[p][j];
    PowerSeries one_plus_v = PowerSeries::polynomial(ctx, vpoly);
    PowerSeries inv = one_plus_v.pow(m).inverse(D);
    std::vector<Scalar> rev(inv.coeffs().rbegin(), inv.coeffs().rend());
    PowerSeries body = PowerSeries::polynomial(rev) * pg;
    const int cap = (e * (D + 1) + static_cast<int>(p) - 2) / static_cast<int>(p - 1) + minval;
    return LaurentSlice(static_cast<int>(p) * m + D, body, f.capacity(),
                        std::min(cap, add_floor(f.floor_units(), 0)));
}

LaurentSlice psi(const LaurentSlice& f) {
    const int m = f.negative_order();
    if (m == 0) return LaurentSlice(0, psi(f.body()), f.capacity(), f.floor_units());
    const Ctx& ctx = f.context();
    const std::int64_t p = ctx->prime();
    auto bt = binomial_table(*ctx, static_cast<int>(p));
    std::vector<std::int64_t> q(p, 0);
    for (std::int64_t i = 0; i < p; ++i) q[i] = (*bt)[p][i + 1];
    PowerSeries qm = PowerSeries::polynomial(ctx, q).pow(m);
    return LaurentSlice(m, psi(qm * f.body()), f.capacity(), f.floor_units());
}

LaurentSlice gamma_act(const Rational& a, const LaurentSlice& f) {
    const int m = f.negative_order();
    const Ctx& ctx = f.context();
    require_unit(a, ctx->prime());
    PowerSeries body = gamma_act(a, f.body());
    if (m == 0) return LaurentSlice(0, body, f.capacity(), f.floor_units());
    const int K = f.body().truncation() + 1;
    PowerSeries g = PowerSeries::one_plus_x_power(ctx, a, K).truncated(K);
    std::vector<Scalar> quot(g.coeffs().begin() + 1, g.coeffs().end());
    PowerSeries ratio(ctx, std::move(quot), TailModel::integral());
    return LaurentSlice(m, ratio.inverse().pow(m) * body, f.capacity(), f.floor_units());
}

// ---------------------------------------------------------------- norms and growth

DiskNorm disk_norm(const PowerSeries& f, const Rational& c) {
    DiskNorm out;
    const int e = f.context()->degree();
    for (int i = 0; i <= f.truncation(); ++i) {
        if (f[i].is_zero()) continue;
        Rational v = Rational(f[i].val_units(), e) + c * i;
        if (!out.value || v < *out.value) {
            out.value = v;
            out.argmin = i;
        }
    }
    if (!f.is_exact()) {
        double cd = static_cast<double>(numerator(c).convert_to<long double>() /
                                        denominator(c).convert_to<long double>());
        double tail = tail_min(f.tail(), f.truncation() + 1, cd, f.context()->prime());
        double best = out.value ? static_cast<double>(numerator(*out.value).convert_to<long double>() /
                                                      denominator(*out.value).convert_to<long double>())
                                : kNoBound;
        out.clipped = tail < best || (out.argmin >= 0 && out.argmin * 10 >= f.truncation() * 9);
    }
    return out;
}

DiskNorm gauss_norm(const LaurentSlice& f) {
    DiskNorm out;
    const auto& body = f.body();
    const int e = f.context()->degree();
    for (int i = 0; i <= body.truncation(); ++i) {
        if (body[i].is_zero()) continue;
        Rational v(body[i].val_units(), e);
        if (!out.value || v < *out.value) {
            out.value = v;
            out.argmin = i - f.negative_order();
        }
    }
    if (!body.is_exact()) {
        double tail = body.tail().lower(body.truncation() + 1, f.context()->prime());
        double best = out.value ? static_cast<double>(numerator(*out.value).convert_to<long double>() /
                                                      denominator(*out.value).convert_to<long double>())
                                : kNoBound;
        out.clipped = tail < best;
    }
    return out;
}

std::string to_string(GrowthVerdict v) {
    return v == GrowthVerdict::growing ? "growing" : "bounded-so-far";
}

OrderEstimate order_r_estimate(const PowerSeries& f, double r, const OrderThresholds& th) {
    const std::int64_t p = f.context()->prime();
    const int K = f.truncation();
    const int head = static_cast<int>(std::floor((1.0 - th.tail_fraction) * K));
    double sup_head = -kNoBound;
    double sup_all = -kNoBound;
    for (int n = 0; n <= K; ++n) {
        if (f[n].is_zero()) continue;
        double s = -val_double(f[n]) - r * log_p(n + 1.0, p);
        sup_all = std::max(sup_all, s);
        if (n <= head) sup_head = std::max(sup_head, s);
    }
    OrderEstimate out;
    if (sup_all == -kNoBound) return out;
    out.sup = sup_all;
    if (sup_head == -kNoBound) {
        out.slope = 0.0;
    } else {
        double span = log_p(K + 1.0, p) - log_p(head + 1.0, p);
        out.slope = span > 0 ? (sup_all - sup_head) / span : 0.0;
    }
    out.verdict = out.slope > th.slope_tolerance ? GrowthVerdict::growing : GrowthVerdict::bounded_so_far;
    return out;
}

// ---------------------------------------------------------------- phi^{-m}

TSeries phi_inverse_m(const PowerSeries& f, int m, int T) {
    const Ctx& base = f.context();
    if (base->degree() != 1) throw ContextMismatch("phi_inverse_m expects coefficients in Q_p");
    if (m < 1 || T < 0) throw std::invalid_argument("phi_inverse_m needs m >= 1, T >= 0");
    const std::int64_t p = base->prime();
    TSeries out;
    out.ctx = PadicContext::cyclotomic(p, base->precision(), m);
    out.T = T;
    const Ctx& L = out.ctx;
    const int e = L->degree();
    // exp(t/p^m) - 1
    std::vector<Scalar> ex(T + 1, exact_zero(L));
    {
        BigInt fact = 1;
        BigInt pm = int_pow(BigInt(p), static_cast<unsigned>(m));
        BigInt den = 1;
        for (int n = 1; n <= T; ++n) {
            fact *= n;
            den *= pm;
            ex[n] = Scalar::from_rational(L, Rational(BigInt(1), fact * den));
        }
    }
    const std::int64_t order = static_cast<std::int64_t>(int_pow(BigInt(p), static_cast<unsigned>(m)));
    const Scalar zeta = primitive_root(L);
    const int K = f.truncation();
    double err0 = tail_min(f.tail(), K + 1, 1.0 / e, p);
    std::vector<Scalar> coeffs;
    for (const auto& c : f.coeffs()) coeffs.push_back(embed(c, L));
    for (std::int64_t c = 1; c < order; ++c) {
        if (c % p == 0) continue;
        Scalar zc = zeta.pow(c);
        std::vector<Scalar> u(T + 1);
        u[0] = zc - Scalar::one(L);
        for (int n = 1; n <= T; ++n) u[n] = zc * ex[n];
        std::vector<Scalar> acc(T + 1, exact_zero(L));
        acc[0] = coeffs[K];
        for (int i = K - 1; i >= 0; --i) {
            std::vector<Scalar> next(T + 1, exact_zero(L));
            for (int a = 0; a <= T; ++a) {
                if (acc[a].is_zero() && acc[a].precision_units() >= kExactZeroPrec) continue;
                for (int b = 0; a + b <= T; ++b) next[a + b] += acc[a] * u[b];
            }
            next[0] += coeffs[i];
            acc = std::move(next);
        }
        for (int j = 0; j <= T; ++j) {
            double err = err0 - static_cast<double>(j) / e -
                         j * (m + 1.0 / static_cast<double>(p - 1));
            acc[j] = acc[j].truncated(to_units(err, e));
        }
        out.embeddings.push_back(c);
        out.rows.push_back(std::move(acc));
    }
    return out;
}

}  // namespace padic
