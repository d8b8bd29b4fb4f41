#pragma once

#include "padic/crystalline.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace padic {

// rho = p alpha / beta, the twist at infinity of the alpha model.
Rational chart_twist(const FilteredPhiModule& mod);
// The same module with alpha and beta exchanged, unvalidated. Used for the beta side.
FilteredPhiModule swap_sides(const FilteredPhiModule& mod);

struct GL2Element {
    Rational a = 1, b = 0, c = 0, d = 1;

    Rational det() const { return a * d - b * c; }
    GL2Element operator*(const GL2Element& o) const;
    GL2Element inverse() const;
    bool operator==(const GL2Element& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }

    static GL2Element identity() { return {}; }
    static GL2Element scalar(const Rational& x) { return {x, 0, 0, x}; }
    static GL2Element chart_swap(std::int64_t p) { return {0, Rational(p), 1, 0}; }
    static GL2Element diag(const Rational& x) { return {1, 0, 0, x}; }
    static GL2Element unipotent(const Rational& x) { return {1, x, 0, 1}; }
};

enum class GeneratorKind { scalar, chart_swap, diag, unipotent };
std::string to_string(GeneratorKind k);

struct Generator {
    GeneratorKind kind = GeneratorKind::scalar;
    Rational lambda = 1;
    GL2Element matrix(std::int64_t p) const;
};

// g = factors[0] * factors[1] * ... by row reduction. Throws on det = 0.
std::vector<Generator> bruhat_factor(const GL2Element& g, std::int64_t p);

// Exact chart values: chart 1 or 2, argument in Z_p.
using ChartSource = std::function<Scalar(int chart, const Rational& w)>;

// f on Q_p through f_1(z) = f(pz) and f_2(z) = rho^{val z} z^{k-2} f(1/z).
struct BanachFunctionPair {
    FilteredPhiModule mod;
    Ctx ctx;
    MahlerFunction f1, f2;
    // When present, chart values come from here instead of the truncated
    // Mahler sums, which have no tail bound off the sample points.
    ChartSource source;

    Scalar chart_value(int chart, const Rational& w) const;
    Scalar value(const Rational& z) const;
    // rho^{val u} u^{k-2} f(v/u), extended to u = 0 through the second chart.
    Scalar homogeneous(const Rational& u, const Rational& v) const;
    NormEstimate chart_norm(int chart) const;
    double norm() const;  // log_p max(|f_1|_r, |f_2|_r), r = val(alpha)
};

BanachFunctionPair sample_pair(const FilteredPhiModule& mod, const Ctx& ctx, ChartSource source, int K);
BanachFunctionPair pair_from_charts(const FilteredPhiModule& mod, MahlerFunction f1, MahlerFunction f2);

Scalar gl2_act_point(const GL2Element& g, const BanachFunctionPair& f, const Rational& z);

struct ActedPair {
    BanachFunctionPair pair;
    std::vector<Generator> factors;
    double norm_in = 0.0;
    double norm_out = 0.0;
    double ratio = 0.0;  // norm_out - norm_in, log_p
};
// Acts through the Bruhat factors, then resamples both charts on 0..K.
ActedPair gl2_act_pair(const GL2Element& g, const BanachFunctionPair& f, int K);

enum class LAlphaKind { monomial, translate };

struct LAlphaGenerator {
    LAlphaKind kind = LAlphaKind::monomial;
    Rational center = 0;
    int j = 0;
    BanachFunctionPair pair;
    NormEstimate norm1, norm2;
};
// z^j, or rho^{val(z-a)} (z-a)^{k-2-j} extended by 0 at a. Requires 0 <= j < val(alpha).
LAlphaGenerator lalpha_generator(const FilteredPhiModule& mod, const Ctx& ctx, LAlphaKind kind, const Rational& a,
                                 int j, int K);

struct TailPairing {
    int n = 0;
    Scalar value;        // rho^n (int_{p^n Z_p} - int_{p^{n+1} Z_p}) z^{k-2-j} dmu
    Rational required;   // c_val + n (val(alpha) - j)
    bool ok = true;
};
struct TailDecayReport {
    Rational c_val;  // Amice constant of mu at r = val(alpha), d = k-2
    std::vector<TailPairing> pieces;
    bool ok = true;
};
// The pieces f_{n+1} - f_n of the a = 0 translate generator against mu on Z_p.
TailDecayReport lalpha_tail_decay(const FilteredPhiModule& mod, const AmiceDistribution& mu, int j, int n_max);

// ---- smooth principal series

struct SmoothPiece {
    Rational center;
    int level = 0;
    Rational value;
};

// coeff * sigma^{val x} on val x < bound (below) or val x >= bound (above),
// sigma = p beta / alpha. Only used for non-compact inputs of the intertwiner.
struct RadialTail {
    Rational coeff;
    int bound = 0;
    bool below = true;
};

struct SmoothCompactFunction {
    std::vector<SmoothPiece> pieces;
    std::vector<RadialTail> tails;

    bool compact() const { return tails.empty(); }
    Rational evaluate(const Rational& x, const FilteredPhiModule& mod) const;
    // h-hat(0) = integral of h for the Haar measure with mass 1 on Z_p.
    Rational total_mass(std::int64_t p) const;
};

class DivergentParameter : public std::domain_error {
public:
    DivergentParameter(const std::string& what, Rational ratio)
        : std::domain_error(what), ratio_(std::move(ratio)) {}
    const Rational& ratio() const { return ratio_; }

private:
    Rational ratio_;
};

// I(z^j h)(z) = z^j * int rho^{val(z-x)} h(x) dx, geometric series summed in closed form.
Rational intertwine_at(const FilteredPhiModule& mod, const SmoothCompactFunction& h, int j, const Rational& z);

struct IntertwinerImage {
    int j = 0;
    std::vector<SmoothPiece> pieces;  // I(h) on the cosets of level `fine` inside p^{window} Z_p
    Rational outer_mass;              // I(h)(z) = rho^{val z} outer_mass for val z < window
    int window = 0;
    int fine = 0;
    bool compact_support = false;     // true iff outer_mass = 0
};
// h must be compact; its pieces must lie in p^{window} Z_p with levels <= fine.
IntertwinerImage smooth_intertwiner(const FilteredPhiModule& mod, const SmoothCompactFunction& h, int j, int window,
                                    int fine);

// Action of a Borel element [[a, b], [0, d]] on the beta-side smooth model:
// (g h)(x) = beta^{-val(ad)} sigma^{val a} h((d x - b) / a).
SmoothCompactFunction smooth_act(const FilteredPhiModule& mod, const GL2Element& g, const SmoothCompactFunction& h);
// Same formula on the alpha side for a function given pointwise, times z^j weights absorbed by the caller.
Rational smooth_act_point(const FilteredPhiModule& mod, const GL2Element& g,
                          const std::function<Rational(const Rational&)>& f, const Rational& z);

struct ReadingTally {
    int agree = 0;
    int disagree = 0;
    std::string first_mismatch;
};

struct IdentityReport {
    int j = 0;
    int samples = 0;
    ReadingTally closed_a, closed_b;  // compact identity, readings (1 - 1_{Z_p}) and (z - 1_{Z_p})
    ReadingTally open_a, open_b;      // non-compact identity, readings (1 - 1_{pZ_p}) and (z - 1_{pZ_p})
    std::string reading;              // "one-minus-indicator", "z-minus-indicator" or "none"
    bool pass = false;
};
IdentityReport intertwiner_identity_check(const FilteredPhiModule& mod, int j, std::uint64_t seed, int samples = 100);

// ---- dual side

// sum_i poly[i] (w - center)^i on center + p^level Z_p inside chart 1 or 2.
struct ChartPiece {
    int chart = 1;
    Rational center;
    int level = 0;
    std::vector<Rational> poly;
};

// Chart pieces of sum_i poly[i] (z - c)^i on the Q_p-coset c + p^n Z_p (poly degree <= k-2).
std::vector<ChartPiece> coset_to_charts(const FilteredPhiModule& mod, const Rational& c, int n,
                                        const std::vector<Rational>& poly);

// A locally polynomial function on P^1(Q_p): compact coset pieces, plus optionally
// sum_i far_poly[i] rho^{val z} z^{k-2-i} on {val z <= -far_level} and infinity
// (in the second chart this is sum_i far_poly[i] w^i on p^{far_level} Z_p).
struct QpTestFunction {
    std::vector<LocPolyPiece> pieces;
    int far_level = -1;  // negative: no part at infinity
    std::vector<Rational> far_poly;
};

std::vector<ChartPiece> to_chart_pieces(const FilteredPhiModule& mod, const QpTestFunction& f);

using QpFunctional = std::function<Scalar(const QpTestFunction&)>;

// Functional given by two order-r distributions on the charts.
QpFunctional chart_pair_functional(const FilteredPhiModule& mod, const AmiceDistribution& mu1,
                                   const AmiceDistribution& mu2);

// 1_{a + p^n Z_p}(z) (z - a)^j.
QpTestFunction near_function(const FilteredPhiModule& mod, const Rational& a, int n, int j);
// 1_{Q_p - (a + p^n Z_p)}(z) rho^{val(z-a)} (z - a)^{k-2-j}, including the point at infinity.
QpTestFunction far_function(const FilteredPhiModule& mod, const Rational& a, int n, int j);

struct DualWitness {
    std::string condition;
    Rational a;
    int n = 0;
    int j = 0;
};

struct DualOptions {
    Rational c_val = 0;  // val(C)
    int n_max = 3;
    int window = 3;      // centers run over p^{-window} Z_p modulo p^n
};

struct DualConditionsReport {
    Verdict verdict = Verdict::pass;
    Verdict annihilation = Verdict::pass;
    Rational margin;  // min of val(integral) - required over conclusive entries
    bool has_margin = false;
    DualWitness witness;
    int checked = 0;
    int inconclusive_count = 0;
};

DualConditionsReport dual_conditions_check(const FilteredPhiModule& mod, const QpFunctional& mu,
                                           const DualOptions& opt);

// ---- distributions on Q_p

// mu_n restricts to p^{-n} Z_p after rescaling into Z_p; levels first..top.
struct CompactQpDistribution {
    Rational eigenvalue;
    bool alpha_side = true;
    int first = 0;
    std::vector<AmiceDistribution> levels;

    int top() const { return first + static_cast<int>(levels.size()) - 1; }
    // Levels below `first` come from psi pushforward. Throws std::out_of_range above top.
    AmiceDistribution level(int n) const;
};

class SupportExceedsWindow : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

Scalar integrate_qp(const CompactQpDistribution& mu, const LocPolyFunction& f, std::int64_t p);
// Same at a forced level N (must be admissible).
Scalar integrate_qp_at(const CompactQpDistribution& mu, const LocPolyFunction& f, std::int64_t p, int N);

// int_{p^{-N} Z_p} z^j e(z y) dmu in the cyclotomic field of level N - val y.
Scalar fourier_integral(const CompactQpDistribution& mu, const Rational& y, int N, int j, std::int64_t p);

struct FourierReport {
    Verdict verdict = Verdict::pass;
    Scalar lhs, rhs;  // beta side, (beta/alpha)^{val y} times the alpha side
    double digits = 0.0;
    int level = 0;
};

struct FourierOptions {
    double min_digits = 1.0;
};

FourierReport fourier_condition_check(const FilteredPhiModule& mod, const CompactQpDistribution& mu_alpha,
                                      const CompactQpDistribution& mu_beta, const Rational& y, int N, int j,
                                      const FourierOptions& opt = {});

}  // namespace padic
