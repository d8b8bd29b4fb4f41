#pragma once

#include "padic/series.hpp"

#include <string>
#include <vector>

namespace padic {

// f(z) = sum a_n binom(z, n) on Z_p, with a claimed regularity class r.
struct MahlerFunction {
    Ctx ctx;
    std::vector<Scalar> coeffs;
    double r = 0.0;
};

// Forward differences of f(0), ..., f(K).
MahlerFunction mahler_coeffs(const std::vector<Scalar>& values, double r = 0.0);
Scalar eval_mahler(const MahlerFunction& f, const Rational& z);

struct NormEstimate {
    double log_norm = 0.0;  // log_p of sup (n+1)^r |a_n| over the window
    double slope = 0.0;
    GrowthVerdict verdict = GrowthVerdict::bounded_so_far;
    int argmax = -1;
};
NormEstimate cr_norm(const MahlerFunction& f, double r, const OrderThresholds& th = {});

// A distribution of order r stored through its transform sum mu(binom(z,n)) X^n.
struct AmiceDistribution {
    PowerSeries transform;
    double order = 0.0;
};

AmiceDistribution dirac(const Ctx& ctx, const Rational& c, int K);
// The functional f -> f^{(i)}(c) / i!; its transform is (1+X)^c log(1+X)^i / i!.
AmiceDistribution dirac_derivative(const Ctx& ctx, const Rational& c, int i, int K);

// Integral of (z - a)^j over a + p^n Z_p.
Scalar moment(const AmiceDistribution& mu, const Rational& a, int n, int j);

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

struct MomentWitness {
    Rational a;
    int n = 0;
    int j = 0;
};

struct AmiceCheck {
    Verdict verdict = Verdict::pass;
    // min over the sweep of val(moment) - n(j - r); a lower bound when the
    // binding moment vanished at precision
    Rational margin;
    bool margin_exact = true;
    MomentWitness witness;
    int inconclusive_count = 0;
};

struct AmiceOptions {
    Rational r = 1;
    int d = 1;
    int n_max = 3;
    Rational c_val = 0;  // valuation of the constant C
    int band = 0;        // margins in [c_val - band, c_val) are inconclusive
};

// Checks val(int_{a+p^nZ_p} (z-a)^j dmu) >= val(C) + n(j - r) for a mod p^n,
// n <= n_max, j <= d.
AmiceCheck amice_velu_check(const AmiceDistribution& mu, const AmiceOptions& opt);

// Locally polynomial function: pieces 1_{a + p^n Z_p}(z) sum_i lambda_i (z - a)^i.
struct LocPolyPiece {
    Rational center;
    int level = 0;
    std::vector<Rational> coeffs;
};

enum class Domain { zp, qp };

struct LocPolyFunction {
    Domain domain = Domain::zp;
    std::vector<LocPolyPiece> pieces;

    // Throws std::invalid_argument on overlapping cosets or pieces outside Z_p.
    void validate(std::int64_t p) const;
    Rational evaluate(const Rational& z, std::int64_t p) const;
};

// Lines "a n : l0 l1 ... ld"; '#' starts a comment.
LocPolyFunction parse_locpoly(const std::string& text, std::int64_t p, Domain domain = Domain::zp);
std::string format_locpoly(const LocPolyFunction& f, std::int64_t p);

Scalar integrate_locpoly(const AmiceDistribution& mu, const LocPolyFunction& f);

// True when a + p^n Z_p and b + p^m Z_p intersect.
bool cosets_meet(const Rational& a, int n, const Rational& b, int m, std::int64_t p);

// Coset representative of a modulo p^n in (-p^n, 0].
BigInt nonpositive_representative(const Rational& a, int n, std::int64_t p);

}  // namespace padic
