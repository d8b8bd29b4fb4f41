#pragma once

#include "padic/scalar.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace padic {

// What is known about the coefficients beyond the truncation order K.
// exact: there are none (the series is a polynomial).
// Otherwise val(a_d) >= -bound - order * log_p(d + 1) for every d > K.
struct TailModel {
    bool exact = false;
    double bound = 0.0;
    double order = 0.0;

    static TailModel polynomial() { return {true, 0.0, 0.0}; }
    static TailModel integral() { return {false, 0.0, 0.0}; }
    static TailModel of_order(double order, double bound = 0.0) { return {false, bound, order}; }

    // Lower bound for val(a_d), d beyond the window.
    double lower(std::int64_t d, std::int64_t p) const;
    TailModel combine_product(const TailModel& other) const;
    TailModel weaker(const TailModel& other) const;
};

// f = sum_{i <= K} a_i X^i + O(X^{K+1}), coefficients in a common context.
class PowerSeries {
public:
    PowerSeries() = default;
    PowerSeries(Ctx ctx, std::vector<Scalar> coeffs, TailModel tail);

    static PowerSeries zero(const Ctx& ctx, int K);
    static PowerSeries constant(const Scalar& c, int K);
    static PowerSeries polynomial(const Ctx& ctx, const std::vector<std::int64_t>& coeffs);
    static PowerSeries polynomial(const std::vector<Scalar>& coeffs);
    static PowerSeries variable(const Ctx& ctx, int K);  // X
    // (1+X)^a for a rational p-adic integer, truncated at K (exact when a is a natural number).
    static PowerSeries one_plus_x_power(const Ctx& ctx, const Rational& a, int K);

    const Ctx& context() const { return ctx_; }
    int truncation() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<Scalar>& coeffs() const { return coeffs_; }
    const Scalar& operator[](int i) const { return coeffs_.at(i); }
    Scalar coeff(int i) const;  // zero beyond an exact polynomial's degree
    const TailModel& tail() const { return tail_; }
    bool is_exact() const { return tail_.exact; }

    PowerSeries truncated(int K) const;
    PowerSeries operator-() const;
    friend PowerSeries operator+(const PowerSeries& a, const PowerSeries& b);
    friend PowerSeries operator-(const PowerSeries& a, const PowerSeries& b);
    friend PowerSeries operator*(const PowerSeries& a, const PowerSeries& b);
    PowerSeries scaled(const Scalar& c) const;
    PowerSeries shifted(int k) const;  // multiplication by X^k

    // Composition with g, g(0) = 0 (valuation of g's constant term zero at precision).
    PowerSeries compose(const PowerSeries& g) const;
    // Value at x with val(x) > 0, precision capped by the tail bound.
    Scalar evaluate(const Scalar& x) const;

    // Inverse of a series with unit constant term, to order K (default: own window).
    PowerSeries inverse(int K = -1) const;
    PowerSeries pow(int n) const;

    // Every coefficient zero at its own precision on the common window.
    bool is_zero() const;
    // Coefficientwise comparison on the common window.
    bool equals(const PowerSeries& other) const;
    // Smallest coefficient precision (pi-units) on the window.
    int min_precision_units() const;

private:
    Ctx ctx_;
    std::vector<Scalar> coeffs_;
    TailModel tail_;
};

// Raised when a Laurent window cannot hold a result.
class WindowOverflow : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// X^{-neg} * body: an element of O_E,L (or E_L) restricted to the window
// [-capacity, upper]. Negative tails produced by phi and psi are p-adically
// small; they are kept while nonzero at precision, and a nonzero coefficient
// below -capacity raises WindowOverflow.
class LaurentSlice {
public:
    LaurentSlice() = default;
    // floor_units: the dropped coefficients left of the window all have
    // valuation at least this many pi-units.
    LaurentSlice(int neg, PowerSeries body, int capacity = -1, int floor_units = Scalar::kInfinite / 2);

    int negative_order() const { return neg_; }
    int capacity() const { return capacity_; }
    int floor_units() const { return floor_; }
    const PowerSeries& body() const { return body_; }
    int upper() const { return body_.truncation() - neg_; }
    const Ctx& context() const { return body_.context(); }
    bool is_exact() const { return body_.is_exact(); }

    Scalar coeff(int exponent) const;

    friend LaurentSlice operator+(const LaurentSlice& a, const LaurentSlice& b);
    friend LaurentSlice operator-(const LaurentSlice& a, const LaurentSlice& b);
    friend LaurentSlice operator*(const LaurentSlice& a, const LaurentSlice& b);

    bool equals(const LaurentSlice& other) const;

private:
    void normalize();

    int neg_ = 0;
    PowerSeries body_;
    int capacity_ = 0;
    int floor_ = Scalar::kInfinite / 2;
};

// Coefficients in L_m[[t]] mod t^{T+1}, one row per embedding zeta -> zeta^c.
struct TSeries {
    Ctx ctx;                              // cyclotomic context of level m
    std::vector<std::int64_t> embeddings;  // exponents c prime to p, 1 <= c < p^m
    std::vector<std::vector<Scalar>> rows;
    int T = 0;
};

// ---- operators

PowerSeries phi(const PowerSeries& f);
PowerSeries psi(const PowerSeries& f);
LaurentSlice phi(const LaurentSlice& f);
LaurentSlice psi(const LaurentSlice& f);

// X -> (1+X)^a - 1 for an exact unit a.
PowerSeries gamma_act(const Rational& a, const PowerSeries& f);
LaurentSlice gamma_act(const Rational& a, const LaurentSlice& f);
// Same with a given only at finite precision; binomials lose val(n!) digits.
PowerSeries gamma_act(const Scalar& a, const PowerSeries& f);

// (1+X) d/dX applied j times.
PowerSeries twisted_derivative(const PowerSeries& f, int j);

// log(1+X) truncated at K.
PowerSeries log_series(const Ctx& ctx, int K);

struct DiskNorm {
    // min_i (val(a_i) + i*c), i.e. -log_p of the sup norm on |X| <= p^{-c}
    std::optional<Rational> value;  // empty when the window is zero at precision
    int argmin = -1;
    bool clipped = false;
};
DiskNorm disk_norm(const PowerSeries& f, const Rational& c);
// Gauss norm (c = 0) of a Laurent slice.
DiskNorm gauss_norm(const LaurentSlice& f);

enum class GrowthVerdict { bounded_so_far, growing };
std::string to_string(GrowthVerdict v);

struct OrderEstimate {
    double sup = 0.0;  // sup_n (-val(a_n) - r log_p(n+1))
    double slope = 0.0;
    GrowthVerdict verdict = GrowthVerdict::bounded_so_far;
};
struct OrderThresholds {
    double tail_fraction = 1.0 / 3.0;
    double slope_tolerance = 0.1;
};
OrderEstimate order_r_estimate(const PowerSeries& f, double r, const OrderThresholds& th = {});

// f(zeta^c exp(t/p^m) - 1) mod t^{T+1} for every embedding c.
TSeries phi_inverse_m(const PowerSeries& f, int m, int T);

// ---- helpers shared with later modules

// Binomial coefficients modulo p^W, rows 0..n at least. Snapshots are immutable.
using BinomialTable = std::vector<std::vector<std::int64_t>>;
std::shared_ptr<const BinomialTable> binomial_table(const PadicContext& ctx, int n);
double log_p(double x, std::int64_t p);
// min over d > K of (tail lower bound at d) + slope*d; huge for exact polynomials.
double tail_floor(const PowerSeries& f, double slope);

}  // namespace padic
