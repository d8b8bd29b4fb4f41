#pragma once

#include "padic/mahler.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace padic {

// Raised by make_module; kind() is "not-admissible" or "not-irreducible".
class ModuleError : public std::invalid_argument {
public:
    ModuleError(std::string kind, const std::string& what)
        : std::invalid_argument(what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

// D(alpha, beta): phi(e_alpha) = alpha^{-1} e_alpha, phi(e_beta) = beta^{-1} e_beta,
// Fil^{k-1} spanned by e_alpha + e_beta. alpha and beta are rationals.
struct FilteredPhiModule {
    std::int64_t p = 3;
    int k = 3;
    Rational alpha = 3;
    Rational beta = 6;

    Rational val_alpha() const { return p_valuation(alpha, p); }
    Rational val_beta() const { return p_valuation(beta, p); }
    double r_alpha() const;
    double r_beta() const;
    int h() const { return k - 1; }
};

FilteredPhiModule make_module(std::int64_t p, int k, const Rational& alpha, const Rational& beta);

struct AdmissibilityReport {
    Rational tN_det, tH_det;
    Rational gap_alpha, gap_beta;  // t_N - t_H on the two phi-stable lines
    bool admissible = false;
};
AdmissibilityReport admissibility(const FilteredPhiModule& mod);

// w_alpha e_alpha + w_beta e_beta.
struct WachVector {
    PowerSeries alpha;
    PowerSeries beta;

    const Ctx& context() const { return alpha.context(); }
    WachVector operator+(const WachVector& o) const { return {alpha + o.alpha, beta + o.beta}; }
    WachVector operator-(const WachVector& o) const { return {alpha - o.alpha, beta - o.beta}; }
    WachVector times(const PowerSeries& f) const { return {alpha * f, beta * f}; }
    WachVector scaled(const Scalar& c) const { return {alpha.scaled(c), beta.scaled(c)}; }
    WachVector truncated(int K) const { return {alpha.truncated(K), beta.truncated(K)}; }
    bool equals(const WachVector& o) const { return alpha.equals(o.alpha) && beta.equals(o.beta); }
    bool is_zero() const { return alpha.is_zero() && beta.is_zero(); }
};

WachVector coord_phi(const FilteredPhiModule& mod, const WachVector& v);
WachVector coord_psi(const FilteredPhiModule& mod, const WachVector& v);
WachVector coord_gamma(const Rational& a, const WachVector& v);

struct Fil0Entry {
    int m = 0;
    std::int64_t embedding = 0;
    int j = 0;
    Scalar delta;
};

struct Fil0Options {
    // a vanishing residue is conclusive once known to this many digits
    double min_digits = 1.0;
    // integer valuations make the head/tail comparison jitter by up to one
    // digit, so membership only flags gross order violations
    OrderThresholds order{1.0 / 3.0, 3.0};
};

struct Fil0Report {
    int m = 0;
    Verdict verdict = Verdict::pass;                // from the binomial sums
    Verdict decomposition_verdict = Verdict::pass;  // from the expansion in t
    std::vector<Fil0Entry> residues;
    double min_digits = 0.0;  // smallest precision among the residues, in val units
    std::string witness;      // first failing or weakest entry
};

Fil0Report fil0_test(const FilteredPhiModule& mod, const WachVector& v, int m, const Fil0Options& opt = {});

struct MembershipReport {
    Verdict verdict = Verdict::pass;
    OrderEstimate order_alpha, order_beta;
    std::vector<Fil0Report> levels;  // m = 1..depth
    bool depth_changed = false;      // the Fil^0 verdicts differ between depths
};

MembershipReport wach_membership(const FilteredPhiModule& mod, const WachVector& v, int depth,
                                 const Fil0Options& opt = {});

// N-hat = M (R^+)^2 with M = Lambda phi(M) Q, Lambda = diag(1/alpha, 1/beta),
// Q = [[0, -u], [q^h, a]], q = phi(X)/X, u = alpha beta / p^h.
struct WachBasis {
    FilteredPhiModule mod;
    Rational ratio;                // row scaling of M(0) between the two eigenlines
    Rational u;
    std::vector<Rational> a;       // polynomial entry of Q
    std::vector<Rational> q_pow;   // q^h
    std::array<std::array<PowerSeries, 2>, 2> matrix;  // rows alpha, beta; columns basis

    WachVector column(int b) const { return {matrix[0][b], matrix[1][b]}; }
    WachVector apply(const PowerSeries& f0, const PowerSeries& f1) const;
};

// Solves for Q and M (to X^K, coefficients in ctx). Throws std::domain_error
// for parameters where no integral Q is found or the recursion is resonant.
WachBasis wach_basis(const FilteredPhiModule& mod, const Ctx& ctx, int K);

// Submodule of ((Z/p^j)[X]/X^K)^2, kept in Howell form. Coordinate c*K + d is
// the X^d coefficient of component c.
class LatticeApprox {
public:
    LatticeApprox() = default;
    LatticeApprox(std::int64_t p, int j, int K);

    std::int64_t prime() const { return p_; }
    int level() const { return j_; }
    int truncation() const { return K_; }
    std::int64_t modulus() const { return mod_; }
    int dimension() const { return 2 * K_; }

    void insert(std::vector<std::int64_t> v);
    // inserts v and all its X-multiples
    void insert_module(const std::vector<std::int64_t>& v);
    bool contains(std::vector<std::int64_t> v) const;
    bool contains(const LatticeApprox& other) const;
    bool operator==(const LatticeApprox& other) const;
    // log_p of the cardinality
    int log_size() const;
    const std::vector<std::vector<std::int64_t>>& rows() const { return rows_; }
    // dimension over Z/p of each X-degree slice of S / pS restricted to degree d (both components)
    std::vector<int> graded_ranks() const;

private:
    int val(std::int64_t x) const;
    std::int64_t p_ = 3;
    int j_ = 1;
    int K_ = 1;
    std::int64_t mod_ = 3;
    std::vector<std::vector<std::int64_t>> rows_;
    std::vector<int> pivot_;
};

struct LatticeSolution {
    WachBasis basis;
    LatticeApprox lattice;  // all of N-hat mod (p^j, X^K), in N-coordinates
    std::vector<MembershipReport> certificates;  // basis columns through wach_membership
    bool contains_Xh_basis = false;
};

LatticeSolution solve_wach_lattice(const FilteredPhiModule& mod, const Ctx& ctx, int j, int K, int depth,
                                   int series_K = 60);

class NoStabilization : public std::runtime_error {
public:
    NoStabilization(const std::string& what, std::vector<int> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<int>& trace() const { return trace_; }

private:
    std::vector<int> trace_;
};

struct DSharpResult {
    LatticeApprox dsharp;
    int steps = 0;               // iterations until psi(S) = S
    std::vector<int> sizes;      // log_p |S_i|
    bool monotone = true;        // S_i inside S_{i+1} throughout
    bool contains_XhN = false;
    bool inside_N = false;
    bool psi_surjective = false;
};

// psi in N-coordinates: f -> psi(Q f), on polynomials modulo p^j.
std::array<std::vector<std::int64_t>, 2> lattice_psi(const WachBasis& basis, std::int64_t modulus,
                                                      const std::array<std::vector<std::int64_t>, 2>& f);

DSharpResult dsharp_iterate(const LatticeSolution& sol, int h, int budget = 10);

struct FixedPoint {
    WachVector y;
    WachVector z;
    WachVector residual;  // coord_psi(z) - z
    bool verified = false;
    bool nonzero = false;
    // psi costs one digit per degree, so the check is reported on the prefix
    // 0..window where every residual coefficient is known to >= 1 digit
    int window = -1;
    double digits = 0.0;  // smallest residual precision on that prefix
};

// z = sum_{j <= J} coord_phi^j(y), y = (1+X) coord_phi(X^{h+1} x).
FixedPoint psi_fixed_point(const FilteredPhiModule& mod, const WachVector& x, int J);

class WindowExhausted : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Terms v_start .. v_{start + size - 1} of a psi-compatible sequence.
struct PsiSequence {
    int start = 0;
    std::vector<WachVector> terms;
    double bound = 0.0;
    int consumed = 0;

    int end() const { return start + static_cast<int>(terms.size()) - 1; }
    const WachVector& at(int n) const { return terms.at(n - start); }
};

// v_n = (1+X)^{p^n twist} z for a psi-fixed z, n = 0..T.
PsiSequence fixed_point_sequence(const FilteredPhiModule& mod, const WachVector& z, const Rational& twist, int T);

// [[1, z], [0, a p^j]], a a p-adic unit.
struct BorelElement {
    Rational z = 0;
    Rational a = 1;
    int j = 0;
    std::int64_t prime = 3;

    static BorelElement diag_p(int j, std::int64_t p = 3) { return {0, 1, j, p}; }
    static BorelElement diag_unit(const Rational& a, std::int64_t p = 3) { return {0, a, 0, p}; }
    static BorelElement unipotent(const Rational& z, std::int64_t p = 3) { return {z, 1, 0, p}; }
    BorelElement operator*(const BorelElement& o) const;
};

PsiSequence borel_act(const FilteredPhiModule& mod, const BorelElement& g, const PsiSequence& s);

struct SequenceBound {
    std::vector<double> norms;
    double sup = 0.0;
    double trend = 0.0;
    GrowthVerdict verdict = GrowthVerdict::bounded_so_far;
};
SequenceBound sequence_bound_check(const FilteredPhiModule& mod, const PsiSequence& s);

// coord_psi(v_n) = v_{n-1} across the window.
bool psi_compatible(const FilteredPhiModule& mod, const PsiSequence& s);

// Agreement of two windows on their common indices at joint precision.
bool same_on_overlap(const PsiSequence& a, const PsiSequence& b);

}  // namespace padic
