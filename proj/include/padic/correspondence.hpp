#pragma once

#include "padic/gl2.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace padic {

class CoherenceViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DistributionPair {
    CompactQpDistribution alpha;
    CompactQpDistribution beta;
};

// mu_{alpha,n} has transform alpha^n w_{alpha,n}; same for beta.
DistributionPair sequence_to_distributions(const FilteredPhiModule& mod, const PsiSequence& s);

// psi(mu_{n+1}) = mu_n on the stored levels, at precision.
bool level_coherent(const CompactQpDistribution& mu);

// Moments of the extended functionals against the non-compact generators:
// alpha_far[L][e] = int_{val z <= -L} rho^{val z} z^e dmu_alpha, rho = p alpha / beta,
// beta_far[L][e]  = int_{val z <= -L} sigma^{val z} z^e dmu_beta, sigma = p beta / alpha,
// for L = 0..n_max and e = 0..k-2.
struct VersfinTable {
    Rational kappa;  // (1 - alpha/beta) / (1 - beta/(p alpha))
    Rational c0;     // (1 - 1/p) / (1 - alpha/beta)
    int n_max = 0;
    std::vector<std::vector<Scalar>> alpha_far;
    std::vector<std::vector<Scalar>> beta_far;
};

// Throws std::domain_error ("inconsistent-input") when the constant is undefined.
VersfinTable extend_versfin(const FilteredPhiModule& mod, const DistributionPair& mu, int n_max);

// The extended functional on one side: compact pieces through the level families, the part at
// infinity through the extension table.
QpFunctional qp_functional(const FilteredPhiModule& mod, const DistributionPair& mu, const VersfinTable& table,
                              bool alpha_side);

// int z^j h dmu_beta versus kappa int I(z^j h) dmu_alpha for compact h with compact I(h).
struct ScalingCheck {
    Verdict verdict = Verdict::pass;
    Scalar lhs, rhs;
    double digits = 0.0;
};
ScalingCheck debutinter_check(const FilteredPhiModule& mod, const DistributionPair& mu, const SmoothCompactFunction& h,
                              int j, double min_digits = 1.0);

struct SequenceRecovery {
    PsiSequence sequence;
    std::vector<double> level_norms;  // order-r sup of alpha^{-n} mu_{alpha,n} and beta^{-n} mu_{beta,n}
    double bound = 0.0;
    bool psi_compatible = false;
};
SequenceRecovery distributions_to_sequence(const FilteredPhiModule& mod, const DistributionPair& mu);

// Test functionals 1_{c + p^n Z_p}(z) (z - c)^i with c in p^{-window} Z_p mod p^n,
// -window <= n <= n_top, i <= degree.
struct TestFamily {
    int window = 1;
    int n_top = 1;
    int degree = 1;
};
std::vector<LocPolyFunction> test_functions(std::int64_t p, const TestFamily& fam);

// (g^{-1} F)(x) = e^{-val d'} F(d' x - b') for g^{-1} = [[1, b'], [0, d']], e the side eigenvalue.
LocPolyFunction borel_pullback(const FilteredPhiModule& mod, const BorelElement& g, const LocPolyFunction& F,
                               bool alpha_side);

struct EquivarianceReport {
    Verdict verdict = Verdict::pass;
    int tests = 0;
    int skipped = 0;  // functionals outside one of the windows
    double digits = 0.0;
    std::string witness;
};
// Throws WindowExhausted when no test functional fits both windows.
EquivarianceReport borel_equivariance_check(const FilteredPhiModule& mod, const PsiSequence& s, const BorelElement& g,
                                            const TestFamily& fam);

}  // namespace padic
