#include "padic/harness.hpp"

#include "padic/correspondence.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace padic {

namespace {

// digits reported for comparisons in exact rational arithmetic
constexpr double kExactDigits = 1e6;

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

ConfigInvalid::ConfigInvalid(std::vector<std::string> diagnostics)
    : std::invalid_argument("config-invalid: " + join(diagnostics, "; ")), diagnostics_(std::move(diagnostics)) {}

// ---- config

namespace {

struct IntField {
    const char* key;
    std::function<int&(RunConfig&)> ref;
    int lo;
    int hi;
};

const std::vector<IntField>& int_fields() {
    static const std::vector<IntField> fields = {
        {"N", [](RunConfig& c) -> int& { return c.precision; }, 1, 36},
        {"K", [](RunConfig& c) -> int& { return c.truncation; }, 1, 4000},
        {"M", [](RunConfig& c) -> int& { return c.fil_depth; }, 1, 4},
        {"T", [](RunConfig& c) -> int& { return c.window; }, 1, 12},
        {"k", [](RunConfig& c) -> int& { return c.k; }, 0, 64},
        {"n_max", [](RunConfig& c) -> int& { return c.n_max; }, 0, 6},
        {"fixed_point_N", [](RunConfig& c) -> int& { return c.fixed_point_precision; }, 1, 36},
        {"fixed_point_J", [](RunConfig& c) -> int& { return c.fixed_point_depth; }, 1, 30},
        {"corr_N", [](RunConfig& c) -> int& { return c.corr_precision; }, 1, 36},
        {"corr_K", [](RunConfig& c) -> int& { return c.corr_truncation; }, 10, 4000},
        {"corr_J", [](RunConfig& c) -> int& { return c.corr_depth; }, 1, 30},
        {"dual_window", [](RunConfig& c) -> int& { return c.dual_window; }, 0, 4},
        {"dual_n_max", [](RunConfig& c) -> int& { return c.dual_n_max; }, 0, 4},
    };
    return fields;
}

}  // namespace

RunConfig parse_config(const std::string& text, const RunConfig& base) {
    RunConfig cfg = base;
    std::vector<std::string> diags;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            diags.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        try {
            if (key == "p") {
                cfg.p = std::stoll(value);
                if (cfg.p < 2) diags.push_back("p: must be a prime >= 2");
                for (std::int64_t d = 2; d * d <= cfg.p; ++d)
                    if (cfg.p % d == 0) {
                        diags.push_back("p: " + value + " is not prime");
                        break;
                    }
            } else if (key == "alpha") {
                cfg.alpha = parse_rational(value, cfg.p);
            } else if (key == "beta") {
                cfg.beta = parse_rational(value, cfg.p);
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else if (key == "suite") {
                cfg.suites = split_list(value);
                for (const auto& s : cfg.suites) {
                    bool known = false;
                    for (const auto& n : suite_names()) known = known || n == s;
                    if (!known) diags.push_back("suite: unknown suite '" + s + "'");
                }
            } else {
                bool found = false;
                for (const auto& f : int_fields()) {
                    if (key != f.key) continue;
                    found = true;
                    size_t used = 0;
                    int v = std::stoi(value, &used);
                    if (used != value.size()) throw std::invalid_argument("trailing characters");
                    if (v < f.lo || v > f.hi)
                        diags.push_back(key + ": " + value + " outside [" + std::to_string(f.lo) + ", " +
                                        std::to_string(f.hi) + "]");
                    else
                        f.ref(cfg) = v;
                }
                if (!found) diags.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            }
        } catch (const std::exception& e) {
            diags.push_back(key + ": cannot parse '" + value + "' (" + e.what() + ")");
        }
    }
    if (!diags.empty()) throw ConfigInvalid(diags);
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    std::vector<std::string> diags;
    try {
        make_module(cfg.p, cfg.k, cfg.alpha, cfg.beta);
    } catch (const ModuleError& e) {
        diags.push_back("k/alpha/beta: " + e.kind() + ": " + e.what());
    }
    if (cfg.corr_truncation < cfg.truncation) diags.push_back("corr_K: must be at least K");
    if (!diags.empty()) throw ConfigInvalid(diags);
}

std::string format_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "p = " << cfg.p << "\n";
    out << "k = " << cfg.k << "\n";
    out << "alpha = " << to_string(cfg.alpha) << "\n";
    out << "beta = " << to_string(cfg.beta) << "\n";
    RunConfig copy = cfg;
    for (const auto& f : int_fields()) {
        if (std::string(f.key) == "k") continue;
        out << f.key << " = " << f.ref(copy) << "\n";
    }
    out << "seed = " << cfg.seed << "\n";
    out << "suite = " << join(cfg.suites, ",") << "\n";
    return out.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) { return format_config(a) == format_config(b); }

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : format_config(cfg)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

// ---- catalog

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"padic_scalars", "series_ops",   "mahler_analysis",
                                                   "crystalline_wach", "gl2_model", "correspondence",
                                                   "cli_harness"};
    return names;
}

const std::vector<CheckInfo>& check_catalog() {
    static const std::vector<CheckInfo> cat = {
        {"padic_scalars", "ring-axioms", "ring axioms in Q_p and Q_p(zeta_p) with precision tracking",
         "(a+b)c = ac+bc, (ab)c = a(bc), a a^{-1} = 1 at the tracked precision, 200 random triples"},
        {"series_ops", "projection-formula", "psi(phi(x) y) = x psi(y)",
         "psi(phi(f) g) = f psi(g) coefficientwise on 500 random pairs of truncated series"},
        {"series_ops", "gamma-compatibility", "gamma_a phi = phi gamma_a, gamma_a psi = psi gamma_a, gamma_a gamma_b = gamma_ab",
         "200 random triples (a, b, f) with a, b in Z_p^x, compared at guaranteed digits"},
        {"series_ops", "order-witness", "log(1+X) has order 1",
         "order_r_estimate(log(1+X), 1) bounded and order_r_estimate(log(1+X)^2, 1) growing at K = 200"},
        {"mahler_analysis", "amice-bridge",
         "order-r growth <=> val(int_{a+p^n Z_p} (z-a)^j dmu) >= val(C) + n(j - r)",
         "Amice criterion (r = 1, d = 1, n <= n_max, val C = -1, band 1) against the growth estimator on 50 random "
         "transforms; >= 48 agree, every disagreement flagged inconclusive"},
        {"crystalline_wach", "fil0-dual-computation", "Fil^0 conditions at zeta_{p^m} - 1 versus phi^{-m} in L_m[[t]]",
         "the binomial residue sums and the t-expansion give the same verdict on 100 random vectors, m = 1..M"},
        {"crystalline_wach", "wach-sandwich", "X^{k-1} N-hat in D-sharp in N-hat, psi(D-sharp) = D-sharp",
         "stabilized psi-iteration of X^{k-1} N-hat modulo (p^2, X^20) within 10 steps"},
        {"crystalline_wach", "psi-fixed-point", "N(T)^{psi=1} is nonzero",
         "z = sum_j phi^j(y) from the seed e_alpha + e_beta, psi(z) - z vanishing at guaranteed digits, p^J > K"},
        {"gl2_model", "intertwiner-identities", "closed forms of I(z^j 1_{Z_p}) and I(z^j sigma^{val z} 1_{Q_p - pZ_p})",
         "100 sample points for each j, exactly one reading of the indicator factor must hold"},
        {"correspondence", "round-trip-dual-growth", "psi-compatible sequences <=> pairs of distributions on Q_p, C = 1",
         "distributions_to_sequence(sequence_to_distributions(s)) = s on 20 sequences, dual growth with val C = 0"},
        {"correspondence", "borel-equivariance", "diag(1,p) <-> psi, diag(1,a) <-> Gamma, unipotent <-> (1+X)-twist",
         "equivariance for the three generator classes on 10 sequences, group law on 50 random words"},
        {"correspondence", "fourier-criterion",
         "int z^j e(zy) dmu_beta = (beta/alpha)^{val y} int z^j e(zy) dmu_alpha",
         "Fil^0-passing sequences satisfy the Fourier identity at y in {1/p, 2/p, 1/p^2}; a perturbed seed fails both"},
        {"cli_harness", "determinism", "identical config and seed give identical reports",
         "two runs of the seeded scalar, Amice, Fil^0 and intertwiner suites, json compared with wall time removed"},
    };
    return cat;
}

std::optional<CheckInfo> find_check(const std::string& name) {
    for (const auto& c : check_catalog())
        if (c.name == name || c.suite + "/" + c.name == name) return c;
    return std::nullopt;
}

// ---- checks

namespace {

struct Outcome {
    Verdict verdict = Verdict::pass;
    std::string witness;
    double digits = 0.0;
};

std::string verdict_word(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

Verdict combine(Verdict a, Verdict b) {
    if (a == Verdict::fail || b == Verdict::fail) return Verdict::fail;
    if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
    return Verdict::pass;
}

double to_double(const Rational& r) { return static_cast<double>(r); }

// precision of the constant coefficient; the top of a psi output is known to fewer
// digits, and equals() only compares what is known
double low_precision(const PowerSeries& f) { return to_double(f[0].precision()); }

PowerSeries random_series(std::mt19937_64& rng, const Ctx& ctx, int K) {
    std::uniform_int_distribution<std::int64_t> digit(0, ctx->p_power(ctx->precision()) - 1);
    std::vector<Scalar> v;
    for (int i = 0; i <= K; ++i) v.push_back(Scalar::from_int(ctx, digit(rng)));
    return PowerSeries(ctx, std::move(v), TailModel::integral());
}

PowerSeries random_poly(std::mt19937_64& rng, const Ctx& ctx, int deg) {
    std::vector<std::int64_t> c;
    for (int i = 0; i <= deg; ++i) c.push_back(static_cast<std::int64_t>(rng() % 81) - 40);
    return PowerSeries::polynomial(ctx, c);
}

Rational random_unit(std::mt19937_64& rng, std::int64_t p) {
    for (;;) {
        long long n = static_cast<long long>(rng() % 80) - 40, d = static_cast<long long>(rng() % 20) + 1;
        if (n % p != 0 && d % p != 0) return Rational(n, d);
    }
}

WachVector constant_vector(const Ctx& ctx, std::int64_t a, std::int64_t b, int K) {
    return {PowerSeries::polynomial(ctx, {a}).truncated(K), PowerSeries::polynomial(ctx, {b}).truncated(K)};
}

struct Env {
    const RunConfig& cfg;
    FilteredPhiModule mod;
    Ctx ctx;

    explicit Env(const RunConfig& c)
        : cfg(c), mod(make_module(c.p, c.k, c.alpha, c.beta)), ctx(PadicContext::rationals(c.p, c.precision)) {}

    // sequences for the correspondence suite, built once
    struct CorrSet {
        std::vector<WachVector> seeds;
        std::vector<PsiSequence> sequences;
        std::vector<int> seed_of;
        WachVector perturbed_seed;
        PsiSequence perturbed;
        std::string error;
    };
    std::optional<CorrSet> corr;

    const CorrSet& correspondence_set(std::uint64_t seed) {
        if (corr) return *corr;
        CorrSet cs;
        auto cctx = PadicContext::rationals(cfg.p, cfg.corr_precision);
        const int K = cfg.corr_truncation;
        auto basis = wach_basis(mod, cctx, K);
        std::mt19937_64 rng(seed);
        cs.seeds.push_back(basis.column(0));
        cs.seeds.push_back(basis.column(1));
        for (int i = 0; i < 2; ++i)
            cs.seeds.push_back(basis.apply(random_poly(rng, cctx, 3), random_poly(rng, cctx, 3)).truncated(K));
        const std::vector<Rational> twists = {0, 1, 2, -1, 4};
        for (size_t s = 0; s < cs.seeds.size(); ++s) {
            auto fp = psi_fixed_point(mod, cs.seeds[s], cfg.corr_depth);
            if (!fp.verified && cs.error.empty()) cs.error = "fixed point of seed " + std::to_string(s) + " unverified";
            for (const auto& t : twists) {
                cs.sequences.push_back(fixed_point_sequence(mod, fp.z, t, cfg.window));
                cs.seed_of.push_back(static_cast<int>(s));
            }
        }
        cs.perturbed_seed = cs.seeds[0] + constant_vector(cctx, 1, 1, K);
        auto pf = psi_fixed_point(mod, cs.perturbed_seed, cfg.corr_depth);
        cs.perturbed = fixed_point_sequence(mod, pf.z, Rational(1), cfg.window);
        corr = std::move(cs);
        return *corr;
    }
};

Outcome check_ring_axioms(Env& env, std::mt19937_64& rng) {
    Outcome out;
    out.digits = env.cfg.precision;
    std::vector<Ctx> ctxs = {env.ctx, PadicContext::cyclotomic(env.cfg.p, env.cfg.precision, 1)};
    std::uniform_int_distribution<std::int64_t> small(-500, 500);
    int failures = 0;
    for (int t = 0; t < 200; ++t) {
        const Ctx& c = ctxs[t % 2];
        auto rnd = [&] {
            Scalar x = Scalar::from_int(c, small(rng));
            if (c->degree() > 1) x += Scalar::from_int(c, small(rng)) * Scalar::uniformizer(c);
            return x;
        };
        Scalar a = rnd(), b = rnd(), d = rnd();
        bool ok = ((a + b) * d).equals(a * d + b * d) && ((a * b) * d).equals(a * (b * d)) &&
                  ((a + b) + d).equals(a + (b + d));
        if (!a.is_zero()) ok = ok && (a * a.inverse()).equals(Scalar::one(c));
        if (!ok && failures++ == 0) out.witness = "trial " + std::to_string(t);
    }
    if (failures) out.verdict = Verdict::fail;
    return out;
}

Outcome check_projection(Env& env, std::mt19937_64& rng) {
    Outcome out;
    out.digits = 1e9;
    int failures = 0;
    for (int t = 0; t < 500; ++t) {
        PowerSeries f = random_series(rng, env.ctx, env.cfg.truncation);
        PowerSeries g = random_series(rng, env.ctx, env.cfg.truncation);
        PowerSeries lhs = psi(phi(f) * g), rhs = f * psi(g);
        out.digits = std::min(out.digits, low_precision(lhs - rhs));
        if (!lhs.equals(rhs) && failures++ == 0) out.witness = "pair " + std::to_string(t);
    }
    if (failures) {
        out.verdict = Verdict::fail;
        out.witness += " (" + std::to_string(failures) + " failures)";
    }
    return out;
}

Outcome check_gamma(Env& env, std::mt19937_64& rng) {
    Outcome out;
    out.digits = 1e9;
    int failures = 0;
    for (int t = 0; t < 200; ++t) {
        Rational a = random_unit(rng, env.cfg.p), b = random_unit(rng, env.cfg.p);
        PowerSeries f = random_series(rng, env.ctx, env.cfg.truncation);
        PowerSeries d1 = gamma_act(a, phi(f)) - phi(gamma_act(a, f));
        PowerSeries d2 = gamma_act(a, psi(f)) - psi(gamma_act(a, f));
        PowerSeries d3 = gamma_act(a, gamma_act(b, f)) - gamma_act(a * b, f);
        for (const auto* d : {&d1, &d2, &d3}) out.digits = std::min(out.digits, low_precision(*d));
        if (!(d1.is_zero() && d2.is_zero() && d3.is_zero()) && failures++ == 0)
            out.witness = "a = " + to_string(a) + ", b = " + to_string(b);
    }
    if (failures) out.verdict = Verdict::fail;
    return out;
}

Outcome check_order_witness(Env& env, std::mt19937_64&) {
    Outcome out;
    PowerSeries lg = log_series(env.ctx, 200);
    auto e1 = order_r_estimate(lg, 1.0);
    auto e2 = order_r_estimate(lg * lg, 1.0);
    out.digits = env.cfg.precision;
    out.witness = "slopes " + std::to_string(e1.slope) + " / " + std::to_string(e2.slope);
    if (e1.verdict != GrowthVerdict::bounded_so_far || e2.verdict != GrowthVerdict::growing)
        out.verdict = Verdict::fail;
    return out;
}

// Bounded: val a_n around -floor(log_p(n+1)). Growing: one spike well below that line.
PowerSeries amice_sample(std::mt19937_64& rng, const Ctx& ctx, int K, bool growing) {
    const std::int64_t p = ctx->prime();
    std::vector<Scalar> v;
    int b0 = static_cast<int>(rng() % 2);
    std::uniform_int_distribution<std::int64_t> unit(1, p * p * p * p - 1);
    for (int n = 0; n <= K; ++n) {
        static const int noise[] = {0, 0, 1, 2};
        int val = -floor_log(n + 1, p) - b0 + noise[rng() % 4];
        v.push_back(Scalar::from_rational(ctx, Rational(unit(rng)) * rat_pow(Rational(p), val)));
    }
    if (growing) {
        int lo = std::max(1, 2 * K / 3 + 1);
        int m = lo + static_cast<int>(rng() % static_cast<std::uint64_t>(K - lo + 1));
        int extra = 3 + static_cast<int>(rng() % 2);
        int val = -(floor_log(m + 1, p) + 1 + extra);
        Rational u = Rational(unit(rng) * p + 1);
        v[m] = Scalar::from_rational(ctx, u * rat_pow(Rational(p), val));
    }
    return PowerSeries::polynomial(v);
}

Outcome check_amice(Env& env, std::mt19937_64& rng) {
    Outcome out;
    AmiceOptions opt;
    opt.r = 1;
    opt.d = 1;
    opt.n_max = env.cfg.n_max;
    opt.c_val = -1;
    opt.band = 1;
    int agree = 0, flagged = 0, unflagged = 0;
    out.digits = 1e9;
    for (int t = 0; t < 50; ++t) {
        bool growing = rng() % 2;
        PowerSeries w = amice_sample(rng, env.ctx, env.cfg.truncation, growing);
        auto est = order_r_estimate(w, 1.0);
        auto chk = amice_velu_check({w, 1.0}, opt);
        bool same = (chk.verdict == Verdict::pass && est.verdict == GrowthVerdict::bounded_so_far) ||
                    (chk.verdict == Verdict::fail && est.verdict == GrowthVerdict::growing);
        if (same) {
            ++agree;
        } else if (chk.verdict == Verdict::inconclusive) {
            ++flagged;
        } else {
            if (unflagged++ == 0) out.witness = "transform " + std::to_string(t) + " (" + (growing ? "growing" : "bounded") + ")";
        }
        if (chk.verdict == Verdict::pass && chk.margin_exact)
            out.digits = std::min(out.digits, to_double(chk.margin - opt.c_val));
    }
    if (out.witness.empty())
        out.witness = std::to_string(agree) + "/50 agree, " + std::to_string(flagged) + " flagged inconclusive";
    if (unflagged > 0 || agree < 48) out.verdict = Verdict::fail;
    return out;
}

Outcome check_fil0(Env& env, std::mt19937_64& rng) {
    Outcome out;
    const int K = env.cfg.truncation;
    auto basis = wach_basis(env.mod, env.ctx, K);
    int unflagged = 0, flagged = 0, compared = 0;
    out.digits = 1e9;
    for (int t = 0; t < 100; ++t) {
        WachVector v = t % 2 ? basis.apply(random_poly(rng, env.ctx, 4), random_poly(rng, env.ctx, 4)).truncated(K)
                             : WachVector{random_poly(rng, env.ctx, 6), random_poly(rng, env.ctx, 6)};
        for (int m = 1; m <= env.cfg.fil_depth; ++m) {
            auto rep = fil0_test(env.mod, v, m);
            ++compared;
            out.digits = std::min(out.digits, rep.min_digits);
            if (rep.verdict == rep.decomposition_verdict) continue;
            if (rep.verdict == Verdict::inconclusive || rep.decomposition_verdict == Verdict::inconclusive) {
                ++flagged;
            } else if (unflagged++ == 0) {
                out.witness = "vector " + std::to_string(t) + " at m = " + std::to_string(m);
            }
        }
    }
    if (unflagged) out.verdict = Verdict::fail;
    if (out.witness.empty())
        out.witness = std::to_string(compared) + " comparisons, " + std::to_string(flagged) + " flagged";
    return out;
}

Outcome check_sandwich(Env& env, std::mt19937_64&) {
    Outcome out;
    auto sol = solve_wach_lattice(env.mod, env.ctx, 2, 20, env.cfg.fil_depth, env.cfg.truncation);
    auto res = dsharp_iterate(sol, env.mod.h());
    out.digits = 2;
    out.witness = "steps " + std::to_string(res.steps) + ", log_p sizes " + std::to_string(res.sizes.front()) + " -> " +
                  std::to_string(res.sizes.back());
    bool ok = sol.contains_Xh_basis && res.steps <= 10 && res.monotone && res.contains_XhN && res.inside_N &&
              res.psi_surjective;
    if (!ok) out.verdict = Verdict::fail;
    return out;
}

Outcome check_fixed_point(Env& env, std::mt19937_64&) {
    Outcome out;
    const int K = env.cfg.truncation, J = env.cfg.fixed_point_depth;
    double pj = std::pow(static_cast<double>(env.cfg.p), J);
    auto ctx = PadicContext::rationals(env.cfg.p, env.cfg.fixed_point_precision);
    auto fp = psi_fixed_point(env.mod, constant_vector(ctx, 1, 1, K), J);
    out.digits = fp.digits;
    out.witness = "J = " + std::to_string(J) + ", certified prefix 0.." + std::to_string(fp.window);
    if (!(pj > K)) {
        out.verdict = Verdict::fail;
        out.witness += ", p^J <= K";
    } else if (!fp.verified || !fp.nonzero || fp.digits < 1.0) {
        out.verdict = Verdict::fail;
    }
    return out;
}

Outcome check_intertwiner(Env& env, std::mt19937_64& rng) {
    Outcome out;
    std::string reading;
    out.digits = kExactDigits;
    for (int j = 0; j <= std::min(1, env.cfg.k - 2); ++j) {
        auto rep = intertwiner_identity_check(env.mod, j, rng(), 100);
        if (!rep.pass || (!reading.empty() && reading != rep.reading)) {
            out.verdict = Verdict::fail;
            out.witness = "j = " + std::to_string(j) + ": reading " + rep.reading + " " + rep.closed_a.first_mismatch +
                          rep.open_a.first_mismatch;
            return out;
        }
        reading = rep.reading;
    }
    out.witness = "reading " + reading;
    return out;
}

DualOptions dual_options(const RunConfig& cfg) {
    DualOptions o;
    o.c_val = 0;
    o.window = cfg.dual_window;
    o.n_max = cfg.dual_n_max;
    return o;
}

Outcome check_round_trip(Env& env, std::mt19937_64&) {
    Outcome out;
    const auto& cs = env.correspondence_set(env.cfg.seed);
    if (!cs.error.empty()) return {Verdict::fail, cs.error, 0.0};
    out.digits = 1e9;
    for (size_t i = 0; i < cs.sequences.size(); ++i) {
        const auto& s = cs.sequences[i];
        auto pair = sequence_to_distributions(env.mod, s);
        auto back = distributions_to_sequence(env.mod, pair);
        if (!same_on_overlap(back.sequence, s) || !back.psi_compatible) {
            out.verdict = Verdict::fail;
            out.witness = "round trip, sequence " + std::to_string(i);
            return out;
        }
        auto tab = extend_versfin(env.mod, pair, env.cfg.dual_window + env.cfg.dual_n_max + 1);
        auto opt = dual_options(env.cfg);
        for (int side = 0; side < 2; ++side) {
            auto rep = dual_conditions_check(side == 0 ? env.mod : swap_sides(env.mod),
                                             qp_functional(env.mod, pair, tab, side == 0), opt);
            if (rep.has_margin) out.digits = std::min(out.digits, to_double(rep.margin));
            if (rep.verdict != Verdict::pass) {
                out.verdict = combine(out.verdict, rep.verdict);
                if (out.witness.empty())
                    out.witness = "dual growth, sequence " + std::to_string(i) + (side ? " beta" : " alpha") + ": " +
                                  rep.witness.condition + " a = " + to_string(rep.witness.a) +
                                  " n = " + std::to_string(rep.witness.n) + " j = " + std::to_string(rep.witness.j);
            }
        }
    }
    if (out.witness.empty()) out.witness = std::to_string(cs.sequences.size()) + " sequences";
    return out;
}

Outcome check_borel(Env& env, std::mt19937_64& rng) {
    Outcome out;
    const auto& cs = env.correspondence_set(env.cfg.seed);
    if (!cs.error.empty()) return {Verdict::fail, cs.error, 0.0};
    const std::int64_t p = env.cfg.p;
    out.digits = 1e9;
    TestFamily fam{1, 1, 1};
    const std::vector<std::pair<std::string, BorelElement>> gens = {
        {"diag(1,p)", BorelElement::diag_p(1, p)},
        {"diag(1,1+p)", BorelElement::diag_unit(Rational(1 + p), p)},
        {"unipotent(1)", BorelElement::unipotent(1, p)},
    };
    const size_t count = std::min<size_t>(10, cs.sequences.size());
    for (size_t i = 0; i < count; ++i)
        for (const auto& [label, g] : gens) {
            auto rep = borel_equivariance_check(env.mod, cs.sequences[i], g, fam);
            out.digits = std::min(out.digits, rep.digits);
            if (rep.verdict != Verdict::pass) {
                out.verdict = combine(out.verdict, rep.verdict);
                if (out.witness.empty()) out.witness = label + " on sequence " + std::to_string(i) + ": " + rep.witness;
            }
        }
    // group law on words of three generators
    auto ctx = PadicContext::rationals(p, 12);
    auto fp = psi_fixed_point(env.mod, constant_vector(ctx, 1, 1, env.cfg.truncation), 6);
    auto seq = fixed_point_sequence(env.mod, fp.z, Rational(1), env.cfg.window);
    auto random_generator = [&]() {
        switch (rng() % 3) {
            case 0: return BorelElement::diag_p(static_cast<int>(rng() % 2), p);
            case 1: return BorelElement::diag_unit(random_unit(rng, p), p);
            default:
                return BorelElement::unipotent(Rational(static_cast<long long>(rng() % 7) - 3, rng() % 2 ? p : 1), p);
        }
    };
    int words = 0, exhausted = 0;
    while (words < 50) {
        BorelElement g1 = random_generator(), g2 = random_generator(), g3 = random_generator();
        try {
            auto lhs = borel_act(env.mod, g1, borel_act(env.mod, g2, borel_act(env.mod, g3, seq)));
            auto rhs = borel_act(env.mod, g1 * g2 * g3, seq);
            ++words;
            if (!same_on_overlap(lhs, rhs)) {
                out.verdict = Verdict::fail;
                if (out.witness.empty()) out.witness = "group law, word " + std::to_string(words);
            }
        } catch (const WindowExhausted&) {
            if (++exhausted > 200) return {Verdict::inconclusive, "group law: windows exhausted", 0.0};
        }
    }
    if (out.witness.empty()) out.witness = std::to_string(count) + " sequences x 3 classes, 50 words";
    return out;
}

Outcome check_fourier(Env& env, std::mt19937_64&) {
    Outcome out;
    const auto& cs = env.correspondence_set(env.cfg.seed);
    if (!cs.error.empty()) return {Verdict::fail, cs.error, 0.0};
    const std::int64_t p = env.cfg.p;
    const std::vector<Rational> ys = {Rational(1, p), Rational(2, p), Rational(1, p * p)};
    out.digits = 1e9;
    // levels N - val(y) <= 2: beyond that psi^3 leaves too few digits at the configured window
    auto sweep = [&](const DistributionPair& pair, Verdict& worst, std::string& wit, double& digits) {
        for (const auto& y : ys)
            for (int N = 0; N - p_valuation(y, p) <= 2; ++N)
                for (int j = 0; j <= env.cfg.k - 2; ++j) {
                    auto r = fourier_condition_check(env.mod, pair.alpha, pair.beta, y, N, j);
                    digits = std::min(digits, r.digits);
                    if (r.verdict != Verdict::pass && worst == Verdict::pass)
                        wit = "y = " + to_string(y) + ", N = " + std::to_string(N) + ", j = " + std::to_string(j);
                    worst = combine(worst, r.verdict);
                }
    };
    std::vector<Verdict> membership(cs.seeds.size());
    for (size_t s = 0; s < cs.seeds.size(); ++s)
        membership[s] = wach_membership(env.mod, cs.seeds[s], env.cfg.fil_depth).verdict;
    for (size_t i = 0; i < cs.sequences.size(); ++i) {
        Verdict mem = membership[cs.seed_of[i]];
        Verdict worst = Verdict::pass;
        std::string wit;
        sweep(sequence_to_distributions(env.mod, cs.sequences[i]), worst, wit, out.digits);
        if (mem != Verdict::pass || worst != Verdict::pass) {
            out.verdict = combine(out.verdict, mem == Verdict::pass ? worst : Verdict::fail);
            if (out.witness.empty())
                out.witness = "instance " + std::to_string(i) + ": membership " + verdict_word(mem) + ", Fourier " +
                              verdict_word(worst) + " " + wit;
        }
    }
    // the perturbed seed leaves the lattice, and the Fourier identity must notice
    Verdict pmem = wach_membership(env.mod, cs.perturbed_seed, env.cfg.fil_depth).verdict;
    Verdict pworst = Verdict::pass;
    std::string pwit;
    double pdigits = 1e9;
    sweep(sequence_to_distributions(env.mod, cs.perturbed), pworst, pwit, pdigits);
    if (pmem != Verdict::fail || pworst != Verdict::fail) {
        out.verdict = Verdict::fail;
        if (out.witness.empty())
            out.witness = "perturbed instance: membership " + verdict_word(pmem) + ", Fourier " + verdict_word(pworst);
    }
    if (out.witness.empty())
        out.witness = std::to_string(cs.sequences.size()) + " instances pass, perturbed fails at " + pwit;
    return out;
}

Report run_impl(const RunConfig& cfg, bool allow_nested);

Outcome check_determinism(Env& env, std::mt19937_64&) {
    RunConfig sub = env.cfg;
    sub.suites = {"padic_scalars", "mahler_analysis", "crystalline_wach", "gl2_model"};
    std::string a = report_fingerprint(run_impl(sub, false));
    std::string b = report_fingerprint(run_impl(sub, false));
    Outcome out;
    out.digits = 0;
    out.witness = "fingerprint bytes " + std::to_string(a.size());
    if (a != b) out.verdict = Verdict::fail;
    return out;
}

using CheckFn = Outcome (*)(Env&, std::mt19937_64&);

const std::map<std::string, CheckFn>& check_functions() {
    static const std::map<std::string, CheckFn> fns = {
        {"ring-axioms", check_ring_axioms},
        {"projection-formula", check_projection},
        {"gamma-compatibility", check_gamma},
        {"order-witness", check_order_witness},
        {"amice-bridge", check_amice},
        {"fil0-dual-computation", check_fil0},
        {"wach-sandwich", check_sandwich},
        {"psi-fixed-point", check_fixed_point},
        {"intertwiner-identities", check_intertwiner},
        {"round-trip-dual-growth", check_round_trip},
        {"borel-equivariance", check_borel},
        {"fourier-criterion", check_fourier},
        {"determinism", check_determinism},
    };
    return fns;
}

double round_to(double x, int places) {
    double s = std::pow(10.0, places);
    return std::round(x * s) / s;
}

Report run_impl(const RunConfig& cfg, bool allow_nested) {
    validate_config(cfg);
    Report rep;
    rep.config_hash = config_hash(cfg);
    rep.config = format_config(cfg);
    Env env(cfg);
    std::uint64_t index = 0;
    for (const auto& info : check_catalog()) {
        ++index;
        bool selected = cfg.suites.empty();
        for (const auto& s : cfg.suites) selected = selected || s == info.suite;
        if (!selected || (!allow_nested && info.suite == "cli_harness")) continue;
        std::seed_seq sq{cfg.seed, index};
        std::mt19937_64 rng(sq);
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check_functions().at(info.name)(env, rng);
        } catch (const std::exception& e) {
            o = {Verdict::fail, std::string("exception: ") + e.what(), 0.0};
        }
        CheckRecord r;
        r.suite = info.suite;
        r.name = info.name;
        r.anchor = info.anchor;
        r.verdict = verdict_word(o.verdict);
        r.witness = o.witness;
        r.digits = round_to(std::min(o.digits, kExactDigits), 3);
        r.wall_ms = round_to(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count(), 1);
        r.config_hash = rep.config_hash;
        if (o.verdict == Verdict::pass) ++rep.passed;
        if (o.verdict == Verdict::fail) ++rep.failed;
        if (o.verdict == Verdict::inconclusive) ++rep.inconclusive;
        rep.records.push_back(std::move(r));
    }
    return rep;
}

using Json = nlohmann::ordered_json;

Json to_json(const Report& r) {
    Json j;
    j["config_hash"] = r.config_hash;
    j["config"] = r.config;
    j["summary"] = {{"passed", r.passed}, {"failed", r.failed}, {"inconclusive", r.inconclusive}};
    j["records"] = Json::array();
    for (const auto& c : r.records)
        j["records"].push_back({{"suite", c.suite},
                                {"name", c.name},
                                {"anchor", c.anchor},
                                {"verdict", c.verdict},
                                {"witness", c.witness},
                                {"digits", c.digits},
                                {"wall_ms", c.wall_ms},
                                {"config_hash", c.config_hash}});
    return j;
}

}  // namespace

Report run_suite(const RunConfig& cfg) { return run_impl(cfg, true); }

std::string emit_report(const Report& r, ReportFormat fmt) {
    if (fmt == ReportFormat::json) return to_json(r).dump(2) + "\n";
    std::ostringstream out;
    out << "config " << r.config_hash << "\n";
    for (const auto& c : r.records) {
        out << "[" << c.verdict << "] " << c.suite << "/" << c.name << "  digits ";
        if (c.digits >= kExactDigits)
            out << "exact";
        else
            out << c.digits;
        out << "  " << c.wall_ms << " ms\n";
        out << "    anchor: " << c.anchor << "\n";
        if (!c.witness.empty()) out << "    witness: " << c.witness << "\n";
    }
    out << "passed " << r.passed << ", failed " << r.failed << ", inconclusive " << r.inconclusive << "\n";
    return out.str();
}

Report parse_report(const std::string& json_text) {
    Json j = Json::parse(json_text);
    Report r;
    r.config_hash = j.value("config_hash", "");
    r.config = j.value("config", "");
    if (j.contains("summary")) {
        r.passed = j["summary"].value("passed", 0);
        r.failed = j["summary"].value("failed", 0);
        r.inconclusive = j["summary"].value("inconclusive", 0);
    }
    if (j.contains("records"))
        for (const auto& c : j["records"]) {
            CheckRecord rec;
            rec.suite = c.at("suite").get<std::string>();
            rec.name = c.at("name").get<std::string>();
            rec.anchor = c.at("anchor").get<std::string>();
            rec.verdict = c.at("verdict").get<std::string>();
            rec.witness = c.at("witness").get<std::string>();
            rec.digits = c.at("digits").get<double>();
            rec.wall_ms = c.at("wall_ms").get<double>();
            rec.config_hash = c.at("config_hash").get<std::string>();
            r.records.push_back(std::move(rec));
        }
    return r;
}

std::string report_fingerprint(const Report& r) {
    Report copy = r;
    for (auto& c : copy.records) c.wall_ms = 0.0;
    return emit_report(copy, ReportFormat::json);
}

}  // namespace padic
