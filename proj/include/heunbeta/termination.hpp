#pragma once

// Termination of the Beta-series expansions: detecting the integer parameter
// relations, building and solving the sigma polynomials whose roots terminate
// a series, emitting the closed-form finite sums, solving the family-D
// two-condition system in (delta, sigma), and reducing every finite Beta sum
// to the elementary form A u_0 + phi(z) u_0'.

#include <algorithm>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "heunbeta/expansions.hpp"
#include "heunbeta/poly.hpp"

namespace heunbeta {

enum class TerminationRelation {
    GammaDeltaMinus2,      // gamma + delta - 2 = N          (family A)
    GammaDeltaAlphaMinus1, // gamma + delta - alpha - 1 = N  (families B, C)
    Delta0Pinned,          // delta0 = gamma - 2 - N         (family D)
};

inline const char* relation_text(TerminationRelation r) {
    switch (r) {
        case TerminationRelation::GammaDeltaMinus2: return "gamma + delta - 2 = N";
        case TerminationRelation::GammaDeltaAlphaMinus1: return "gamma + delta - alpha - 1 = N";
        case TerminationRelation::Delta0Pinned: return "delta0 = gamma - 2 - N";
    }
    return "?";
}

struct TerminationCondition {
    Family family = Family::A;
    int N = 0;
    TerminationRelation relation = TerminationRelation::GammaDeltaMinus2;
    double residual = 0.0; // distance of the relation value from N
};

/// Smallest N <= n_max satisfying the family's integer relation within
/// kEqTol, if any. Family D measures delta0 (defaulting to gamma - 2) against
/// its pinned value; family E has no termination relation.
inline std::optional<TerminationCondition> detect_termination(const CheParams& P, Family family,
                                                              int n_max,
                                                              std::optional<Complex> delta0 = std::nullopt) {
    P.validate();
    Complex x;
    TerminationRelation rel = TerminationRelation::GammaDeltaMinus2;
    switch (family) {
        case Family::A:
            x = P.gamma + P.delta - 2.0;
            rel = TerminationRelation::GammaDeltaMinus2;
            break;
        case Family::B:
        case Family::C:
            x = P.gamma + P.delta - P.alpha - 1.0;
            rel = TerminationRelation::GammaDeltaAlphaMinus1;
            break;
        case Family::D:
            x = P.gamma - 2.0 - delta0.value_or(P.gamma - 2.0);
            rel = TerminationRelation::Delta0Pinned;
            break;
        case Family::E:
            return std::nullopt;
    }
    const long n = std::lround(x.real());
    if (n < 0 || n > n_max) return std::nullopt;
    const double res = std::abs(x - Complex(double(n)));
    if (res > kEqTol) return std::nullopt;
    return TerminationCondition{family, int(n), rel, res};
}

/// Polynomial in sigma whose roots terminate the series at index N. Family A
/// yields a monic polynomial of degree N + 1; for families B and C sigma is
/// fixed by the family constraint, so the result is the degree-0 scalar
/// condition that must vanish instead.
struct SigmaPolynomial {
    Family family = Family::A;
    int N = 0;
    std::vector<Complex> coeffs; // ascending powers of sigma
};

inline SigmaPolynomial sigma_polynomial(const CheParams& P, Family family, int N) {
    P.validate();
    if (family == Family::D)
        throw UnsupportedFamily("sigma_polynomial: family D needs the two-condition solver (solve_family_d)");
    if (family == Family::E)
        throw UnsupportedFamily("sigma_polynomial: family E has sigma pinned by the pretransform quadratic");
    if (N < 0) throw DomainError("sigma_polynomial: N must be non-negative");

    const auto tc = detect_termination(P, family, N);
    if (!tc || tc->N != N)
        throw ConstraintViolation(std::string("sigma_polynomial: ") +
                                  (family == Family::A ? "gamma + delta - 2 = N"
                                                       : "gamma + delta - alpha - 1 = N") +
                                  " does not hold");

    SigmaPolynomial out;
    out.family = family;
    out.N = N;

    if (family == Family::A) {
        // Propagate the cleared coefficients c_n = a_n prod_{k<=n} R_k, which
        // obey c_n = -(Q_n(sigma) c_{n-1} + P_n R_{n-1} c_{n-2}); the
        // termination condition Q_{N+1} a_N + P_{N+1} a_{N-1} = 0 then clears
        // to the exactly monic polynomial (-1)^N (Q_{N+1} c_N + P_{N+1} R_N c_{N-1}).
        CheParams base = P;
        base.sigma = 0.0;
        base.alpha = 0.0;
        const Complex delta0 = 1.0 - P.delta;
        PolyC c_prev2;            // c_{-1} = 0
        PolyC c_prev{Complex(1.0)}; // c_0 = 1
        Complex r_prev = 0.0;     // R_0
        for (int n = 1; n <= N; ++n) {
            const RecurrenceCoeffs rc = recurrence_coeffs(Family::A, base, delta0, n);
            if (std::abs(rc.R) <= 1e-12 * std::max(1.0, double(n) * double(n)))
                throw PivotBreakdown("sigma_polynomial: degenerate gamma (recurrence pivot vanished)");
            const PolyC q{std::vector<Complex>{rc.Q, 1.0}}; // Q_n(sigma) = Q_n(0) + sigma
            PolyC c_new = -(q * c_prev + PolyC(rc.P * r_prev) * c_prev2);
            c_prev2 = std::move(c_prev);
            c_prev = std::move(c_new);
            r_prev = rc.R;
        }
        const RecurrenceCoeffs rc = recurrence_coeffs(Family::A, base, delta0, N + 1);
        const PolyC q{std::vector<Complex>{rc.Q, 1.0}};
        PolyC poly = q * c_prev + PolyC(rc.P * r_prev) * c_prev2;
        if (N % 2 == 1) poly = -poly;
        out.coeffs = poly.coeffs();
        return out;
    }

    // Families B and C: sigma is fixed (0, resp. 4 p alpha); generate the
    // coefficients numerically and report the scalar condition value.
    CheParams base = P;
    base.sigma = (family == Family::B) ? Complex(0.0) : 4.0 * P.p * P.alpha;
    const Complex delta0 = (family == Family::B) ? 1.0 - P.delta : -P.delta;
    std::vector<Complex> a{1.0};
    const auto at = [&](int k) -> Complex { return (k >= 0 && k < int(a.size())) ? a[k] : Complex(0.0); };
    for (int n = 1; n <= N; ++n) {
        const RecurrenceCoeffs rc = recurrence_coeffs(family, base, delta0, n);
        if (std::abs(rc.R) <= 1e-12 * std::max(1.0, double(n) * double(n)))
            throw PivotBreakdown("sigma_polynomial: degenerate gamma (recurrence pivot vanished)");
        a.push_back(-(rc.Q * at(n - 1) + rc.P * at(n - 2)) / rc.R);
    }
    const RecurrenceCoeffs rc = recurrence_coeffs(family, base, delta0, N + 1);
    out.coeffs = {rc.Q * at(N) + rc.P * at(N - 1)};
    return out;
}

/// A terminated series: exactly N + 1 coefficients, last one nonzero.
struct FiniteBetaSum {
    BetaSeries series;
    int N = 0;
};

/// The exact (N+1)-term closed-form sum, available when the integer relation
/// holds and sigma (or the family's scalar condition) is satisfied.
inline FiniteBetaSum closed_form_solution(const CheParams& P, Family family, int N) {
    P.validate();
    if (family == Family::E)
        throw UnsupportedFamily("closed_form_solution: family E series do not terminate");
    const auto tc = detect_termination(P, family, N,
                                       family == Family::D ? std::optional<Complex>(P.gamma - 2.0 - double(N))
                                                           : std::nullopt);
    if (!tc || tc->N != N)
        throw NotTerminating(std::string("closed_form_solution: the family ") + family_name(family) +
                             " termination relation does not hold at N = " + std::to_string(N));
    std::optional<Complex> delta0_override;
    if (family == Family::D) delta0_override = P.gamma - 2.0 - double(N);
    const BetaSeries series = build_series(family, P, delta0_override, N + 10, 0.0);
    if (!series.terminated || int(series.coeffs.size()) != N + 1)
        throw NotTerminating("closed_form_solution: series does not terminate at N = " + std::to_string(N) +
                             " (sigma or the scalar condition is not satisfied)");
    return {series, N};
}

namespace detail {

inline PolyC biv_at_delta(const Biv& f, Complex delta) {
    std::vector<Complex> c;
    c.reserve(f.coeffs().size());
    for (const PolyC& ci : f.coeffs()) c.push_back(ci.eval(delta));
    return PolyC(std::move(c));
}

inline Complex biv_eval(const Biv& f, Complex delta, Complex sigma) {
    return biv_at_delta(f, delta).eval(sigma);
}

inline Biv biv_ddelta(const Biv& f) {
    return f.map([](const PolyC& c) { return c.derivative(); });
}

} // namespace detail

/// One family-D termination point.
struct DeltaSigma {
    Complex delta{};
    Complex sigma{};
};

/// Solves the family-D termination system at N in {0, 1}: with
/// delta0 = gamma - 2 - N pinned, the two tail conditions form a polynomial
/// system in (delta, sigma). Roots are located twice over -- by eliminating
/// sigma with a resultant and by Newton iteration seeded from the family-A
/// termination locus plus random starts -- then every candidate is verified
/// by actually terminating the series and checking its residual.
inline std::vector<DeltaSigma> solve_family_d(const CheParams& base, int N) {
    base.validate();
    if (std::abs(base.alpha) > kEqTol) throw ConstraintViolation("family D: alpha = 0 required");
    if (N != 0 && N != 1) throw DomainError("solve_family_d: only N in {0, 1} is supported");

    const Complex d0 = base.gamma - 2.0 - double(N);
    const auto coeff_at = [&](Complex delta, Complex sigma, int n) {
        CheParams q = base;
        q.alpha = 0.0;
        q.delta = delta;
        q.sigma = sigma;
        return recurrence_coeffs(Family::D, q, d0, n);
    };
    // Every recurrence coefficient is affine in (delta, sigma), so three
    // evaluations recover it exactly.
    struct AffineSet { Biv R, Q, P, L; };
    const auto affine = [&](int n) -> AffineSet {
        const auto c00 = coeff_at(0.0, 0.0, n);
        const auto c10 = coeff_at(1.0, 0.0, n);
        const auto c01 = coeff_at(0.0, 1.0, n);
        const auto make = [](Complex f00, Complex f10, Complex f01) -> Biv {
            const PolyC in_delta{std::vector<Complex>{f00, f10 - f00}};
            const PolyC in_sigma{f01 - f00};
            return Biv(std::vector<PolyC>{in_delta, in_sigma});
        };
        return {make(c00.R, c10.R, c01.R), make(c00.Q, c10.Q, c01.Q),
                make(c00.P, c10.P, c01.P), make(c00.L, c10.L, c01.L)};
    };

    Biv F1, F2;
    if (N == 0) {
        F1 = affine(1).Q; // a_1 = 0
        F2 = affine(2).P; // a_2 = 0
    } else {
        const auto s1 = affine(1), s2 = affine(2), s3 = affine(3);
        const Biv r1 = s1.R; // sigma- and delta-free
        F1 = s2.Q * s1.Q - r1 * s2.P;
        F2 = s3.P * s1.Q - r1 * s3.L;
    }
    const Biv F1s = F1.derivative(), F2s = F2.derivative();
    const Biv F1d = detail::biv_ddelta(F1), F2d = detail::biv_ddelta(F2);

    std::vector<DeltaSigma> candidates;
    const auto push_candidate = [&](Complex d, Complex s) {
        if (is_finite(d) && is_finite(s)) candidates.push_back({d, s});
    };

    // Elimination route.
    try {
        const PolyC res = resultant(F1, F2);
        if (res.degree() >= 1) {
            for (Complex dstar : poly_roots(res.coeffs())) {
                for (const Biv* f : {&F1, &F2}) {
                    const PolyC fs = detail::biv_at_delta(*f, dstar);
                    if (fs.degree() >= 1)
                        for (Complex sstar : poly_roots(fs.coeffs())) push_candidate(dstar, sstar);
                }
            }
        }
    } catch (const Error&) {
        // the Newton routes below still cover the solution set
    }

    // Seeds from the family-A termination locus at N' = 0 .. N+2.
    for (int np = 0; np <= N + 2; ++np) {
        const Complex da = double(np) + 2.0 - base.gamma;
        CheParams pa = base;
        pa.alpha = 0.0;
        pa.delta = da;
        pa.sigma = 0.0;
        try {
            const SigmaPolynomial sp = sigma_polynomial(pa, Family::A, np);
            for (Complex r : poly_roots(sp.coeffs)) push_candidate(da, r);
        } catch (const Error&) {}
    }
    // Random seeds, fixed generator for reproducibility.
    std::mt19937 rng(9151150u);
    std::uniform_real_distribution<double> unit(-3.0, 3.0);
    for (int k = 0; k < 20; ++k) push_candidate(Complex(unit(rng), unit(rng)), Complex(unit(rng), unit(rng)));

    // Newton polish on every candidate. After convergence two further full
    // steps push the pair to the rounding limit; downstream closed forms are
    // sensitive to the last bits of (delta, sigma).
    const auto newton_step = [&](Complex& d, Complex& s) -> bool {
        const Complex f1 = detail::biv_eval(F1, d, s), f2 = detail::biv_eval(F2, d, s);
        const Complex j11 = detail::biv_eval(F1d, d, s), j12 = detail::biv_eval(F1s, d, s);
        const Complex j21 = detail::biv_eval(F2d, d, s), j22 = detail::biv_eval(F2s, d, s);
        const Complex det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-30) return false;
        const Complex dd = (f1 * j22 - f2 * j12) / det;
        const Complex ds = (j11 * f2 - j21 * f1) / det;
        d -= dd;
        s -= ds;
        return is_finite(d) && is_finite(s);
    };
    std::vector<DeltaSigma> polished;
    for (const DeltaSigma& seed : candidates) {
        Complex d = seed.delta, s = seed.sigma;
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            const Complex d_prev = d, s_prev = s;
            if (!newton_step(d, s)) break;
            if (std::abs(d - d_prev) + std::abs(s - s_prev) <
                1e-14 * (1.0 + std::abs(d) + std::abs(s))) {
                const double scale = 1.0 + std::abs(d) + std::abs(s);
                ok = std::abs(detail::biv_eval(F1, d, s)) < 1e-10 * scale * scale &&
                     std::abs(detail::biv_eval(F2, d, s)) < 1e-10 * scale * scale;
                break;
            }
        }
        if (ok) {
            for (int extra = 0; extra < 2; ++extra) {
                Complex d2 = d, s2 = s;
                if (!newton_step(d2, s2)) break;
                d = d2;
                s = s2;
            }
            polished.push_back({d, s});
        }
    }

    // Merge duplicates, then keep only pairs that demonstrably terminate the
    // series with a healthy residual.
    std::vector<DeltaSigma> merged;
    for (const DeltaSigma& c : polished) {
        bool dup = false;
        for (const DeltaSigma& m : merged)
            if (std::abs(c.delta - m.delta) + std::abs(c.sigma - m.sigma) < 1e-8) { dup = true; break; }
        if (!dup) merged.push_back(c);
    }
    std::vector<DeltaSigma> verified;
    for (const DeltaSigma& c : merged) {
        CheParams q = base;
        q.alpha = 0.0;
        q.delta = c.delta;
        q.sigma = c.sigma;
        try {
            const FiniteBetaSum sum = closed_form_solution(q, Family::D, N);
            if (series_residual_report(sum.series).normalized() < 1e-9) verified.push_back(c);
        } catch (const Error&) {}
    }
    std::sort(verified.begin(), verified.end(), [](const DeltaSigma& x, const DeltaSigma& y) {
        if (x.delta.real() != y.delta.real()) return x.delta.real() < y.delta.real();
        if (x.delta.imag() != y.delta.imag()) return x.delta.imag() < y.delta.imag();
        if (x.sigma.real() != y.sigma.real()) return x.sigma.real() < y.sigma.real();
        return x.sigma.imag() < y.sigma.imag();
    });
    return verified;
}

using ComplexL = std::complex<long double>;

/// A finite Beta sum rewritten as A * B_z(gamma0, delta0) + phi(z) * z^{gamma0-1}(1-z)^{delta0-1}
/// with polynomial phi. The representation is ill-conditioned near z = 1
/// (the two pieces cancel), so the reduction also keeps extended-precision
/// master copies of A and phi, which evaluation prefers.
struct ElementarySolution {
    Complex A_const{};
    PolyC phi;
    Complex gamma0{};
    Complex delta0{};
    ComplexL A_ext{};
    Poly<ComplexL> phi_ext;
    bool has_ext = false;
};

inline Complex evaluate_elementary(const ElementarySolution& e, Complex z) {
    if (std::abs(z) == 0.0) return 0.0;
    // The pieces A u_0 and phi u_0' can exceed their sum by orders of
    // magnitude; everything is combined in extended precision and rounded once.
    const auto lift = [](Complex v) { return ComplexL(v.real(), v.imag()); };
    const ComplexL zl = lift(z), g0 = lift(e.gamma0), d0 = lift(e.delta0);
    const ComplexL a_const = e.has_ext ? e.A_ext : lift(e.A_const);

    ComplexL beta_piece;
    if (const auto m = near_nonpositive_integer(e.gamma0 + e.delta0)) {
        ComplexL sum = 1.0L, term = 1.0L;
        for (long k = 0; k < -*m; ++k) {
            term *= (g0 + d0 + ComplexL(double(k))) / (ComplexL(1.0L) + g0 + ComplexL(double(k))) * zl;
            sum += term;
        }
        beta_piece = std::pow(zl, g0) * std::pow(ComplexL(1.0L) - zl, d0) / g0 * sum;
    } else {
        beta_piece = lift(inc_beta(e.gamma0, e.delta0, z));
    }

    ComplexL phi_val = 0.0L;
    if (e.has_ext) {
        for (std::size_t i = e.phi_ext.coeffs().size(); i-- > 0;)
            phi_val = phi_val * zl + e.phi_ext.coeffs()[i];
    } else {
        for (std::size_t i = e.phi.coeffs().size(); i-- > 0;)
            phi_val = phi_val * zl + lift(e.phi.coeffs()[i]);
    }
    const ComplexL du0 = std::pow(zl, g0 - ComplexL(1.0L)) * std::pow(ComplexL(1.0L) - zl, d0 - ComplexL(1.0L));

    const ComplexL out = a_const * beta_piece + phi_val * du0;
    return ensure_finite(Complex(double(out.real()), double(out.imag())), "evaluate_elementary");
}

/// Rewrites a terminated sum in the elementary form above. Each u_m is pushed
/// down to u_0 through the step-up relation
///   u_m = (gamma_{m-1} u_{m-1} + z^m (z-1) u_0') / (gamma_{m-1} + delta0);
/// if a divisor vanishes, u_m is taken directly from its finite polynomial
/// representation when gamma_m + delta0 is a non-positive integer.
inline ElementarySolution reduce_to_elementary(const FiniteBetaSum& sum) {
    const BetaSeries& s = sum.series;
    if (!s.terminated) throw DomainError("reduce_to_elementary: series must be terminated");
    if (std::abs(s.s) > 0.0)
        throw UnsupportedFamily("reduce_to_elementary: exponential prefactor not supported");
    if (!(s.gamma0.real() > 0.0)) throw DomainError("reduce_to_elementary: Re(gamma0) > 0 required");

    // Flatten difference mode into plain coefficients over u_m. The whole
    // recursion runs in extended precision: phi is a small residue of
    // cancelling O(1) contributions.
    using CL = ComplexL;
    using PolyL = Poly<CL>;
    const auto lift = [](Complex v) { return CL(v.real(), v.imag()); };

    std::vector<CL> b;
    if (s.mode == TermMode::Single) {
        b.reserve(s.coeffs.size());
        for (Complex a : s.coeffs) b.push_back(lift(a));
    } else {
        b.assign(s.coeffs.size() + 1, CL(0.0L));
        for (std::size_t n = 0; n < s.coeffs.size(); ++n) {
            b[n] += lift(s.coeffs[n]);
            b[n + 1] -= lift(s.coeffs[n]);
        }
    }

    const CL gamma0 = lift(s.gamma0), delta0 = lift(s.delta0);
    CL A_const = 0.0L;
    PolyL phi;
    CL c = 1.0L;  // c_0
    PolyL psi;    // psi_0 = 0
    bool chain_ok = true;
    for (std::size_t m = 0; m < b.size(); ++m) {
        if (m > 0) {
            const CL gm = gamma0 + CL(double(m - 1));
            const CL denom = gm + delta0;
            if (chain_ok && std::abs(denom) < 1e-10L) chain_ok = false;
            if (chain_ok) {
                std::vector<CL> mono(m + 2, CL(0.0L));
                mono[m] = -1.0L;
                mono[m + 1] = 1.0L; // z^m (z-1)
                psi = (CL(1.0L) / denom) * (gm * psi + PolyL(std::move(mono)));
                c = gm * c / denom;
            } else {
                const CL gmm = gamma0 + CL(double(m));
                const auto k = near_nonpositive_integer(s.gamma0 + double(m) + s.delta0);
                if (!k)
                    throw StepBreakdown("reduce_to_elementary: gamma_n + delta0 = 0 and the term has no "
                                        "finite polynomial representation");
                // u_m = z^{m+1}(1-z) P(z) u_0' / gamma_m with P the finite
                // hypergeometric polynomial of degree -k.
                std::vector<CL> pc(std::size_t(-*k) + 1);
                CL t = 1.0L;
                for (std::size_t j = 0; j < pc.size(); ++j) {
                    pc[j] = t;
                    t *= (gmm + delta0 + CL(double(j))) / (CL(1.0L) + gmm + CL(double(j)));
                }
                PolyL pol(std::move(pc));
                std::vector<CL> mono(m + 3, CL(0.0L));
                mono[m + 1] = 1.0L;
                mono[m + 2] = -1.0L; // z^{m+1}(1-z)
                psi = (CL(1.0L) / gmm) * (PolyL(std::move(mono)) * pol);
                c = 0.0L;
            }
        }
        A_const += b[m] * c;
        phi = phi + PolyL(b[m]) * psi;
    }

    std::vector<Complex> phi_coeffs;
    phi_coeffs.reserve(phi.coeffs().size());
    for (const CL& v : phi.coeffs()) phi_coeffs.push_back(Complex(double(v.real()), double(v.imag())));
    ElementarySolution out;
    out.A_const = Complex(double(A_const.real()), double(A_const.imag()));
    out.phi = PolyC(std::move(phi_coeffs));
    out.gamma0 = s.gamma0;
    out.delta0 = s.delta0;
    out.A_ext = A_const;
    out.phi_ext = std::move(phi);
    out.has_ext = true;
    return out;
}

} // namespace heunbeta
