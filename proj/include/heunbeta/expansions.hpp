#pragma once

// Series solutions u = e^{sz} sum_n a_n T_n(z) of the confluent Heun equation
// with incomplete-Beta expansion functions u_n = B_z(gamma0 + n, delta0),
// T_n = u_n (single mode) or T_n = u_n - u_{n+1} (difference mode).
//
// Five construction schemes are supported, each valid under one parameter
// constraint and each with its own coefficient recurrence (gamma_k below
// means gamma0 + k, and gamma0 = 1 - gamma always):
//
//   A  (alpha = 0, single, three-term, delta0 = 1 - delta)
//      R_n = (gamma-1+gamma_n) gamma_{n-1}
//      Q_n = 4p gamma_{n-1} - (gamma-1+gamma_{n-1})(gamma_{n-2}+delta0) + sigma
//      P_n = -4p (gamma_{n-2}+delta0)
//
//   B  (sigma = 0, single, three-term, delta0 = 1 - delta)
//      R_n = (gamma-1+gamma_n) gamma_{n-2}
//      Q_n = 4p gamma_{n-2} - (gamma-1+gamma_{n-1})(gamma_{n-3}+delta0)
//      P_n = -4p (gamma_{n-3}+delta0) - 4p alpha
//
//   C  (sigma = 4 p alpha, difference, three-term, delta0 = -delta)
//      R_n, Q_n as in A;  P_n = -4p (gamma_{n-2}+delta0) - sigma
//
//   D  (alpha = 0, difference, four-term, delta0 free until termination)
//      R_n = (gamma-1+gamma_n) gamma_{n-1}
//      Q_n = 4p gamma_{n-1} - (gamma-1+gamma_{n-1})(gamma_{n-2}+delta0)
//            - (gamma+delta-2+delta0+gamma_n) gamma_{n-1} + sigma
//      P_n = -4p (gamma_{n-2}+delta0) - 4p gamma_{n-1}
//            + (gamma+delta-2+delta0+gamma_{n-1})(gamma_{n-2}+delta0) - sigma
//      L_n = 4p (gamma_{n-2}+delta0)
//
//   E  (sigma a root of the pretransform quadratic, single, four-term,
//       delta0 = 1 - delta, prefactor exponent s = -sigma/gamma)
//      see derive_family_e below; docs/expansion_e.md carries the derivation.
//
// In every case R_n a_n + Q_n a_{n-1} + P_n a_{n-2} (+ L_n a_{n-3}) = 0 with
// a_0 = 1 and negative-index coefficients zero.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heunbeta/che.hpp"
#include "heunbeta/special_functions.hpp"

namespace heunbeta {

enum class Family { A, B, C, D, E };
enum class TermMode { Single, Difference };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::A: return "A";
        case Family::B: return "B";
        case Family::C: return "C";
        case Family::D: return "D";
        case Family::E: return "E";
    }
    return "?";
}

inline std::optional<Family> parse_family(std::string_view s) {
    if (s.size() != 1) return std::nullopt;
    switch (s[0]) {
        case 'A': case 'a': return Family::A;
        case 'B': case 'b': return Family::B;
        case 'C': case 'c': return Family::C;
        case 'D': case 'd': return Family::D;
        case 'E': case 'e': return Family::E;
    }
    return std::nullopt;
}

/// One row of a family recurrence. L participates only when four_term is set.
struct RecurrenceCoeffs {
    Complex R{};
    Complex Q{};
    Complex P{};
    Complex L{};
    bool four_term = false;
};

/// Absolute defect of the family applicability constraint, with the relation
/// name used in diagnostics.
inline std::pair<double, const char*> family_constraint_defect(Family family, const CheParams& P) {
    switch (family) {
        case Family::A:
        case Family::D:
            return {std::abs(P.alpha), "alpha = 0 required"};
        case Family::B:
            return {std::abs(P.sigma), "sigma = 0 required"};
        case Family::C:
            return {std::abs(P.sigma - 4.0 * P.p * P.alpha), "sigma = 4*p*alpha required"};
        case Family::E: {
            const Complex defect = P.sigma * P.sigma +
                                   P.gamma * (-4.0 * P.p + P.gamma + P.delta) * P.sigma -
                                   4.0 * P.p * P.alpha * P.gamma * P.gamma;
            return {std::abs(defect), "sigma must be a root of the pretransform quadratic"};
        }
    }
    return {0.0, ""};
}

/// Recurrence coefficients for families A-D at index n >= 0. Family E is
/// rejected here; its coefficients come from derive_family_e.
inline RecurrenceCoeffs recurrence_coeffs(Family family, const CheParams& P, Complex delta0, int n) {
    P.validate();
    const Complex gamma0 = 1.0 - P.gamma;
    const auto g = [&](int k) { return gamma0 + double(k); };
    const Complex p4 = 4.0 * P.p;

    RecurrenceCoeffs rc;
    switch (family) {
        case Family::A:
            rc.R = (P.gamma - 1.0 + g(n)) * g(n - 1);
            rc.Q = p4 * g(n - 1) - (P.gamma - 1.0 + g(n - 1)) * (g(n - 2) + delta0) + P.sigma;
            rc.P = -p4 * (g(n - 2) + delta0);
            break;
        case Family::B:
            rc.R = (P.gamma - 1.0 + g(n)) * g(n - 2);
            rc.Q = p4 * g(n - 2) - (P.gamma - 1.0 + g(n - 1)) * (g(n - 3) + delta0);
            rc.P = -p4 * (g(n - 3) + delta0) - p4 * P.alpha;
            break;
        case Family::C:
            rc.R = (P.gamma - 1.0 + g(n)) * g(n - 1);
            rc.Q = p4 * g(n - 1) - (P.gamma - 1.0 + g(n - 1)) * (g(n - 2) + delta0) + P.sigma;
            rc.P = -p4 * (g(n - 2) + delta0) - P.sigma;
            break;
        case Family::D: {
            const Complex t = P.gamma + P.delta - 2.0 + delta0;
            rc.R = (P.gamma - 1.0 + g(n)) * g(n - 1);
            rc.Q = p4 * g(n - 1) - (P.gamma - 1.0 + g(n - 1)) * (g(n - 2) + delta0) -
                   (t + g(n)) * g(n - 1) + P.sigma;
            rc.P = -p4 * (g(n - 2) + delta0) - p4 * g(n - 1) +
                   (t + g(n - 1)) * (g(n - 2) + delta0) - P.sigma;
            rc.L = p4 * (g(n - 2) + delta0);
            rc.four_term = true;
            break;
        }
        case Family::E:
            throw UnsupportedFamily("recurrence_coeffs: family E coefficients come from derive_family_e");
    }
    return rc;
}

namespace detail {

// Four-term recurrence of the family-E expansion, obtained by substituting
// v = sum a_n v_n into the transformed equation and replacing v'_n by
// z^2 v'_{n-2} before applying the contiguous relations.
inline RecurrenceCoeffs family_e_rec(const CheParams& P, Complex s, Complex delta0, int n) {
    const Complex gamma0 = 1.0 - P.gamma;
    const auto g = [&](int k) { return gamma0 + double(k); };
    const Complex w = 2.0 * s + 4.0 * P.p;
    RecurrenceCoeffs rc;
    rc.R = (P.gamma - 1.0 + g(n)) * g(n - 3);
    rc.Q = w * g(n - 3) - (P.gamma - 1.0 + g(n - 1)) * (g(n - 4) + delta0);
    rc.P = -w * (g(n - 4) + delta0);
    rc.L = -s * (s + 4.0 * P.p);
    rc.four_term = true;
    return rc;
}

struct GeneratedCoeffs {
    std::vector<Complex> coeffs;
    bool terminated = false;
};

// Forward generation from a_0 = 1. Stops early when
//  - enough consecutive coefficients vanish that the recurrence can only
//    produce zeros from then on (two for a three-term relation, three for a
//    four-term one): the series has terminated, and the zero tail is dropped;
//  - the geometric tail bound at the reference radius 0.95 falls below
//    tail_tol (coefficient ratios tend to 1, so |a_n| 0.95^n / 0.05 bounds
//    everything the evaluation grid can see);
//  - max_terms coefficients exist.
template <class Rec>
GeneratedCoeffs generate_coeffs(Rec&& rec, bool four_term, int max_terms, double tail_tol) {
    if (max_terms < 1) throw DomainError("build_series: max_terms must be >= 1");
    GeneratedCoeffs out;
    out.coeffs.push_back(1.0);
    const int need_zeros = four_term ? 3 : 2;
    int zero_run = 0;
    double running_max = 1.0;
    double last_nonzero = 1.0;
    const auto at = [&](int k) -> Complex {
        return (k >= 0 && k < int(out.coeffs.size())) ? out.coeffs[k] : Complex(0.0);
    };
    for (int n = 1; n < max_terms; ++n) {
        const RecurrenceCoeffs rc = rec(n);
        const double pivot_scale = std::max(1.0, double(n) * double(n));
        if (std::abs(rc.R) <= 1e-12 * pivot_scale)
            throw PivotBreakdown("build_series: recurrence pivot vanished at n = " + std::to_string(n) +
                                 " (degenerate gamma)");
        Complex num = rc.Q * at(n - 1) + rc.P * at(n - 2);
        if (four_term) num += rc.L * at(n - 3);
        const Complex a = -num / rc.R;
        if (!is_finite(a)) throw DomainError("build_series: non-finite coefficient");
        out.coeffs.push_back(a);
        running_max = std::max(running_max, std::abs(a));
        // A terminating coefficient sits at roundoff level AND collapses
        // relative to the last surviving coefficient; a merely fast-decaying
        // series fails the second test.
        const bool zeroish =
            std::abs(a) <= 1e-12 * running_max && std::abs(a) <= 1e-6 * last_nonzero;
        if (zeroish) {
            if (++zero_run == need_zeros) {
                out.coeffs.resize(out.coeffs.size() - zero_run);
                out.terminated = true;
                break;
            }
        } else {
            zero_run = 0;
            last_nonzero = std::abs(a);
        }
        if (tail_tol > 0.0 && n >= 25) {
            const double bound = std::abs(a) * std::pow(0.95, double(n)) / 0.05;
            if (bound < tail_tol) break;
        }
    }
    return out;
}

} // namespace detail

/// An expansion: family tag, expansion-function parameters, prefactor
/// exponent, term mode, and the generated coefficients (a_0 = 1).
struct BetaSeries {
    Family family = Family::A;
    CheParams params{};
    Complex gamma0{};
    Complex delta0{};
    Complex s{}; // exponential prefactor exponent; zero except family E
    TermMode mode = TermMode::Single;
    std::vector<Complex> coeffs;
    bool terminated = false;
};

/// Family-E expansion: u = e^{sz} sum a_n B_z(1-gamma+n, 1-delta) with
/// s = -sigma/gamma, available when sigma is a root of the pretransform
/// quadratic. Correctness is adjudicated by the residual, not by the
/// derivation that produced the recurrence.
inline BetaSeries derive_family_e(const CheParams& P, int max_terms = 2000, double tail_tol = 1e-12) {
    P.validate();
    if (!(P.gamma.real() < 1.0)) throw DomainError("derive_family_e: Re(gamma) < 1 required");
    const auto [defect, relation] = family_constraint_defect(Family::E, P);
    if (defect > kEqTol) throw ConstraintViolation(std::string("family E: ") + relation);
    const Complex s = -P.sigma / P.gamma;
    auto gen = detail::generate_coeffs(
        [&](int n) { return detail::family_e_rec(P, s, 1.0 - P.delta, n); }, true, max_terms, tail_tol);
    BetaSeries series;
    series.family = Family::E;
    series.params = P;
    series.gamma0 = 1.0 - P.gamma;
    series.delta0 = 1.0 - P.delta;
    series.s = s;
    series.mode = TermMode::Single;
    series.coeffs = std::move(gen.coeffs);
    series.terminated = gen.terminated;
    return series;
}

/// Builds the coefficient sequence of the requested family. delta0_override
/// applies to family D only, where delta0 is otherwise fixed to the
/// terminating value gamma - 2 (the N = 0 choice).
inline BetaSeries build_series(Family family, const CheParams& P,
                               std::optional<Complex> delta0_override = std::nullopt,
                               int max_terms = 200, double tail_tol = 1e-12) {
    P.validate();
    if (family == Family::E) return derive_family_e(P, max_terms, tail_tol);
    if (!(P.gamma.real() < 1.0)) throw DomainError("build_series: Re(gamma) < 1 required");
    const auto [defect, relation] = family_constraint_defect(family, P);
    if (defect > kEqTol)
        throw ConstraintViolation(std::string("family ") + family_name(family) + ": " + relation);

    Complex delta0;
    switch (family) {
        case Family::A:
        case Family::B: delta0 = 1.0 - P.delta; break;
        case Family::C: delta0 = -P.delta; break;
        case Family::D: delta0 = delta0_override.value_or(P.gamma - 2.0); break;
        case Family::E: break; // handled above
    }

    const bool four_term = (family == Family::D);
    auto gen = detail::generate_coeffs(
        [&](int n) { return recurrence_coeffs(family, P, delta0, n); }, four_term, max_terms, tail_tol);

    BetaSeries series;
    series.family = family;
    series.params = P;
    series.gamma0 = 1.0 - P.gamma;
    series.delta0 = delta0;
    series.s = 0.0;
    series.mode = (family == Family::C || family == Family::D) ? TermMode::Difference : TermMode::Single;
    series.coeffs = std::move(gen.coeffs);
    series.terminated = gen.terminated;
    return series;
}

namespace detail {

// n-th expansion function at z. The difference term is computed without
// cancellation through the exact identity u_n - u_{n+1} = B_z(gamma_n, delta0 + 1)
// (the integrands differ by one factor of 1 - t).
inline Complex series_term(const BetaSeries& s, int n, Complex z) {
    const Complex gn = s.gamma0 + double(n);
    if (s.mode == TermMode::Single) return inc_beta(gn, s.delta0, z);
    return inc_beta(gn, s.delta0 + 1.0, z);
}

} // namespace detail

/// Partial sum plus, for non-terminated series, the geometric tail bound
/// |a_M T_M(z)| |z| / (1 - |z|).
struct SeriesValue {
    Complex u{};
    double tail_bound = 0.0;
};

/// Value and analytic first/second derivatives.
struct SeriesJet {
    Complex u{};
    Complex du{};
    Complex d2u{};
    double tail_bound = 0.0;

    SolutionJet jet() const { return {u, du, d2u}; }
};

inline SeriesValue evaluate(const BetaSeries& s, Complex z) {
    if (s.coeffs.empty()) throw DomainError("evaluate: empty series");
    if (std::abs(z) == 0.0) return {Complex(0.0), 0.0};
    const bool at_one = near_real(z) && std::abs(z.real() - 1.0) < 1e-15;
    const double b_real = s.mode == TermMode::Single ? s.delta0.real() : s.delta0.real() + 1.0;
    if (at_one && !(b_real > 0.0))
        throw DomainError("evaluate: z = 1 requires the term exponent to have positive real part");
    if (!at_one && std::abs(z) >= 1.0) throw DomainError("evaluate: |z| < 1 required");

    Complex acc = 0.0;
    Complex last_term = 0.0;
    for (std::size_t n = 0; n < s.coeffs.size(); ++n) {
        last_term = s.coeffs[n] * detail::series_term(s, int(n), z);
        acc += last_term;
    }
    SeriesValue out;
    out.u = std::exp(s.s * z) * acc;
    if (!s.terminated && !at_one)
        out.tail_bound = std::abs(std::exp(s.s * z)) * std::abs(last_term) * std::abs(z) / (1.0 - std::abs(z));
    return out;
}

/// Analytic derivatives: with w = z^{gamma0-1}(1-z)^{delta0-1} and
/// S(z) = sum a_n z^n, the inner series v satisfies v' = w S (single mode) or
/// v' = w (1-z) S (difference mode), and v'' follows by one more product rule.
inline SeriesJet evaluate_with_derivatives(const BetaSeries& s, Complex z) {
    if (std::abs(z) == 0.0 || (near_real(z) && std::abs(z.real() - 1.0) < 1e-15))
        throw DomainError("evaluate_with_derivatives: z must avoid the singular points 0, 1");
    if (std::abs(z) >= 1.0) throw DomainError("evaluate_with_derivatives: |z| < 1 required");

    const SeriesValue val = evaluate(s, z);
    const Complex v = val.u / std::exp(s.s * z); // inner series value

    Complex S = 0.0, dS = 0.0;
    for (std::size_t n = s.coeffs.size(); n-- > 0;) {
        dS = dS * z + S;
        S = S * z + s.coeffs[n];
    }
    const Complex w = std::pow(z, s.gamma0 - 1.0) * std::pow(1.0 - z, s.delta0 - 1.0);
    const Complex wl = (s.gamma0 - 1.0) / z - (s.delta0 - 1.0) / (1.0 - z); // w'/w

    Complex dv, d2v;
    if (s.mode == TermMode::Single) {
        dv = w * S;
        d2v = w * (wl * S + dS);
    } else {
        dv = w * (1.0 - z) * S;
        d2v = w * ((1.0 - z) * wl * S - S + (1.0 - z) * dS);
    }

    const Complex e = std::exp(s.s * z);
    SeriesJet jet;
    jet.u = e * v;
    jet.du = e * (s.s * v + dv);
    jet.d2u = e * (s.s * s.s * v + 2.0 * s.s * dv + d2v);
    jet.tail_bound = val.tail_bound;
    ensure_finite(jet.d2u, "evaluate_with_derivatives");
    return jet;
}

/// Adapter for residual_report / integrate_che initial data.
inline std::function<SolutionJet(Complex)> make_solution_fn(const BetaSeries& s) {
    return [s](Complex z) { return evaluate_with_derivatives(s, z).jet(); };
}

inline ResidualReport series_residual_report(const BetaSeries& s) {
    return residual_report(s.params, make_solution_fn(s));
}

/// Tail behaviour of the last 20 stored coefficients and terms. The
/// coefficient ratios tend to 1 and the term ratios at z tend to |z|; both
/// limits are what makes the series converge on the open unit disk.
struct ConvergenceDiagnostics {
    std::vector<Complex> coeff_ratio_tail; // a_{n+1} / a_n
    std::vector<double> term_ratio_tail;   // |T_{n+1}(z) / T_n(z)|
    double estimated_limit = 0.0;          // |a_M / a_{M-1}|
};

inline ConvergenceDiagnostics convergence_diagnostics(const BetaSeries& s, Complex z) {
    ConvergenceDiagnostics d;
    if (s.terminated || s.coeffs.size() < 50) return d; // empty tails
    const std::size_t m = s.coeffs.size();
    const std::size_t first = m - 21;
    for (std::size_t n = first; n + 1 < m; ++n) {
        d.coeff_ratio_tail.push_back(s.coeffs[n + 1] / s.coeffs[n]);
        const Complex tn = detail::series_term(s, int(n), z);
        const Complex tn1 = detail::series_term(s, int(n) + 1, z);
        d.term_ratio_tail.push_back(std::abs(tn1) / std::abs(tn));
    }
    d.estimated_limit = std::abs(d.coeff_ratio_tail.back());
    return d;
}

} // namespace heunbeta
