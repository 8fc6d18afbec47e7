#pragma once

// Incomplete Beta function B_z(a,b), its derivative, the first-row Gauss
// hypergeometric series 2F1(1, beta; c; z) it is built from, and the
// contiguous step-up recurrence. Principal branches of z^a and (1-z)^b
// throughout; evaluation domain is the open unit disk (plus z = 1 when the
// complete Beta function exists).

#include <cmath>
#include <numbers>

#include "heunbeta/scalar.hpp"

namespace heunbeta {

/// Parameter pair of the incomplete Beta function; evaluation requires Re(a) > 0.
struct BetaArgs {
    Complex a{};
    Complex b{};
};

namespace detail {

// Lanczos approximation, g = 7, 9 coefficients. Good to ~1e-14 relative for
// the moderate arguments this library meets.
inline Complex lgamma_complex(Complex z) {
    static constexpr double kLanczos[9] = {
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    };
    if (near_nonpositive_integer(z, 1e-13)) throw DomainError("lgamma: pole at non-positive integer");
    if (z.real() < 0.5) {
        // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        const Complex s = std::sin(std::numbers::pi * z);
        if (std::abs(s) == 0.0) throw DomainError("lgamma: reflection hit a pole");
        return std::log(std::numbers::pi / s) - lgamma_complex(1.0 - z);
    }
    const Complex zm1 = z - 1.0;
    Complex acc = kLanczos[0];
    for (int k = 1; k < 9; ++k) acc += kLanczos[k] / (zm1 + double(k));
    const Complex t = zm1 + 7.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (zm1 + 0.5) * std::log(t) - t + std::log(acc);
}

// Modified Lentz evaluation of 1 / (1 + a_1/(1 + a_2/(1 + ...))).
template <class Gen>
Complex lentz_unit_cf(Gen&& partial_numerator, int max_iter) {
    const double tiny = 1e-290;
    Complex f = tiny, c = f, d = 0.0;
    for (int j = 1; j <= max_iter; ++j) {
        const Complex aj = (j == 1) ? Complex(1.0) : partial_numerator(j - 1);
        d = 1.0 + aj * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aj / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const Complex delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < kSeriesRelStop) return f;
    }
    throw ConvergenceError("continued fraction: iteration cap reached");
}

// Direct power series for 2F1(1, beta; c; z); ratio of successive terms tends
// to z, so this converges on the whole open disk (slowly near the boundary).
inline Complex gauss_2f1_row1_series(Complex beta_param, Complex c, Complex z, int max_iter) {
    Complex sum = 1.0, term = 1.0;
    int quiet = 0;
    for (int k = 0; k < max_iter; ++k) {
        term *= (beta_param + double(k)) / (c + double(k)) * z;
        sum += term;
        if (std::abs(term) <= kSeriesRelStop * std::abs(sum)) {
            if (++quiet >= 2) return sum;
        } else {
            quiet = 0;
        }
    }
    throw ConvergenceError("2F1 series: iteration cap reached");
}

} // namespace detail

/// Complete Beta function B(a,b) = Gamma(a)Gamma(b)/Gamma(a+b).
inline Complex complete_beta(Complex a, Complex b) {
    return ensure_finite(
        std::exp(detail::lgamma_complex(a) + detail::lgamma_complex(b) - detail::lgamma_complex(a + b)),
        "complete_beta");
}

/// 2F1(1, beta; c; z). Exact finite polynomial when beta is a non-positive
/// integer; direct series for |z| <= 0.75; otherwise the incomplete-Beta
/// continued fraction, with the series as fallback.
inline Complex gauss_2f1_row1(Complex beta_param, Complex c, Complex z) {
    if (near_nonpositive_integer(c))
        throw DomainError("2F1: third parameter must not be a non-positive integer");
    if (std::abs(z) == 0.0) return 1.0;

    if (auto m = near_nonpositive_integer(beta_param)) {
        // (beta)_k vanishes past k = -beta: finite polynomial, any z. The sum
        // alternates and can cancel heavily near z = 1, so accumulate in
        // extended precision.
        using CL = std::complex<long double>;
        const auto lift = [](Complex v) { return CL(v.real(), v.imag()); };
        const long deg = -*m;
        CL sum = 1.0L, term = 1.0L;
        for (long k = 0; k < deg; ++k) {
            term *= lift(beta_param + double(k)) / lift(c + double(k)) * lift(z);
            sum += term;
        }
        return ensure_finite(Complex(double(sum.real()), double(sum.imag())), "2F1 polynomial");
    }

    if (std::abs(z) >= 1.0) throw DomainError("2F1: |z| < 1 required");
    if (std::abs(z) <= kSeriesSwitchRadius)
        return ensure_finite(detail::gauss_2f1_row1_series(beta_param, c, z, kMaxSeriesIter), "2F1 series");

    // Continued fraction with a = c-1, b = beta-c+1, so that
    // 2F1(1, a+b; 1+a; z) matches the requested row.
    const Complex a = c - 1.0, b = beta_param - c + 1.0;
    try {
        auto numer = [a, b, z](int j) -> Complex {
            const double m2 = double(j / 2);
            if (j % 2 == 1) {
                return -(a + m2) * (a + b + m2) / ((a + 2.0 * m2) * (a + 2.0 * m2 + 1.0)) * z;
            }
            return m2 * (b - m2) / ((a + 2.0 * m2 - 1.0) * (a + 2.0 * m2)) * z;
        };
        return ensure_finite(detail::lentz_unit_cf(numer, kMaxSeriesIter), "2F1 continued fraction");
    } catch (const ConvergenceError&) {
        return ensure_finite(detail::gauss_2f1_row1_series(beta_param, c, z, kMaxSeriesIter), "2F1 series");
    }
}

/// Incomplete Beta function B_z(a,b) on the principal branch.
inline Complex inc_beta(Complex a, Complex b, Complex z) {
    if (!(a.real() > 0.0)) throw DomainError("inc_beta: Re(a) > 0 required");
    if (!is_finite(a) || !is_finite(b) || !is_finite(z)) throw DomainError("inc_beta: non-finite argument");

    if (std::abs(z) == 0.0) return 0.0;
    if (near_real(z) && std::abs(z.real() - 1.0) < 1e-15) {
        if (!(b.real() > 0.0)) throw DomainError("inc_beta: z = 1 requires Re(b) > 0");
        return complete_beta(a, b);
    }
    if (std::abs(z) >= 1.0) throw DomainError("inc_beta: |z| < 1 required");

    const auto prefactor = [&] { return std::pow(z, a) * std::pow(1.0 - z, b) / a; };

    if (near_nonpositive_integer(a + b))
        return ensure_finite(prefactor() * gauss_2f1_row1(a + b, 1.0 + a, z), "inc_beta");

    // Near the right endpoint on the real axis, both the series and the
    // continued fraction slow down; use B_z(a,b) = B(a,b) - B_{1-z}(b,a).
    if (near_real(z) && z.real() > 0.8 && b.real() > 0.0)
        return ensure_finite(complete_beta(a, b) - inc_beta(b, a, 1.0 - z), "inc_beta");

    return ensure_finite(prefactor() * gauss_2f1_row1(a + b, 1.0 + a, z), "inc_beta");
}

inline Complex inc_beta(const BetaArgs& args, Complex z) { return inc_beta(args.a, args.b, z); }

/// d/dz B_z(a,b) = z^(a-1) (1-z)^(b-1).
inline Complex inc_beta_derivative(Complex a, Complex b, Complex z) {
    const bool at0 = std::abs(z) == 0.0;
    const bool at1 = near_real(z) && std::abs(z.real() - 1.0) < 1e-15;
    if (at0) {
        if (std::abs(a - 1.0) < 1e-15) return std::pow(1.0 - z, b - 1.0);
        if (a.real() > 1.0) return 0.0;
        throw DomainError("inc_beta_derivative: singular at z = 0");
    }
    if (at1) {
        if (std::abs(b - 1.0) < 1e-15) return std::pow(z, a - 1.0);
        if (b.real() > 1.0) return 0.0;
        throw DomainError("inc_beta_derivative: singular at z = 1");
    }
    return ensure_finite(std::pow(z, a - 1.0) * std::pow(1.0 - z, b - 1.0), "inc_beta_derivative");
}

inline Complex inc_beta_derivative(const BetaArgs& args, Complex z) {
    return inc_beta_derivative(args.a, args.b, z);
}

/// Contiguous step-up: B_z(a+1,b) = (z(z-1) B_z'(a,b) + a B_z(a,b)) / (a+b).
inline Complex beta_step_up(Complex a, Complex b, Complex u_n, Complex u_n_prime, Complex z) {
    const Complex denom = a + b;
    if (std::abs(denom) < 1e-14 * std::max(1.0, std::abs(a) + std::abs(b)))
        throw DomainError("beta_step_up: a + b = 0");
    return (z * (z - 1.0) * u_n_prime + a * u_n) / denom;
}

} // namespace heunbeta
