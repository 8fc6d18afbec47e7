#pragma once

// The confluent Heun equation in canonical form,
//
//   u'' + (4p + gamma/z + delta/(z-1)) u' + (4 p alpha z - sigma)/(z(z-1)) u = 0,
//
// together with the operations every other module leans on: the residual of a
// candidate solution, an adaptive Runge-Kutta integrator used as an
// independent oracle, the exponential pretransform u = e^{sz} v, and the
// sigma quadratic that makes the transformed equation expandable again.

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "heunbeta/scalar.hpp"

namespace heunbeta {

/// The five parameters of the canonical confluent Heun equation.
struct CheParams {
    Complex p{};
    Complex alpha{};
    Complex gamma{};
    Complex delta{};
    Complex sigma{};

    void validate() const {
        if (!is_finite(p) || !is_finite(alpha) || !is_finite(gamma) || !is_finite(delta) || !is_finite(sigma))
            throw DomainError("CheParams: non-finite parameter");
        if (std::abs(gamma) < 1e-15) throw DomainError("CheParams: gamma must be nonzero");
    }
};

/// Value and first two derivatives of a candidate solution at one point.
struct SolutionJet {
    Complex u{};
    Complex du{};
    Complex d2u{};
};

/// Multiplies a jet by e^{sz}; applying s then -s is the identity.
inline SolutionJet jet_exp_scale(const SolutionJet& j, Complex s, Complex z) {
    const Complex e = std::exp(s * z);
    return {e * j.u, e * (s * j.u + j.du), e * (s * s * j.u + 2.0 * s * j.du + j.d2u)};
}

/// Residual of the equation at z for a solution with known derivatives.
inline Complex che_residual(const CheParams& P, const SolutionJet& j, Complex z) {
    P.validate();
    if (std::abs(z) < 1e-14 || std::abs(z - 1.0) < 1e-14)
        throw DomainError("che_residual: singular points z = 0, 1");
    return j.d2u + (4.0 * P.p + P.gamma / z + P.delta / (z - 1.0)) * j.du +
           (4.0 * P.p * P.alpha * z - P.sigma) / (z * (z - 1.0)) * j.u;
}

/// n Chebyshev-distributed points on [a,b] including the endpoints; clusters
/// near a and b where the residual of a Beta-series solution peaks.
inline std::vector<double> chebyshev_grid(double a, double b, int n) {
    if (n < 2) throw DomainError("chebyshev_grid: need n >= 2");
    std::vector<double> g(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int k = 0; k < n; ++k)
        g[k] = mid - half * std::cos(std::numbers::pi * double(k) / double(n - 1));
    g.front() = a;
    g.back() = b;
    return g;
}

inline std::vector<double> default_verification_grid() { return chebyshev_grid(0.05, 0.95, 33); }

/// Grid statistics of the ODE residual for an evaluable solution.
struct ResidualReport {
    std::vector<Complex> grid;
    std::vector<double> residuals; // absolute residual per grid point
    double max_residual = 0.0;
    double scale = 0.0; // max of |u|, |u'|, |u''| over the grid

    double normalized() const { return scale > 0.0 ? max_residual / scale : max_residual; }
};

template <class SolFn>
ResidualReport residual_report(const CheParams& P, SolFn&& sol, std::span<const double> grid) {
    ResidualReport rep;
    rep.grid.reserve(grid.size());
    rep.residuals.reserve(grid.size());
    for (double x : grid) {
        const Complex z(x, 0.0);
        const SolutionJet j = sol(z);
        rep.grid.push_back(z);
        rep.residuals.push_back(std::abs(che_residual(P, j, z)));
        rep.scale = std::max({rep.scale, std::abs(j.u), std::abs(j.du), std::abs(j.d2u)});
        rep.max_residual = std::max(rep.max_residual, rep.residuals.back());
    }
    return rep;
}

template <class SolFn>
ResidualReport residual_report(const CheParams& P, SolFn&& sol) {
    const auto grid = default_verification_grid();
    return residual_report(P, std::forward<SolFn>(sol), grid);
}

/// Coefficients of the equation satisfied by v where u = e^{sz} v:
///   v'' + (2s + 4p + gamma/z + delta/(z-1)) v' + (A z(z-1) + B z + C)/(z(z-1)) v = 0.
struct TransformedParams {
    Complex s{};
    Complex A{};
    Complex B{};
    Complex C{};
    CheParams base{};
};

inline TransformedParams transform_exponential(const CheParams& P, Complex s) {
    P.validate();
    TransformedParams t;
    t.s = s;
    t.A = s * (s + 4.0 * P.p);
    t.B = 4.0 * P.p * P.alpha + s * (P.gamma + P.delta);
    t.C = -(s * P.gamma + P.sigma);
    t.base = P;
    return t;
}

/// A sigma value solving the pretransform quadratic, paired with its exponent.
struct SigmaRootE {
    Complex sigma{};
    Complex s{}; // -sigma/gamma
};

/// The two roots of sigma^2 + gamma(-4p + gamma + delta) sigma - 4 p alpha gamma^2 = 0,
/// i.e. the sigma values for which the transformed equation has B = A, C = 0.
/// A double root is returned twice. Sorted by real part, then imaginary part.
inline std::array<SigmaRootE, 2> sigma_roots_family_e(const CheParams& P) {
    P.validate();
    const Complex b = P.gamma * (-4.0 * P.p + P.gamma + P.delta);
    const Complex c = -4.0 * P.p * P.alpha * P.gamma * P.gamma;
    // cancellation-safe quadratic
    const Complex disc = b * b - 4.0 * c;
    Complex sq = std::sqrt(disc);
    if (std::real(std::conj(b) * sq) < 0.0) sq = -sq;
    const Complex q = -0.5 * (b + sq);
    Complex r0, r1;
    if (std::abs(q) > 0.0) {
        r0 = q;
        r1 = c / q;
    } else {
        r0 = -0.5 * b + 0.5 * sq;
        r1 = -0.5 * b - 0.5 * sq;
    }
    if (r1.real() < r0.real() || (r1.real() == r0.real() && r1.imag() < r0.imag())) std::swap(r0, r1);
    return {SigmaRootE{r0, -r0 / P.gamma}, SigmaRootE{r1, -r1 / P.gamma}};
}

/// Endpoint state of a numerical integration of the equation.
struct IntegrationResult {
    Complex u{};
    Complex du{};
    long accepted_steps = 0;
    long rejected_steps = 0;
};

/// Integrates the equation as a first-order system from z0 to z1 inside (0,1)
/// with the Dormand-Prince 5(4) embedded pair. The controller keeps the local
/// error per unit step below tol, so the accumulated error over the interval
/// stays O(tol); this is the independent oracle for every series solution.
inline IntegrationResult integrate_che(const CheParams& P, double z0, Complex u0, Complex du0,
                                       double z1, double tol) {
    P.validate();
    if (!(tol > 0.0)) throw DomainError("integrate_che: tol must be positive");
    if (!(z0 > 0.0 && z0 < 1.0 && z1 > 0.0 && z1 < 1.0))
        throw DomainError("integrate_che: [z0, z1] must lie inside (0, 1)");

    using State = std::array<Complex, 2>;
    const auto rhs = [&P](double z, const State& y) -> State {
        const Complex zc(z, 0.0);
        const Complex cp = 4.0 * P.p + P.gamma / zc + P.delta / (zc - 1.0);
        const Complex cq = (4.0 * P.p * P.alpha * zc - P.sigma) / (zc * (zc - 1.0));
        return {y[1], -cp * y[1] - cq * y[0]};
    };

    // Dormand-Prince 5(4) tableau
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    const double dir = (z1 >= z0) ? 1.0 : -1.0;
    const double span = std::abs(z1 - z0);
    if (span == 0.0) return {u0, du0, 0, 0};

    State y{u0, du0};
    double z = z0;
    double h = dir * std::min(0.05 * span, 1e-2);
    IntegrationResult out;
    State k1 = rhs(z, y);

    const long max_steps = 1000000;
    for (long step = 0; step < max_steps; ++step) {
        if (std::abs(h) < 1e-14) throw StepSizeError("integrate_che: step size underflow");
        if ((z - z1) * dir >= 0.0) {
            out.u = y[0];
            out.du = y[1];
            return out;
        }
        if ((z + h - z1) * dir > 0.0) h = z1 - z;

        const auto stage = [&](const State& base, std::initializer_list<std::pair<double, const State*>> terms) {
            State r = base;
            for (auto& [c, k] : terms) {
                r[0] += h * c * (*k)[0];
                r[1] += h * c * (*k)[1];
            }
            return r;
        };

        const State k2 = rhs(z + c2 * h, stage(y, {{a21, &k1}}));
        const State k3 = rhs(z + c3 * h, stage(y, {{a31, &k1}, {a32, &k2}}));
        const State k4 = rhs(z + c4 * h, stage(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const State k5 = rhs(z + c5 * h, stage(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const State k6 = rhs(z + h, stage(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        State y5;
        for (int i = 0; i < 2; ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        const State k7 = rhs(z + h, y5);

        double err = 0.0;
        const double habs = std::abs(h);
        for (int i = 0; i < 2; ++i) {
            const Complex e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = tol * habs * (1.0 + std::max(std::abs(y[i]), std::abs(y5[i])));
            err = std::max(err, std::abs(e) / sc);
        }

        if (err <= 1.0) {
            z += h;
            y = y5;
            k1 = k7; // first-same-as-last
            ++out.accepted_steps;
        } else {
            ++out.rejected_steps;
        }
        const double factor = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.25), 0.2, 5.0);
        h *= factor;
    }
    throw ConvergenceError("integrate_che: step cap reached");
}

} // namespace heunbeta
