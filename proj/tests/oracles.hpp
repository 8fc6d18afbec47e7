#pragma once

// Test-side oracles, independent of the library's evaluation paths:
//  - adaptive Gauss-Kronrod (7,15) quadrature of the incomplete-Beta
//    integrand, with a power substitution that removes the endpoint
//    singularity;
//  - finite-difference derivatives;
//  - deterministic random parameter draws.

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include "heunbeta/scalar.hpp"

namespace oracles {

using heunbeta::Complex;

// QUADPACK dqk15 nodes and weights on [-1, 1].
inline constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
std::pair<Complex, double> gk15(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    Complex k15 = kWgk[7] * f(mid);
    Complex g7 = kWg[3] * f(mid);
    for (int i = 0; i < 7; ++i) {
        const Complex lo = f(mid - half * kXgk[i]);
        const Complex hi = f(mid + half * kXgk[i]);
        k15 += kWgk[i] * (lo + hi);
        if (i % 2 == 1) g7 += kWg[i / 2] * (lo + hi);
    }
    k15 *= half;
    g7 *= half;
    return {k15, std::abs(k15 - g7)};
}

template <class F>
Complex adaptive_quad(F&& f, double a, double b, double tol, int depth = 0) {
    const auto [value, err] = gk15(f, a, b);
    if (err <= tol * std::max(1.0, std::abs(value)) || depth >= 48) return value;
    const double mid = 0.5 * (a + b);
    return adaptive_quad(f, a, mid, 0.5 * tol, depth + 1) +
           adaptive_quad(f, mid, b, 0.5 * tol, depth + 1);
}

/// Direct quadrature of B_z(a, b) = int_0^z t^(a-1) (1-t)^(b-1) dt for real
/// z in (0, 1). The substitution t = z w^m with m ~ 2/Re(a) makes the
/// integrand bounded at w = 0.
inline Complex inc_beta_quadrature(Complex a, Complex b, double z, double tol = 1e-11) {
    const int m = std::max(1, int(std::ceil(2.0 / a.real())));
    const Complex za = std::pow(Complex(z), a);
    const auto integrand = [&](double w) -> Complex {
        const double t = z * std::pow(w, m);
        return za * double(m) * std::pow(Complex(w), Complex(double(m)) * a - 1.0) *
               std::pow(1.0 - t, b - 1.0);
    };
    return adaptive_quad(integrand, 0.0, 1.0, tol);
}

/// Five-point central difference, O(h^4).
template <class F>
Complex fd_derivative(F&& f, double z, double h) {
    return (-f(z + 2 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2 * h)) / (12.0 * h);
}

struct Rng {
    std::mt19937 gen;
    explicit Rng(unsigned seed) : gen(seed) {}
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen);
    }
    /// Uniform draw avoiding a margin around the excluded points.
    double uniform_avoiding(double lo, double hi, std::initializer_list<double> excluded,
                            double margin) {
        for (int k = 0; k < 1000; ++k) {
            const double v = uniform(lo, hi);
            bool ok = true;
            for (double e : excluded)
                if (std::abs(v - e) < margin) ok = false;
            if (ok) return v;
        }
        return 0.5 * (lo + hi);
    }
};

} // namespace oracles
