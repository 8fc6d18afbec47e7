#pragma once

// Dense polynomials over a commutative ring, plus complex root finding
// (simultaneous Durand-Kerner iteration with Newton polish) and Sylvester
// resultants. All degrees in this library are tiny, so the arithmetic is
// schoolbook throughout.

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "heunbeta/scalar.hpp"

namespace heunbeta {

template <class T>
struct RingTraits {
    static bool is_zero(const T& x) { return x == T{}; }
};

template <class T>
class Poly {
public:
    Poly() = default;
    Poly(const T& constant) { c_.push_back(constant); trim(); }
    explicit Poly(std::vector<T> coeffs) : c_(std::move(coeffs)) { trim(); }

    /// The monomial x.
    static Poly variable() { return Poly(std::vector<T>{T{}, T{1.0}}); }

    const std::vector<T>& coeffs() const { return c_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }

    const T& operator[](std::size_t i) const { return c_[i]; }

    T coeff_or_zero(std::size_t i) const { return i < c_.size() ? c_[i] : T{}; }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<T> r(std::max(a.c_.size(), b.c_.size()), T{});
        for (std::size_t i = 0; i < a.c_.size(); ++i) r[i] = r[i] + a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) r[i] = r[i] + b.c_[i];
        return Poly(std::move(r));
    }
    friend Poly operator-(const Poly& a, const Poly& b) {
        std::vector<T> r(std::max(a.c_.size(), b.c_.size()), T{});
        for (std::size_t i = 0; i < a.c_.size(); ++i) r[i] = r[i] + a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) r[i] = r[i] - b.c_[i];
        return Poly(std::move(r));
    }
    friend Poly operator-(const Poly& a) { return Poly(T{}) - a; }
    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return Poly();
        std::vector<T> r(a.c_.size() + b.c_.size() - 1, T{});
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j)
                r[i + j] = r[i + j] + a.c_[i] * b.c_[j];
        return Poly(std::move(r));
    }
    friend Poly operator*(const T& s, const Poly& a) { return Poly(s) * a; }

    /// Horner evaluation; X must embed T (e.g. X = T, or X = Poly for substitution).
    template <class X>
    X eval(const X& x) const {
        X acc{};
        for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + X{c_[i]};
        return acc;
    }

    /// Derivative with respect to the (outer) variable.
    Poly derivative() const {
        if (c_.size() < 2) return Poly();
        std::vector<T> r(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) r[i - 1] = T{double(i)} * c_[i];
        return Poly(std::move(r));
    }

    /// Applies f to every coefficient (used to differentiate the inner
    /// variable of a nested polynomial).
    template <class F>
    Poly map(F&& f) const {
        std::vector<T> r(c_.size());
        for (std::size_t i = 0; i < c_.size(); ++i) r[i] = f(c_[i]);
        return Poly(std::move(r));
    }

private:
    void trim() {
        while (!c_.empty() && RingTraits<T>::is_zero(c_.back())) c_.pop_back();
    }
    std::vector<T> c_; // ascending powers; empty means the zero polynomial
};

template <class T>
struct RingTraits<Poly<T>> {
    static bool is_zero(const Poly<T>& p) { return p.is_zero(); }
};

using PolyC = Poly<Complex>;

// Bivariate polynomials: outer variable sigma, inner variable delta.
using Biv = Poly<PolyC>;

/// Determinant by Laplace expansion; fine for the <=4x4 Sylvester matrices
/// that show up here.
template <class T>
T poly_det(const std::vector<std::vector<T>>& m) {
    const std::size_t n = m.size();
    if (n == 0) return T{1.0};
    if (n == 1) return m[0][0];
    T acc{};
    double sign = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!RingTraits<T>::is_zero(m[0][k])) {
            std::vector<std::vector<T>> minor(n - 1, std::vector<T>(n - 1));
            for (std::size_t i = 1; i < n; ++i) {
                std::size_t jj = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == k) continue;
                    minor[i - 1][jj++] = m[i][j];
                }
            }
            acc = acc + T{sign} * (m[0][k] * poly_det(minor));
        }
        sign = -sign;
    }
    return acc;
}

/// Resultant of f and g with respect to the outer variable; coefficients stay
/// in the inner ring.
template <class T>
T resultant(const Poly<T>& f, const Poly<T>& g) {
    const int m = f.degree(), n = g.degree();
    if (m < 0 || n < 0) return T{};
    if (m == 0 && n == 0) return T{1.0};
    const std::size_t size = static_cast<std::size_t>(m + n);
    std::vector<std::vector<T>> s(size, std::vector<T>(size, T{}));
    for (int row = 0; row < n; ++row)
        for (int j = 0; j <= m; ++j)
            s[row][row + (m - j)] = f.coeffs()[j];
    for (int row = 0; row < m; ++row)
        for (int j = 0; j <= n; ++j)
            s[n + row][row + (n - j)] = g.coeffs()[j];
    return poly_det(s);
}

inline Complex horner(std::span<const Complex> coeffs, Complex x) {
    Complex acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return acc;
}

/// Horner evaluation carried out in extended precision; used where a small
/// polynomial value emerges from cancellation of O(1) coefficients.
inline Complex eval_extended(const PolyC& p, Complex x) {
    const std::complex<long double> xl(x.real(), x.imag());
    std::complex<long double> acc = 0.0L;
    const auto& c = p.coeffs();
    for (std::size_t i = c.size(); i-- > 0;)
        acc = acc * xl + std::complex<long double>(c[i].real(), c[i].imag());
    return Complex(double(acc.real()), double(acc.imag()));
}

namespace detail {

/// Backward-error scale for a root estimate: sum |c_i| |x|^i.
inline double poly_eval_scale(std::span<const Complex> coeffs, Complex x) {
    double acc = 0.0, xp = 1.0;
    const double ax = std::abs(x);
    for (const Complex& c : coeffs) {
        acc += std::abs(c) * xp;
        xp *= ax;
    }
    return std::max(acc, 1e-300);
}

inline std::array<Complex, 2> quadratic_roots(Complex b, Complex c) {
    // roots of x^2 + b x + c, cancellation-safe
    const Complex disc = b * b - 4.0 * c;
    Complex s = std::sqrt(disc);
    if (std::real(std::conj(b) * s) < 0.0) s = -s;
    const Complex q = -0.5 * (b + s);
    if (std::abs(q) > 0.0) return {q, c / q};
    return {-0.5 * b + 0.5 * s, -0.5 * b - 0.5 * s};
}

} // namespace detail

/// All complex roots of a polynomial given by ascending coefficients.
/// Simultaneous (Durand-Kerner) iteration followed by Newton polish;
/// multiple roots come back as repeated values. Roots are sorted by real
/// part, then imaginary part.
inline std::vector<Complex> poly_roots(std::span<const Complex> coeffs) {
    if (coeffs.size() < 2) throw DomainError("poly_roots: degree must be >= 1");
    if (std::abs(coeffs.back()) == 0.0) throw DomainError("poly_roots: leading coefficient is zero");

    const int deg = static_cast<int>(coeffs.size()) - 1;
    std::vector<Complex> a(coeffs.begin(), coeffs.end());
    for (Complex& ci : a) ci /= coeffs.back(); // monic

    std::vector<Complex> roots;
    if (deg == 1) {
        roots = {-a[0]};
    } else if (deg == 2) {
        const auto r = detail::quadratic_roots(a[1], a[0]);
        roots = {r[0], r[1]};
    } else {
        double radius = 0.0;
        for (int i = 0; i < deg; ++i) radius = std::max(radius, std::abs(a[i]));
        radius = 1.0 + radius; // Cauchy bound
        const Complex seed(0.4, 0.9);
        Complex g = 1.0;
        roots.resize(deg);
        for (int i = 0; i < deg; ++i) {
            g *= seed;
            roots[i] = 0.5 * radius * g;
        }
        bool converged = false;
        for (int iter = 0; iter < 1000 && !converged; ++iter) {
            double max_step = 0.0;
            for (int i = 0; i < deg; ++i) {
                Complex denom = 1.0;
                for (int j = 0; j < deg; ++j)
                    if (j != i) denom *= roots[i] - roots[j];
                if (std::abs(denom) == 0.0) { denom = 1e-30; }
                const Complex dr = horner(a, roots[i]) / denom;
                roots[i] -= dr;
                max_step = std::max(max_step, std::abs(dr) / (1.0 + std::abs(roots[i])));
            }
            converged = max_step < 1e-15;
        }
    }

    // Newton polish against the original (un-normalized) coefficients.
    std::vector<Complex> dcoeffs(coeffs.size() > 1 ? coeffs.size() - 1 : 0);
    for (std::size_t i = 1; i < coeffs.size(); ++i) dcoeffs[i - 1] = double(i) * coeffs[i];
    for (Complex& r : roots) {
        for (int it = 0; it < 4; ++it) {
            const Complex pv = horner(coeffs, r);
            const Complex dv = horner(dcoeffs, r);
            if (std::abs(dv) == 0.0) break;
            const Complex step = pv / dv;
            if (!is_finite(step)) break;
            r -= step;
            if (std::abs(step) < 1e-16 * (1.0 + std::abs(r))) break;
        }
    }

    for (const Complex& r : roots) {
        if (std::abs(horner(coeffs, r)) > 1e-12 * detail::poly_eval_scale(coeffs, r))
            throw ConvergenceError("poly_roots: root refinement did not reach the residual target");
    }
    std::sort(roots.begin(), roots.end(), [](Complex x, Complex y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return roots;
}

} // namespace heunbeta
