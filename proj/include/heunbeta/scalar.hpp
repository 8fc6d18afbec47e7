#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "heunbeta/errors.hpp"

namespace heunbeta {

using Complex = std::complex<double>;

/// Absolute tolerance for exact parameter relations (family constraints,
/// integer detection in termination conditions).
inline constexpr double kEqTol = 1e-12;

// 2F1 evaluation: direct series inside this radius, continued fraction outside.
inline constexpr double kSeriesSwitchRadius = 0.75;
inline constexpr int kMaxSeriesIter = 10000;
inline constexpr double kSeriesRelStop = 1e-15;

/// Distance-to-integer tolerance for the elementary (polynomial) branch of
/// the incomplete Beta function.
inline constexpr double kNegIntTol = 1e-12;

inline bool is_finite(Complex v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

inline Complex ensure_finite(Complex v, const char* what) {
    if (!is_finite(v)) throw DomainError(std::string(what) + ": non-finite result");
    return v;
}

/// Nearest integer m <= 0 with |x - m| <= tol, if any.
inline std::optional<long> near_nonpositive_integer(Complex x, double tol = kNegIntTol) {
    if (std::abs(x.imag()) > tol) return std::nullopt;
    const double r = std::round(x.real());
    if (std::abs(x.real() - r) > tol) return std::nullopt;
    if (r > 0.5) return std::nullopt;
    return static_cast<long>(r);
}

inline bool near_real(Complex z, double tol = 1e-14) {
    return std::abs(z.imag()) <= tol;
}

} // namespace heunbeta
