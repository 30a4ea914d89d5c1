#pragma once

#include <cmath>
#include <string>

#include "bisque/error.hpp"

namespace bisque {

namespace detail {

// K_{n+1/2}(x) for integer n >= 0 by upward recurrence from the
// K_{1/2} = sqrt(pi/(2x)) e^{-x} closed form; recurrence is stable upward.
inline double bessel_k_half_integer(int n, double x) {
    const double k_half = std::sqrt(M_PI / (2.0 * x)) * std::exp(-x);
    if (n == 0) return k_half;
    double km = k_half;                      // K_{1/2}
    double k = k_half * (1.0 + 1.0 / x);     // K_{3/2}
    for (int m = 1; m < n; ++m) {
        const double kp = km + (2.0 * m + 1.0) / x * k; // K_{m+3/2}
        km = k;
        k = kp;
    }
    return k;
}

} // namespace detail

// Modified Bessel function of the second kind for real order nu > 0 and
// argument x > 0.  Half-integer orders use their elementary closed forms;
// general orders defer to the standard library's special-math routine.
inline double bessel_k(double nu, double x) {
    if (!(nu > 0.0)) throw DomainError("bessel_k requires order nu > 0, got " + std::to_string(nu));
    if (!(x > 0.0)) throw DomainError("bessel_k requires argument x > 0, got " + std::to_string(x));
    const double two_nu = 2.0 * nu;
    const double rounded = std::round(two_nu);
    if (std::abs(two_nu - rounded) < 1e-13 && std::lround(rounded) % 2 == 1) {
        return detail::bessel_k_half_integer(static_cast<int>((std::lround(rounded) - 1) / 2), x);
    }
    return std::cyl_bessel_k(nu, x);
}

} // namespace bisque
