#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace macrosize {

/// Inverse error function on (-1, 1).
///
/// Starts from Giles' single-precision rational approximation and polishes
/// with Newton steps on std::erf, which brings the result to double accuracy
/// everywhere except very close to |y| = 1.
inline double erf_inv(double y)
{
    if (std::isnan(y) || y < -1.0 || y > 1.0)
        throw std::domain_error("erf_inv: argument outside [-1, 1]");
    if (y == 1.0)
        return std::numeric_limits<double>::infinity();
    if (y == -1.0)
        return -std::numeric_limits<double>::infinity();
    if (y == 0.0)
        return 0.0;

    double w = -std::log((1.0 - y) * (1.0 + y));
    double p;
    if (w < 5.0) {
        w -= 2.5;
        p = 2.81022636e-08;
        p = 3.43273939e-07 + p * w;
        p = -3.5233877e-06 + p * w;
        p = -4.39150654e-06 + p * w;
        p = 0.00021858087 + p * w;
        p = -0.00125372503 + p * w;
        p = -0.00417768164 + p * w;
        p = 0.246640727 + p * w;
        p = 1.50140941 + p * w;
    } else {
        w = std::sqrt(w) - 3.0;
        p = -0.000200214257;
        p = 0.000100950558 + p * w;
        p = 0.00134934322 + p * w;
        p = -0.00367342844 + p * w;
        p = 0.00573950773 + p * w;
        p = -0.0076224613 + p * w;
        p = 0.00943887047 + p * w;
        p = 1.00167406 + p * w;
        p = 2.83297682 + p * w;
    }
    double x = p * y;

    const double two_over_sqrt_pi = 2.0 / std::sqrt(std::numbers::pi);
    for (int it = 0; it < 3; ++it) {
        const double slope = two_over_sqrt_pi * std::exp(-x * x);
        if (slope == 0.0)
            break;
        // erfc form keeps the residual accurate in the upper tail
        const double residual = x > 0.0 ? (1.0 - y) - std::erfc(x) : std::erf(x) - y;
        const double step = residual / slope;
        x -= step;
        if (std::abs(step) <= 1e-17 * std::abs(x))
            break;
    }
    return x;
}

/// Mass of the centered unit-variance Gaussian scaled by sigma on [a, b],
/// with either endpoint allowed to be infinite.
inline double gaussian_interval_mass(double a, double b, double sigma)
{
    const double scale = 1.0 / (sigma * std::numbers::sqrt2);
    const double u = a * scale;
    const double v = b * scale;
    if (u >= 0.0)
        return 0.5 * (std::erfc(u) - std::erfc(v));
    if (v <= 0.0)
        return 0.5 * (std::erfc(-v) - std::erfc(-u));
    return 0.5 * (std::erf(v) - std::erf(u));
}

/// exp(-x^2 / 2 sigma^2) / (sqrt(2 pi) sigma)
inline double gaussian_pdf(double x, double sigma)
{
    const double z = x / sigma;
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

} // namespace macrosize
