#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace randman::oracle {

/// P{chi^2_n <= rho^2}, continued analytically to complex rho through the
/// lower incomplete gamma series.
inline std::complex<double> chi_cdf(std::complex<double> rho, int n) {
    const double a = 0.5 * n;
    const std::complex<double> t = 0.5 * rho * rho;
    std::complex<double> term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= t / (a + k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return std::pow(rho, n) / std::pow(2.0, a) * std::exp(-t) / std::tgamma(a + 1.0) * sum;
}

/// j-th derivative at 0 by the Cauchy integral over |rho| = r.
inline double chi_cdf_derivative(int n, int j, double r = 1.0, int points = 128) {
    std::complex<double> acc = 0.0;
    for (int q = 0; q < points; ++q) {
        const double theta = 2.0 * std::numbers::pi * q / points;
        const std::complex<double> z = std::polar(r, theta);
        acc += chi_cdf(z, n) * std::polar(1.0, -j * theta);
    }
    return std::tgamma(j + 1.0) * acc.real() / points / std::pow(r, j);
}

}  // namespace randman::oracle
