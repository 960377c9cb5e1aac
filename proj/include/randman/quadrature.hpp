#pragma once

#include <vector>

namespace randman {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// n-point periodic trapezoidal rule on [a, b), nodes at a + (i + shift) h.
QuadratureRule periodic_trapezoid(int n, double a, double b, double shift = 0.0);

}  // namespace randman
