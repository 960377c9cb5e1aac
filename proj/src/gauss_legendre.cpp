#include "randman/quadrature.hpp"

#include "randman/errors.hpp"

#include <cmath>
#include <numbers>

namespace randman {

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    // Roots are symmetric; Newton on P_n from the Tricomi initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute derivative at the converged root.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

QuadratureRule periodic_trapezoid(int n, double a, double b, double shift) {
    if (n < 1) throw InvalidArgument("periodic_trapezoid: need at least one node");
    QuadratureRule rule;
    const double h = (b - a) / n;
    for (int i = 0; i < n; ++i) {
        rule.nodes.push_back(a + (i + shift) * h);
        rule.weights.push_back(h);
    }
    return rule;
}

}  // namespace randman
