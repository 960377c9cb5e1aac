#pragma once

#include "randman/atlas.hpp"
#include "randman/jet.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace randman::testing {

inline constexpr double kPi = std::numbers::pi;

/// Stereographic chart of the radius-r sphere S^m in R^{m+1} (from the south pole).
inline Chart sphere_chart(int m, double radius) {
    Chart c;
    c.dim = m;
    c.ambient_dim = m + 1;
    c.lower.assign(m, -2.0);
    c.upper.assign(m, 2.0);
    c.periodic.assign(m, false);
    c.ambient = [m, radius](std::span<const double> x, std::span<Jet> out) {
        Jet r2 = Jet::constant(m, 0.0);
        std::vector<Jet> u;
        for (int i = 0; i < m; ++i) {
            u.push_back(Jet::coordinate(m, i, x[i]));
            r2 = r2 + u[i] * u[i];
        }
        const Jet inv = reciprocal(1.0 + r2);
        for (int i = 0; i < m; ++i) out[i] = (2.0 * radius) * (u[i] * inv);
        out[m] = radius * ((1.0 - r2) * inv);
    };
    c.in_region = [](std::span<const double>) { return true; };
    return c;
}

/// Chart of a generic embedded surface (x, y) -> (x, y, h(x, y)), h a bump.
inline Chart graph_chart() {
    Chart c;
    c.dim = 2;
    c.ambient_dim = 3;
    c.lower = {-1.0, -1.0};
    c.upper = {1.0, 1.0};
    c.periodic = {false, false};
    c.ambient = [](std::span<const double> x, std::span<Jet> out) {
        const Jet u = Jet::coordinate(2, 0, x[0]);
        const Jet v = Jet::coordinate(2, 1, x[1]);
        out[0] = u;
        out[1] = v;
        out[2] = 0.3 * sin(u) * cos(2.0 * v) + 0.2 * u * u * v;
    };
    c.in_region = [](std::span<const double>) { return true; };
    return c;
}

/// Central difference of a vector-valued function along coordinate i.
template <class F>
auto central_diff(const F& f, std::vector<double> x, int i, double h) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    decltype(f(x)) d = (f(xp) - f(xm)) / (2.0 * h);
    return d;
}

}  // namespace randman::testing
