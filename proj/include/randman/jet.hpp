#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace randman {

/// Largest chart dimension supported by the derivative machinery.
inline constexpr int kMaxDim = 4;

/**
 * Third-order Taylor jet of a scalar function of `dim` chart coordinates:
 * value, gradient, Hessian and third derivative tensor, all as ordinary
 * partials. Storage is dense and fully symmetric (every permutation of an
 * index tuple is stored).
 */
struct Jet {
    int dim = 0;
    double value = 0.0;
    std::array<double, kMaxDim> grad{};
    std::array<double, kMaxDim * kMaxDim> hess{};
    std::array<double, kMaxDim * kMaxDim * kMaxDim> third{};

    Jet() = default;
    explicit Jet(int d) : dim(d) {}

    /// Constant function.
    static Jet constant(int d, double c) {
        Jet j(d);
        j.value = c;
        return j;
    }

    /// The coordinate function x^i evaluated at `x_i`.
    static Jet coordinate(int d, int i, double x_i) {
        Jet j(d);
        j.value = x_i;
        j.grad[i] = 1.0;
        return j;
    }

    double d1(int i) const { return grad[i]; }
    double d2(int i, int j) const { return hess[i * kMaxDim + j]; }
    double d3(int i, int j, int l) const { return third[(i * kMaxDim + j) * kMaxDim + l]; }
    double& d2(int i, int j) { return hess[i * kMaxDim + j]; }
    double& d3(int i, int j, int l) { return third[(i * kMaxDim + j) * kMaxDim + l]; }

    /// Number of packed components 1 + m + m^2 + m^3.
    static constexpr int packed_size(int d) { return 1 + d + d * d + d * d * d; }
    static constexpr int packed_grad(int /*d*/, int i) { return 1 + i; }
    static constexpr int packed_hess(int d, int i, int j) { return 1 + d + i * d + j; }
    static constexpr int packed_third(int d, int i, int j, int l) {
        return 1 + d + d * d + (i * d + j) * d + l;
    }

    /// Writes the jet in packed order (value, grad, hess, third) to `out`.
    template <typename Out>
    void pack(Out&& out) const {
        out[0] = value;
        for (int i = 0; i < dim; ++i) out[packed_grad(dim, i)] = grad[i];
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) out[packed_hess(dim, i, j)] = d2(i, j);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                for (int l = 0; l < dim; ++l) out[packed_third(dim, i, j, l)] = d3(i, j, l);
    }

    Jet& operator+=(const Jet& o) {
        value += o.value;
        for (int i = 0; i < kMaxDim; ++i) grad[i] += o.grad[i];
        for (std::size_t i = 0; i < hess.size(); ++i) hess[i] += o.hess[i];
        for (std::size_t i = 0; i < third.size(); ++i) third[i] += o.third[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        value -= o.value;
        for (int i = 0; i < kMaxDim; ++i) grad[i] -= o.grad[i];
        for (std::size_t i = 0; i < hess.size(); ++i) hess[i] -= o.hess[i];
        for (std::size_t i = 0; i < third.size(); ++i) third[i] -= o.third[i];
        return *this;
    }
    Jet& operator*=(double c) {
        value *= c;
        for (auto& v : grad) v *= c;
        for (auto& v : hess) v *= c;
        for (auto& v : third) v *= c;
        return *this;
    }
    Jet& operator+=(double c) {
        value += c;
        return *this;
    }

    /// this += c * o
    void axpy(double c, const Jet& o) {
        value += c * o.value;
        for (int i = 0; i < dim; ++i) grad[i] += c * o.grad[i];
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) d2(i, j) += c * o.d2(i, j);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                for (int l = 0; l < dim; ++l) d3(i, j, l) += c * o.d3(i, j, l);
    }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(double c, Jet a) { return a *= c; }
inline Jet operator*(Jet a, double c) { return a *= c; }
inline Jet operator+(Jet a, double c) { return a += c; }
inline Jet operator+(double c, Jet a) { return a += c; }
inline Jet operator-(double c, const Jet& a) { return (-1.0 * a) += c; }

/// Leibniz rule to third order.
inline Jet operator*(const Jet& u, const Jet& v) {
    const int d = u.dim;
    Jet r(d);
    r.value = u.value * v.value;
    for (int i = 0; i < d; ++i) r.grad[i] = u.grad[i] * v.value + u.value * v.grad[i];
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            r.d2(i, j) = u.d2(i, j) * v.value + u.grad[i] * v.grad[j] + u.grad[j] * v.grad[i] +
                         u.value * v.d2(i, j);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int l = 0; l < d; ++l)
                r.d3(i, j, l) = u.d3(i, j, l) * v.value + u.d2(i, j) * v.grad[l] +
                                u.d2(i, l) * v.grad[j] + u.d2(j, l) * v.grad[i] +
                                u.grad[i] * v.d2(j, l) + u.grad[j] * v.d2(i, l) +
                                u.grad[l] * v.d2(i, j) + u.value * v.d3(i, j, l);
    return r;
}

/// phi(s) given phi and its first three derivatives at s.value (Faa di Bruno).
inline Jet compose(const Jet& s, double f0, double f1, double f2, double f3) {
    const int d = s.dim;
    Jet r(d);
    r.value = f0;
    for (int i = 0; i < d; ++i) r.grad[i] = f1 * s.grad[i];
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) r.d2(i, j) = f2 * s.grad[i] * s.grad[j] + f1 * s.d2(i, j);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int l = 0; l < d; ++l)
                r.d3(i, j, l) = f3 * s.grad[i] * s.grad[j] * s.grad[l] +
                                f2 * (s.d2(i, j) * s.grad[l] + s.d2(i, l) * s.grad[j] +
                                      s.d2(j, l) * s.grad[i]) +
                                f1 * s.d3(i, j, l);
    return r;
}

inline Jet sin(const Jet& s) {
    const double sv = std::sin(s.value), cv = std::cos(s.value);
    return compose(s, sv, cv, -sv, -cv);
}

inline Jet cos(const Jet& s) {
    const double sv = std::sin(s.value), cv = std::cos(s.value);
    return compose(s, cv, -sv, -cv, sv);
}

inline Jet reciprocal(const Jet& s) {
    const double x = s.value, r = 1.0 / x;
    return compose(s, r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r);
}

inline Jet operator/(const Jet& u, const Jet& v) { return u * reciprocal(v); }

inline Jet atan(const Jet& s) {
    const double x = s.value, q = 1.0 / (1.0 + x * x);
    return compose(s, std::atan(x), q, -2.0 * x * q * q, (6.0 * x * x - 2.0) * q * q * q);
}

inline Jet sqrt(const Jet& s) {
    const double r = std::sqrt(s.value);
    return compose(s, r, 0.5 / r, -0.25 / (r * s.value), 0.375 / (r * s.value * s.value));
}

}  // namespace randman
