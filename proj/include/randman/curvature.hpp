#pragma once

#include "randman/atlas.hpp"
#include "randman/jet.hpp"
#include "randman/lkc_vector.hpp"
#include "randman/metric_jet.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace randman {

/// Gamma^n_{jk}; symmetric in (j, k).
struct ChristoffelField {
    int dim = 0;
    std::vector<double> gamma;

    double operator()(int n, int j, int k) const { return gamma[(n * dim + j) * dim + k]; }
    double& operator()(int n, int j, int k) { return gamma[(n * dim + j) * dim + k]; }
};

/// R_{ijkl} with R_{1212} = K det g for sectional curvature K.
struct CurvatureTensor {
    int dim = 0;
    std::vector<double> r;

    double operator()(int i, int j, int k, int l) const {
        return r[((i * dim + j) * dim + k) * dim + l];
    }
    double& operator()(int i, int j, int k, int l) { return r[((i * dim + j) * dim + k) * dim + l]; }
    double norm() const;
};

/// Metric inversion fails above this condition number.
inline constexpr double kMaxMetricCondition = 1e12;

ChristoffelField christoffel(const MetricJet& jet);
CurvatureTensor riemann(const MetricJet& jet, const ChristoffelField& gamma);

/// (grad^2 f)_ij = d_i d_j f - Gamma^l_ij d_l f, from the value/grad/hess part of `f`.
Eigen::MatrixXd covariant_hessian(const Jet& f, const ChristoffelField& gamma);

/**
 * Dense (d, d) double form: antisymmetric in each group of d indices.
 * Component (x_1..x_d ; y_1..y_d) lives at the base-m number x_1..x_d y_1..y_d.
 */
class DoubleForm {
public:
    DoubleForm(int dim, int degree);

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    double at(std::span<const int> upper, std::span<const int> lower) const;
    double& at(std::span<const int> upper, std::span<const int> lower);

    /// Shuffle product; the result has degree degree() + other.degree().
    DoubleForm operator*(const DoubleForm& other) const;
    /// (1 / d!) sum g^{x_1 y_1} ... g^{x_d y_d} alpha(x; y).
    double trace(const Eigen::MatrixXd& g_inverse) const;

private:
    std::size_t index(std::span<const int> upper, std::span<const int> lower) const;

    int dim_;
    int degree_;
    std::vector<double> comps_;
};

/// Curvature as a (2,2) double form: -R_{ijkl}, the sign for which the
/// curvature integral of a round sphere returns its Euler characteristic.
inline constexpr double kCurvatureFormSign = -1.0;
DoubleForm curvature_double_form(const CurvatureTensor& r);

/// Tr(R^p), with R^p the p-fold shuffle product of the curvature double form.
double double_form_power_trace(const CurvatureTensor& r, const Eigen::MatrixXd& g, int p);

/// (-2 pi)^{-(m-j)/2} / ((m-j)/2)! for m - j even, 0 otherwise.
double lkc_constant(int m, int j);

/// LKCs from metric jets given at every quadrature node of the atlas.
LKCVector lkc(const ManifoldAtlas& atlas, const std::vector<std::vector<MetricJet>>& jets);

/// LKCs of the atlas's reference (ambient-induced) metric.
LKCVector reference_lkc(const ManifoldAtlas& atlas);

/// sum_j rho^{N-j} w_{N-j} L_j; valid below the reach of the set.
double tube_volume(const LKCVector& lkc, double rho, int N);

}  // namespace randman
