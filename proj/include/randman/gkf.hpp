#pragma once

#include "randman/lkc_vector.hpp"

#include <Eigen/Dense>

#include <vector>

namespace randman {

/// Volume of the unit ball in R^n, pi^{n/2} / Gamma(n/2 + 1).
double ball_volume(int n);

/// Flag coefficient [a over b] = binom(a, b) w_a / (w_{a-b} w_b).
double flag_coefficient(int a, int b);

/// Gaussian Minkowski functionals M_j of the origin in R^n, j = 0..j_max.
struct GMFTable {
    int n = 0;
    std::vector<double> values;

    double at(int j) const { return j < static_cast<int>(values.size()) ? values[j] : 0.0; }
};

inline constexpr int kDefaultGmfJmax = 16;

/**
 * Coefficients of the Gaussian tube expansion of a point, read off the
 * series of P{chi^2_n <= rho^2}: nonzero only at j = n + 2l, where
 *   M_j = j! (-1/2)^l / (2^{n/2} Gamma(n/2) l! (n/2 + l)).
 */
GMFTable gmf_point(int n, int j_max = kDefaultGmfJmax);

/// GMF of a codimension-n linear subspace of R^k; equal to the point value in R^n.
double gmf_subspace(int k, int n, int j);

/// M_j = j! w_j L_{N-j}.
std::vector<double> lebesgue_minkowski(const LKCVector& lkc, int N);

/// sum_j rho^j / j! M_j.
double minkowski_tube_volume(const std::vector<double>& minkowski, double rho);

/**
 * Right-hand side of the Gaussian kinematic formula for E L_i(M cap f^{-1} D):
 *   sum_{j=0}^{m-i} [i+j over j] (2 pi)^{-j/2} L_{i+j}(M) M_j(D).
 */
double gkf_rhs(int i, const LKCVector& lkc_m, const GMFTable& gmf_d, int m);

/// Upper-triangular map from LKCs to expected Euler characteristics of the
/// zero sets of n = 0..a i.i.d. fields; row 0 is (1, 0, ..., 0).
struct ZMatrix {
    Eigen::MatrixXd z;

    int size() const { return static_cast<int>(z.rows()); }
    Eigen::VectorXd apply(const LKCVector& lkc) const;
};

ZMatrix z_matrix(int a);

/// Solves Z L = mu by back substitution.
LKCVector recover_lkc(const ZMatrix& z, const Eigen::VectorXd& mu);

}  // namespace randman
