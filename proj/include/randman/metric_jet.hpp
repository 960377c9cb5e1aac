#pragma once

#include <Eigen/Dense>

#include <vector>

namespace randman {

/// Metric components g_ij at a chart point together with their first and
/// second ordinary chart partials. Layout: dg(p, i, j) = d_p g_ij and
/// ddg(p, q, i, j) = d_p d_q g_ij.
struct MetricJet {
    int dim = 0;
    std::vector<double> g_;
    std::vector<double> dg_;
    std::vector<double> ddg_;

    MetricJet() = default;
    explicit MetricJet(int m)
        : dim(m), g_(m * m, 0.0), dg_(m * m * m, 0.0), ddg_(m * m * m * m, 0.0) {}

    double g(int i, int j) const { return g_[i * dim + j]; }
    double& g(int i, int j) { return g_[i * dim + j]; }
    double dg(int p, int i, int j) const { return dg_[(p * dim + i) * dim + j]; }
    double& dg(int p, int i, int j) { return dg_[(p * dim + i) * dim + j]; }
    double ddg(int p, int q, int i, int j) const {
        return ddg_[((p * dim + q) * dim + i) * dim + j];
    }
    double& ddg(int p, int q, int i, int j) { return ddg_[((p * dim + q) * dim + i) * dim + j]; }

    Eigen::MatrixXd metric() const {
        Eigen::MatrixXd out(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) out(i, j) = g(i, j);
        return out;
    }
};

}  // namespace randman
