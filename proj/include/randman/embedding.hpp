#pragma once

#include "randman/atlas.hpp"
#include "randman/gp_model.hpp"
#include "randman/metric_jet.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace randman {

/**
 * h^k = k^{-1/2} (f_1, ..., f_k) for k independent samples of one model.
 *
 * Every pullback quantity is quadratic in the field coefficients, so the
 * realization keeps a factor F (2Q x r, r = min(k, 2Q)) with
 * F F^T = sum_l c_l c_l^T. Pullback jets at a point then cost O(Q r) instead
 * of O(k Q).
 */
struct EmbeddingRealization {
    int k = 0;
    std::shared_ptr<const GPModel> model;
    std::vector<GPSample> samples;
    Eigen::MatrixXd coefficient_factor;

    double normalization() const;
};

/// Throws InvalidArgument when samples is empty or the samples use different models.
EmbeddingRealization make_realization(std::vector<GPSample> samples);

/// k fields with seeds derive_seed(seed, l) for l = 0..k-1.
EmbeddingRealization draw_realization(std::shared_ptr<const GPModel> model, int k,
                                      std::uint64_t seed);

Eigen::VectorXd embed_point(const EmbeddingRealization& e, const ManifoldAtlas& atlas,
                            const ChartPoint& x);

/// g_ij = (1/k) sum_l d_i f_l d_j f_l with exact first and second partials.
MetricJet pullback_jet(const EmbeddingRealization& e, const ManifoldAtlas& atlas,
                       const ChartPoint& x);

/// Pullback jets at every point of a precomputed basis (same model, same chart).
std::vector<MetricJet> pullback_jets(const EmbeddingRealization& e, const WaveBasis& basis);

using MetricJetField = std::function<MetricJet(int chart, std::span<const double> x)>;

/// Reference metric of the atlas (ambient-induced) as a jet field.
MetricJetField reference_metric(const ManifoldAtlas& atlas);

/**
 * C^0, C^1, C^2 norms of the componentwise difference pulled - target, where
 * each sup is a max over the supplied points. Entry i of the result is the
 * order-i norm; entries above `order` are left at zero.
 */
std::array<double, 3> deviation_norms(const std::vector<std::vector<MetricJet>>& pulled,
                                      const std::vector<std::vector<MetricJet>>& target,
                                      int order);

/// Order-`order` C^i norm of (pullback - target), sups taken over `grid`.
double ci_deviation_norm(const EmbeddingRealization& e, const ManifoldAtlas& atlas,
                         const MetricJetField& target, int order,
                         const std::vector<std::vector<Coord>>& grid);

}  // namespace randman
