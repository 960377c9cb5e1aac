#include "randman/embedding.hpp"

#include "randman/errors.hpp"
#include "randman/rng.hpp"

#include <algorithm>
#include <cmath>

namespace randman {

namespace {

constexpr std::size_t kPointChunk = 512;

MetricJet metric_jet_from_gram(const Eigen::MatrixXd& gram, int m) {
    const auto g1 = [m](int i) { return Jet::packed_grad(m, i); };
    const auto g2 = [m](int i, int j) { return Jet::packed_hess(m, i, j); };
    const auto g3 = [m](int i, int j, int l) { return Jet::packed_third(m, i, j, l); };
    MetricJet mj(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            mj.g(i, j) = gram(g1(i), g1(j));
            for (int p = 0; p < m; ++p) {
                mj.dg(p, i, j) = gram(g2(p, i), g1(j)) + gram(g1(i), g2(p, j));
                for (int q = 0; q < m; ++q)
                    mj.ddg(p, q, i, j) = gram(g3(p, q, i), g1(j)) + gram(g2(p, i), g2(q, j)) +
                                         gram(g2(q, i), g2(p, j)) + gram(g1(i), g3(p, q, j));
            }
        }
    return mj;
}

}  // namespace

double EmbeddingRealization::normalization() const { return 1.0 / std::sqrt(static_cast<double>(k)); }

EmbeddingRealization make_realization(std::vector<GPSample> samples) {
    if (samples.empty()) throw InvalidArgument("make_realization: need at least one sample");
    const auto model = samples.front().model;
    for (const auto& s : samples)
        if (s.model != model) throw InvalidArgument("make_realization: samples must share one model");

    EmbeddingRealization e;
    e.k = static_cast<int>(samples.size());
    e.model = model;
    const Eigen::Index rows = 2 * model->num_waves();
    Eigen::MatrixXd coeffs(rows, e.k);
    for (int l = 0; l < e.k; ++l) coeffs.col(l) = samples[l].coefficients;
    e.samples = std::move(samples);

    if (e.k <= rows) {
        e.coefficient_factor = std::move(coeffs);
    } else {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(rows, rows);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(coeffs);
        Eigen::LLT<Eigen::MatrixXd> llt(gram.selfadjointView<Eigen::Lower>());
        if (llt.info() == Eigen::Success)
            e.coefficient_factor = llt.matrixL();
        else
            e.coefficient_factor = std::move(coeffs);
    }
    return e;
}

EmbeddingRealization draw_realization(std::shared_ptr<const GPModel> model, int k,
                                      std::uint64_t seed) {
    if (k < 1) throw InvalidArgument("draw_realization: k must be >= 1");
    std::vector<GPSample> samples;
    samples.reserve(k);
    for (int l = 0; l < k; ++l) samples.push_back(sample(model, derive_seed(seed, l)));
    return make_realization(std::move(samples));
}

Eigen::VectorXd embed_point(const EmbeddingRealization& e, const ManifoldAtlas& atlas,
                            const ChartPoint& x) {
    const Chart& chart = atlas.charts.at(x.chart);
    Eigen::VectorXd out(e.k);
    for (int l = 0; l < e.k; ++l) out(l) = e.samples[l].value(chart, x.x);
    return out * e.normalization();
}

std::vector<MetricJet> pullback_jets(const EmbeddingRealization& e, const WaveBasis& basis) {
    const int m = basis.dim;
    const int width = basis.packed;
    const double inv_k = 1.0 / e.k;
    std::vector<MetricJet> out;
    out.reserve(basis.num_points);
    for (std::size_t start = 0; start < basis.num_points; start += kPointChunk) {
        const std::size_t count = std::min(kPointChunk, basis.num_points - start);
        const Eigen::MatrixXd field_jets =
            e.coefficient_factor.transpose() *
            basis.data.middleCols(static_cast<Eigen::Index>(start * width),
                                  static_cast<Eigen::Index>(count * width));
        for (std::size_t p = 0; p < count; ++p) {
            const auto block = field_jets.middleCols(static_cast<Eigen::Index>(p * width), width);
            const Eigen::MatrixXd gram = inv_k * (block.transpose() * block);
            out.push_back(metric_jet_from_gram(gram, m));
        }
    }
    return out;
}

MetricJet pullback_jet(const EmbeddingRealization& e, const ManifoldAtlas& atlas,
                       const ChartPoint& x) {
    const WaveBasis basis = wave_basis(*e.model, atlas.charts.at(x.chart), {x.x});
    return pullback_jets(e, basis).front();
}

MetricJetField reference_metric(const ManifoldAtlas& atlas) {
    return [&atlas](int chart, std::span<const double> x) {
        return ambient_metric_jet(atlas.charts.at(chart), x);
    };
}

std::array<double, 3> deviation_norms(const std::vector<std::vector<MetricJet>>& pulled,
                                      const std::vector<std::vector<MetricJet>>& target,
                                      int order) {
    if (order < 0 || order > 2)
        throw UnsupportedOrder("ci_deviation_norm: order must be 0, 1 or 2");
    if (pulled.size() != target.size())
        throw InvalidArgument("deviation_norms: chart count mismatch");
    std::array<double, 3> result{0.0, 0.0, 0.0};
    for (std::size_t c = 0; c < pulled.size(); ++c) {
        if (pulled[c].size() != target[c].size())
            throw InvalidArgument("deviation_norms: point count mismatch");
        if (pulled[c].empty()) throw InvalidArgument("deviation_norms: empty grid in a chart");
        const int m = pulled[c].front().dim;
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                double sup0 = 0.0;
                std::vector<double> sup1(m, 0.0);
                std::vector<double> sup2(m * m, 0.0);
                for (std::size_t n = 0; n < pulled[c].size(); ++n) {
                    const MetricJet& a = pulled[c][n];
                    const MetricJet& b = target[c][n];
                    sup0 = std::max(sup0, std::abs(a.g(i, j) - b.g(i, j)));
                    if (order >= 1)
                        for (int p = 0; p < m; ++p)
                            sup1[p] = std::max(sup1[p], std::abs(a.dg(p, i, j) - b.dg(p, i, j)));
                    if (order >= 2)
                        for (int p = 0; p < m; ++p)
                            for (int q = p; q < m; ++q)
                                sup2[p * m + q] = std::max(
                                    sup2[p * m + q], std::abs(a.ddg(p, q, i, j) - b.ddg(p, q, i, j)));
                }
                double norm = sup0;
                result[0] = std::max(result[0], norm);
                if (order >= 1) {
                    for (double s : sup1) norm += s;
                    result[1] = std::max(result[1], norm);
                }
                if (order >= 2) {
                    for (double s : sup2) norm += s;
                    result[2] = std::max(result[2], norm);
                }
            }
    }
    return result;
}

double ci_deviation_norm(const EmbeddingRealization& e, const ManifoldAtlas& atlas,
                         const MetricJetField& target, int order,
                         const std::vector<std::vector<Coord>>& grid) {
    if (order < 0 || order > 2)
        throw UnsupportedOrder("ci_deviation_norm: order must be 0, 1 or 2");
    if (grid.size() != atlas.charts.size())
        throw InvalidArgument("ci_deviation_norm: grid must list points for every chart");
    std::vector<std::vector<MetricJet>> pulled, reference;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        if (grid[c].empty()) throw InvalidArgument("ci_deviation_norm: empty grid in a chart");
        pulled.push_back(pullback_jets(e, wave_basis(*e.model, atlas.charts[c], grid[c])));
        std::vector<MetricJet> ref;
        for (const auto& x : grid[c]) ref.push_back(target(static_cast<int>(c), x));
        reference.push_back(std::move(ref));
    }
    return deviation_norms(pulled, reference, order)[order];
}

}  // namespace randman
