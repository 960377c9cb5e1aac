#pragma once

#include "randman/atlas.hpp"
#include "randman/jet.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace randman {

enum class SpectralShape { UniformSphereShell, GaussianIsotropic };

std::string to_string(SpectralShape shape);
/// Accepts the CLI names `uniform-shell` / `gaussian` and the long forms.
SpectralShape parse_spectral_shape(const std::string& name);

/**
 * Finite random-wave model f(x) = sum_q a_q cos<k_q, i(x)> + b_q sin<k_q, i(x)>
 * on an embedded manifold, with a_q, b_q ~ N(0, sigma_q^2). The spectrum is
 * normalized so that sum sigma^2 = 1 and sum sigma^2 k k^T = I_D; the metric
 * induced by the field is then the ambient-induced metric.
 */
struct GPModel {
    int ambient_dim = 0;
    Eigen::MatrixXd frequencies;  ///< D x Q, one wave vector per column
    Eigen::VectorXd amplitudes;   ///< sigma_q
    SpectralShape shape = SpectralShape::UniformSphereShell;
    std::uint64_t seed = 0;

    int num_waves() const { return static_cast<int>(amplitudes.size()); }
    double total_variance() const { return amplitudes.squaredNorm(); }
    /// sum_q sigma_q^2 k_q k_q^T
    Eigen::MatrixXd second_moment() const;
    /// E{f(x) f(y)} as a function of the ambient images of x and y.
    double covariance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const;
};

/// Largest admissible condition number of the raw moment matrix.
inline constexpr double kMaxMomentCondition = 1e6;

GPModel build_model(const ManifoldAtlas& atlas, int num_waves, SpectralShape shape,
                    std::uint64_t seed);

/// g^C_ij(x) = J^T (sum sigma^2 k k^T) J.
Eigen::MatrixXd induced_metric(const GPModel& model, const Chart& chart,
                               std::span<const double> x);
Eigen::MatrixXd induced_metric(const GPModel& model, const ManifoldAtlas& atlas,
                               const ChartPoint& x);

/// One realization: coefficient vector (a_1..a_Q, b_1..b_Q).
struct GPSample {
    std::shared_ptr<const GPModel> model;
    std::uint64_t seed = 0;
    Eigen::VectorXd coefficients;

    double value(const Chart& chart, std::span<const double> x) const;
};

GPSample sample(std::shared_ptr<const GPModel> model, std::uint64_t seed);

/// Value and exact chart partials to third order.
Jet eval_jet(const GPSample& s, const Chart& chart, std::span<const double> x);
Jet eval_jet(const GPSample& s, const ManifoldAtlas& atlas, const ChartPoint& x);

/**
 * Packed jets of every basis function cos<k_q, i(x)>, sin<k_q, i(x)> at a set
 * of points of one chart. Column block p (width Jet::packed_size(m)) belongs
 * to point p; row q is cos of wave q, row Q + q its sine. A field's jets at
 * all points are coefficients^T * data.
 */
struct WaveBasis {
    int dim = 0;
    int num_waves = 0;
    int packed = 0;
    std::size_t num_points = 0;
    Eigen::MatrixXd data;
};

/// Throws InvalidArgument when the model lives in a different ambient space.
void require_same_ambient(const GPModel& model, const Chart& chart, const char* where);

WaveBasis wave_basis(const GPModel& model, const Chart& chart, const std::vector<Coord>& points);

/// Values only (no derivatives): rows as in WaveBasis, one column per point.
Eigen::MatrixXd wave_values(const GPModel& model, const Chart& chart,
                            const std::vector<Coord>& points);

void save_model(const GPModel& model, const std::string& path);
GPModel load_model(const std::string& path);
std::string model_to_json(const GPModel& model);
GPModel model_from_json(const std::string& text);

}  // namespace randman
