#pragma once

#include "randman/jet.hpp"
#include "randman/metric_jet.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace randman {

using Coord = std::vector<double>;

/// A point given by its chart index and coordinates in that chart.
struct ChartPoint {
    int chart = 0;
    Coord x;
};

/**
 * One coordinate patch. The chart carries an exact third-order jet of its
 * ambient map, from which the Jacobian, Hessians and third derivatives of
 * every ambient coordinate are read off.
 */
struct Chart {
    using AmbientJetFn = std::function<void(std::span<const double>, std::span<Jet>)>;
    using RegionFn = std::function<bool(std::span<const double>)>;

    int id = 0;
    int dim = 0;
    int ambient_dim = 0;
    std::vector<double> lower;
    std::vector<double> upper;
    /// Axis wraps around with period upper - lower.
    std::vector<bool> periodic;
    AmbientJetFn ambient;
    /// The open set covered by this chart, as a subset of the domain box.
    RegionFn in_region;

    std::vector<Jet> ambient_jets(std::span<const double> x) const;
    Eigen::VectorXd ambient_point(std::span<const double> x) const;
    /// D x m
    Eigen::MatrixXd ambient_jacobian(std::span<const double> x) const;
    /// One m x m Hessian per ambient coordinate.
    std::vector<Eigen::MatrixXd> ambient_hessian(std::span<const double> x) const;
    /// Third partials of ambient coordinate a, flattened as (i*m + j)*m + l.
    std::vector<std::vector<double>> ambient_third(std::span<const double> x) const;

    bool in_box(std::span<const double> x) const;
    /// Maps periodic axes back into [lower, upper).
    Coord wrap(std::span<const double> x) const;
};

/// Coordinate change between two charts with its exact Jacobian.
struct Transition {
    int from = 0;
    int to = 0;
    std::function<Coord(std::span<const double>)> map;
    std::function<Eigen::MatrixXd(std::span<const double>)> jacobian;
};

struct QuadratureNode {
    Coord x;
    double weight = 0.0;     ///< includes any coordinate Jacobian of the rule
    double partition = 1.0;  ///< partition-of-unity weight rho at the node
};

struct ManifoldAtlas {
    std::string name;
    int dim = 0;
    int ambient_dim = 0;
    std::vector<Chart> charts;
    std::vector<Transition> transitions;
    std::vector<std::vector<QuadratureNode>> quadrature;
    std::vector<std::function<double(std::span<const double>)>> partition;
    /// Absolute error budget of the quadrature for smooth integrands of unit size.
    double quadrature_tolerance = 1e-8;
    /// Closed-form Lipschitz-Killing curvatures L_0..L_m of the reference metric.
    std::vector<double> exact_lkc;
    /// Closed-form total volume.
    double exact_volume = 0.0;

    const Transition* find_transition(int from, int to) const;
    std::size_t node_count() const;
};

/**
 * Flat torus prod_i [0, P_i) as one periodic chart, embedded in R^{2m} by
 * circles of radius P_i / (2 pi) so the ambient-induced metric is the identity.
 * `origin` shifts the chart: coordinate x corresponds to the point x + origin.
 */
ManifoldAtlas make_flat_torus(int m, const std::vector<double>& periods, int nodes_per_axis,
                              const std::vector<double>& origin = {});

/**
 * Round sphere of the given radius in R^3 covered by two stereographic
 * polar-cap charts. The north chart projects from the south pole and owns
 * colatitude theta < 2 pi / 3; the south chart is symmetric. Their partition
 * weights blend with a quintic smoothstep over theta in (pi/3, 2 pi/3).
 * `nodes` Gauss-Legendre nodes per radial panel (two panels split at the
 * blend boundaries) and 2 * nodes trapezoidal nodes in angle.
 */
ManifoldAtlas make_round_sphere(double radius, int nodes);

/// Metric induced by the ambient map, with exact first and second partials.
MetricJet ambient_metric_jet(const Chart& chart, std::span<const double> x);

using ScalarField = std::function<double(int chart, std::span<const double> x)>;
using MetricField = std::function<Eigen::MatrixXd(int chart, std::span<const double> x)>;

/// sum over charts and nodes of w * rho * field * sqrt(det g).
double integrate_scalar(const ManifoldAtlas& atlas, const ScalarField& field,
                        const MetricField& metric);

/// Per chart, the points of a regular per_axis^m grid over the domain box that
/// fall in the chart's region. Periodic axes use the half-open grid.
std::vector<std::vector<Coord>> evaluation_grid(const ManifoldAtlas& atlas, int per_axis);

/// `torus:<m>[:<P1,..,Pm>]` or `sphere:<radius>`; nodes <= 0 selects the default.
ManifoldAtlas parse_manifold(const std::string& spec, int nodes = 0);

inline constexpr int kDefaultTorusNodes = 64;
inline constexpr int kDefaultSphereNodes = 32;

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 on [0, 1], clamped outside.
double smoothstep5(double t);

}  // namespace randman
