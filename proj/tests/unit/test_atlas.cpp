#include "randman/atlas.hpp"
#include "randman/errors.hpp"
#include "randman/quadrature.hpp"
#include "randman/rng.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace randman;
using randman::testing::kPi;

namespace {

MetricField ambient_metric(const ManifoldAtlas& atlas) {
    return [&atlas](int c, std::span<const double> x) {
        return ambient_metric_jet(atlas.charts[c], x).metric();
    };
}

ScalarField one() {
    return [](int, std::span<const double>) { return 1.0; };
}

}  // namespace

TEST(Quadrature, GaussLegendreIntegratesPolynomialsExactly) {
    auto rule = gauss_legendre(5, -1.0, 2.0);
    for (int p = 0; p <= 9; ++p) {
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], p);
        const double exact = (std::pow(2.0, p + 1) - std::pow(-1.0, p + 1)) / (p + 1);
        EXPECT_NEAR(s, exact, 1e-12 * std::max(1.0, std::abs(exact))) << "degree " << p;
    }
}

TEST(Quadrature, TrapezoidIsSpectralForPeriodicFunctions) {
    auto rule = periodic_trapezoid(32, 0.0, 2.0 * kPi, 0.1);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::exp(std::cos(rule.nodes[i]));
    EXPECT_NEAR(s, 2.0 * kPi * std::cyl_bessel_i(0.0, 1.0), 1e-13);
}

TEST(Atlas, VolumesOfBuiltins) {
    struct Case {
        std::string spec;
        double volume;
    };
    for (const auto& c : std::vector<Case>{{"torus:1", 2 * kPi},
                                           {"torus:2", 4 * kPi * kPi},
                                           {"torus:2:1,3", 3.0},
                                           {"sphere:1", 4 * kPi},
                                           {"sphere:2", 16 * kPi}}) {
        auto atlas = parse_manifold(c.spec);
        EXPECT_NEAR(integrate_scalar(atlas, one(), ambient_metric(atlas)), c.volume, 1e-9)
            << c.spec;
        EXPECT_NEAR(atlas.exact_volume, c.volume, 1e-12) << c.spec;
    }
}

TEST(Atlas, PartitionOfUnitySumsToOne) {
    auto atlas = make_round_sphere(1.0, 16);
    const auto* t = atlas.find_transition(0, 1);
    ASSERT_NE(t, nullptr);
    Coord eq{1.0, 0.0};
    EXPECT_NEAR(atlas.partition[0](eq) + atlas.partition[1](t->map(eq)), 1.0, 1e-12);
    RandomStream rng(4);
    for (int n = 0; n < 1000; ++n) {
        // Uniform in the overlap band, colatitude in (pi/3, 2 pi/3).
        const double theta = kPi / 3.0 * (1.0 + rng.uniform());
        const double r = std::tan(theta / 2.0), a = 2.0 * kPi * rng.uniform();
        Coord x{r * std::cos(a), r * std::sin(a)};
        Coord y = t->map(x);
        EXPECT_NEAR(atlas.partition[0](x) + atlas.partition[1](y), 1.0, 1e-12);
        EXPECT_GE(atlas.partition[0](x), 0.0);
        EXPECT_GE(atlas.partition[1](y), 0.0);
    }
}

TEST(Atlas, PartitionSupportsLieInsideChartRegions) {
    auto atlas = make_round_sphere(1.0, 16);
    for (std::size_t c = 0; c < atlas.charts.size(); ++c)
        for (const auto& node : atlas.quadrature[c])
            if (node.partition > 0.0) EXPECT_TRUE(atlas.charts[c].in_region(node.x));
}

TEST(Atlas, TransitionsAreInverseAndConsistentWithAmbientMap) {
    auto atlas = make_round_sphere(2.0, 16);
    const auto* ab = atlas.find_transition(0, 1);
    const auto* ba = atlas.find_transition(1, 0);
    ASSERT_TRUE(ab && ba);
    for (Coord x : {Coord{0.7, -0.3}, Coord{1.1, 0.9}, Coord{-0.4, 1.3}}) {
        Coord y = ab->map(x);
        Coord z = ba->map(y);
        EXPECT_NEAR(z[0], x[0], 1e-14);
        EXPECT_NEAR(z[1], x[1], 1e-14);
        EXPECT_LT((atlas.charts[0].ambient_point(x) - atlas.charts[1].ambient_point(y)).norm(), 1e-13);
        // Jacobian composition is the identity.
        Eigen::MatrixXd id = ba->jacobian(y) * ab->jacobian(x);
        EXPECT_LT((id - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-13);
        // Jacobian against central differences.
        const double h = 1e-6;
        for (int i = 0; i < 2; ++i) {
            Coord xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            Coord yp = ab->map(xp), ym = ab->map(xm);
            for (int r = 0; r < 2; ++r)
                EXPECT_NEAR((yp[r] - ym[r]) / (2 * h), ab->jacobian(x)(r, i), 1e-7);
        }
    }
}

TEST(Atlas, CosineOnCircleIntegratesToZero) {
    auto atlas = make_flat_torus(1, {2 * kPi}, 16);
    ScalarField f = [](int, std::span<const double> x) { return std::cos(x[0]); };
    EXPECT_NEAR(integrate_scalar(atlas, f, ambient_metric(atlas)), 0.0, 1e-12);
}

TEST(Atlas, IntegrationIsLinear) {
    auto atlas = make_round_sphere(1.0, 24);
    auto g = ambient_metric(atlas);
    ScalarField f = [&](int c, std::span<const double> x) { return atlas.charts[c].ambient_point(x)(2) * atlas.charts[c].ambient_point(x)(2); };
    ScalarField h = [&](int c, std::span<const double> x) { return std::exp(atlas.charts[c].ambient_point(x)(0)); };
    ScalarField lin = [&](int c, std::span<const double> x) { return 2.0 * f(c, x) - 3.0 * h(c, x); };
    const double If = integrate_scalar(atlas, f, g), Ih = integrate_scalar(atlas, h, g);
    EXPECT_NEAR(integrate_scalar(atlas, lin, g), 2.0 * If - 3.0 * Ih, 1e-12);
    EXPECT_NEAR(If, 4.0 * kPi / 3.0, 1e-9);
    EXPECT_NEAR(Ih, 4.0 * kPi * std::sinh(1.0), 1e-9);
}

TEST(Atlas, RefinementConverges) {
    double prev_err = 1.0;
    for (int n : {8, 16, 32}) {
        auto atlas = make_round_sphere(1.0, n);
        ScalarField f = [&](int c, std::span<const double> x) { return std::exp(atlas.charts[c].ambient_point(x)(2)); };
        const double err = std::abs(integrate_scalar(atlas, f, ambient_metric(atlas)) - 4 * kPi * std::sinh(1.0));
        EXPECT_LT(err, std::max(prev_err, 1e-12));
        prev_err = err;
    }
    EXPECT_LT(prev_err, 1e-9);
}

TEST(Atlas, TorusAmbientMetricIsFlat) {
    auto atlas = make_flat_torus(3, {1.0, 2.0, 5.0}, 8);
    for (Coord x : {Coord{0.1, 0.2, 0.3}, Coord{0.9, 1.9, 4.9}}) {
        auto jet = ambient_metric_jet(atlas.charts[0], x);
        EXPECT_LT((jet.metric() - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-14);
        for (int p = 0; p < 3; ++p)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) EXPECT_NEAR(jet.dg(p, i, j), 0.0, 1e-14);
    }
}

TEST(Atlas, AmbientJacobianMatchesFiniteDifferences) {
    auto atlas = make_round_sphere(1.5, 8);
    const auto& chart = atlas.charts[1];
    Coord x{0.4, -0.8};
    auto J = chart.ambient_jacobian(x);
    auto H = chart.ambient_hessian(x);
    auto T = chart.ambient_third(x);
    const double h = 1e-4;
    for (int i = 0; i < 2; ++i) {
        auto fd = randman::testing::central_diff([&](const std::vector<double>& y) { return chart.ambient_point(y); }, x, i, h);
        for (int a = 0; a < 3; ++a) EXPECT_NEAR(fd(a), J(a, i), 1e-7);
        for (int a = 0; a < 3; ++a) {
            auto fdh = randman::testing::central_diff(
                [&](const std::vector<double>& y) { return Eigen::VectorXd(chart.ambient_jacobian(y).row(a).transpose()); }, x, i, h);
            for (int j = 0; j < 2; ++j) EXPECT_NEAR(fdh(j), H[a](i, j), 1e-7);
            auto fdt = randman::testing::central_diff(
                [&](const std::vector<double>& y) { return Eigen::MatrixXd(chart.ambient_hessian(y)[a]); }, x, i, h);
            for (int j = 0; j < 2; ++j)
                for (int l = 0; l < 2; ++l) EXPECT_NEAR(fdt(j, l), T[a][(i * 2 + j) * 2 + l], 1e-6);
        }
    }
}

TEST(Atlas, MetricJetDerivativesMatchFiniteDifferences) {
    auto chart = randman::testing::graph_chart();
    Coord x{0.3, -0.2};
    auto jet = ambient_metric_jet(chart, x);
    const double h = 1e-4;
    for (int p = 0; p < 2; ++p) {
        auto fd = randman::testing::central_diff(
            [&](const std::vector<double>& y) { return Eigen::MatrixXd(ambient_metric_jet(chart, y).metric()); }, x, p, h);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) EXPECT_NEAR(fd(i, j), jet.dg(p, i, j), 1e-7);
        for (int q = 0; q < 2; ++q) {
            auto fd2 = randman::testing::central_diff(
                [&](const std::vector<double>& y) {
                    auto k = ambient_metric_jet(chart, y);
                    Eigen::MatrixXd d(2, 2);
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j) d(i, j) = k.dg(q, i, j);
                    return d;
                },
                x, p, h);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) EXPECT_NEAR(fd2(i, j), jet.ddg(p, q, i, j), 1e-6);
        }
    }
}

TEST(Atlas, ShiftedTorusChartGivesSameIntegrals) {
    auto a = make_flat_torus(2, {2 * kPi, 2 * kPi}, 32);
    auto b = make_flat_torus(2, {2 * kPi, 2 * kPi}, 32, {0.37, -1.1});
    auto fa = [&](int c, std::span<const double> x) { auto p = a.charts[c].ambient_point(x); return std::exp(p(0) + 0.5 * p(3)); };
    auto fb = [&](int c, std::span<const double> x) { auto p = b.charts[c].ambient_point(x); return std::exp(p(0) + 0.5 * p(3)); };
    EXPECT_NEAR(integrate_scalar(a, fa, ambient_metric(a)), integrate_scalar(b, fb, ambient_metric(b)), 1e-10);
}

TEST(Atlas, EvaluationGridRespectsRegionsAndPeriodicity) {
    auto t = make_flat_torus(2, {1.0, 1.0}, 8);
    auto grid = evaluation_grid(t, 4);
    ASSERT_EQ(grid.size(), 1u);
    EXPECT_EQ(grid[0].size(), 16u);
    EXPECT_DOUBLE_EQ(grid[0][0][0], 0.0);
    auto s = make_round_sphere(1.0, 8);
    auto sg = evaluation_grid(s, 16);
    for (std::size_t c = 0; c < sg.size(); ++c)
        for (const auto& x : sg[c]) EXPECT_TRUE(s.charts[c].in_region(x));
}

TEST(Atlas, ParseErrors) {
    EXPECT_THROW(parse_manifold("klein:2"), InvalidArgument);
    EXPECT_THROW(parse_manifold("torus:0"), InvalidArgument);
    EXPECT_THROW(parse_manifold("torus:2:1"), InvalidArgument);
    EXPECT_THROW(parse_manifold("torus:2:1,-1"), InvalidArgument);
    EXPECT_THROW(parse_manifold("sphere:0"), InvalidArgument);
    EXPECT_THROW(make_flat_torus(2, {1.0, 0.0}, 8), InvalidArgument);
}

TEST(Atlas, DegenerateMetricIsReportedWithLocation) {
    auto atlas = make_flat_torus(2, {1.0, 1.0}, 8);
    MetricField singular = [](int, std::span<const double>) { return Eigen::MatrixXd::Zero(2, 2).eval(); };
    try {
        integrate_scalar(atlas, one(), singular);
        FAIL() << "expected NumericalDegeneracy";
    } catch (const NumericalDegeneracy& e) {
        EXPECT_NE(std::string(e.what()).find("chart"), std::string::npos);
    }
}

TEST(Atlas, Smoothstep) {
    EXPECT_DOUBLE_EQ(smoothstep5(-1.0), 0.0);
    EXPECT_DOUBLE_EQ(smoothstep5(2.0), 1.0);
    EXPECT_DOUBLE_EQ(smoothstep5(0.5), 0.5);
}
