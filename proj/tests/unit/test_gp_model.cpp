#include "randman/errors.hpp"
#include "randman/gp_model.hpp"
#include "randman/rng.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <memory>

using namespace randman;
using randman::testing::kPi;

namespace {

std::shared_ptr<const GPModel> torus_model(int waves = 64, std::uint64_t seed = 5,
                                           SpectralShape s = SpectralShape::UniformSphereShell) {
    auto atlas = make_flat_torus(2, {2 * kPi, 2 * kPi}, 8);
    return std::make_shared<const GPModel>(build_model(atlas, waves, s, seed));
}

}  // namespace

TEST(GPModel, NormalizationInvariants) {
    for (auto shape : {SpectralShape::UniformSphereShell, SpectralShape::GaussianIsotropic}) {
        for (const char* spec : {"torus:1", "torus:2", "sphere:1", "torus:3"}) {
            auto atlas = parse_manifold(spec, 8);
            auto m = build_model(atlas, 64, shape, 11);
            EXPECT_NEAR(m.total_variance(), 1.0, 1e-12) << spec;
            const int D = atlas.ambient_dim;
            EXPECT_LT((m.second_moment() - Eigen::MatrixXd::Identity(D, D)).norm(), 1e-10) << spec;
        }
    }
}

TEST(GPModel, DeterministicGivenSeed) {
    auto a = torus_model(64, 3), b = torus_model(64, 3), c = torus_model(64, 4);
    EXPECT_TRUE(a->frequencies == b->frequencies);
    EXPECT_TRUE(a->amplitudes == b->amplitudes);
    EXPECT_FALSE(a->frequencies == c->frequencies);
}

TEST(GPModel, TooFewWavesIsRejected) {
    auto atlas = make_flat_torus(2, {1.0, 1.0}, 8);  // D = 4 needs at least 11 waves
    EXPECT_THROW(build_model(atlas, 10, SpectralShape::UniformSphereShell, 1), InvalidArgument);
    EXPECT_NO_THROW(build_model(atlas, 11, SpectralShape::UniformSphereShell, 1));
}

TEST(GPModel, SpectrumNames) {
    EXPECT_EQ(parse_spectral_shape("uniform-shell"), SpectralShape::UniformSphereShell);
    EXPECT_EQ(parse_spectral_shape("gaussian"), SpectralShape::GaussianIsotropic);
    EXPECT_EQ(parse_spectral_shape(to_string(SpectralShape::GaussianIsotropic)),
              SpectralShape::GaussianIsotropic);
    EXPECT_THROW(parse_spectral_shape("pink"), InvalidArgument);
}

TEST(GPModel, InducedMetricIsReferenceMetric) {
    auto torus = make_flat_torus(2, {2 * kPi, 2 * kPi}, 8);
    auto tm = build_model(torus, 64, SpectralShape::UniformSphereShell, 2);
    for (Coord x : {Coord{0.0, 0.0}, Coord{1.0, 5.0}, Coord{3.0, 2.0}})
        EXPECT_LT((induced_metric(tm, torus.charts[0], x) - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-10);
    auto sphere = make_round_sphere(1.0, 8);
    auto sm = build_model(sphere, 64, SpectralShape::GaussianIsotropic, 2);
    // |u| = 1 is the equator of both stereographic charts.
    for (int c = 0; c < 2; ++c)
        EXPECT_LT((induced_metric(sm, sphere, {c, {0.6, 0.8}}) - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-10);
    // Scaling every amplitude by c scales the metric by c^2.
    GPModel scaled = tm;
    scaled.amplitudes *= 3.0;
    EXPECT_LT((induced_metric(scaled, torus.charts[0], Coord{1.0, 2.0}) - 9.0 * Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-9);
}

TEST(GPSample, SingleWaveGradient) {
    auto atlas = make_flat_torus(2, {2 * kPi, 2 * kPi}, 8);
    auto m = std::make_shared<GPModel>();
    m->ambient_dim = 4;
    m->frequencies = Eigen::MatrixXd(4, 1);
    m->frequencies << 0.3, -0.7, 1.1, 0.2;
    m->amplitudes = Eigen::VectorXd::Ones(1);
    GPSample s{m, 0, Eigen::Vector2d(1.0, 0.0)};
    Coord x{0.4, 2.2};
    const auto& chart = atlas.charts[0];
    Jet j = eval_jet(s, chart, x);
    const double phase = m->frequencies.col(0).dot(chart.ambient_point(x));
    Eigen::RowVectorXd expected = -std::sin(phase) * m->frequencies.col(0).transpose() * chart.ambient_jacobian(x);
    EXPECT_NEAR(j.value, std::cos(phase), 1e-14);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(j.d1(i), expected(i), 1e-14);
}

TEST(GPSample, JetMatchesFiniteDifferencesAndIsSymmetric) {
    auto sphere = make_round_sphere(1.0, 8);
    auto m = std::make_shared<const GPModel>(build_model(sphere, 64, SpectralShape::UniformSphereShell, 8));
    auto s = sample(m, 123);
    const auto& chart = sphere.charts[0];
    Coord x{0.3, -0.5};
    Jet j = eval_jet(s, chart, x);
    const double h = 1e-4;
    for (int i = 0; i < 2; ++i) {
        Coord xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        Jet jp = eval_jet(s, chart, xp), jm = eval_jet(s, chart, xm);
        EXPECT_NEAR((jp.value - jm.value) / (2 * h), j.d1(i), 1e-5);
        for (int a = 0; a < 2; ++a) {
            EXPECT_NEAR((jp.d1(a) - jm.d1(a)) / (2 * h), j.d2(i, a), 1e-5);
            for (int b = 0; b < 2; ++b) EXPECT_NEAR((jp.d2(a, b) - jm.d2(a, b)) / (2 * h), j.d3(i, a, b), 1e-5);
        }
    }
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            EXPECT_NEAR(j.d2(a, b), j.d2(b, a), 1e-13 * std::max(1.0, std::abs(j.d2(a, b))));
            for (int c = 0; c < 2; ++c) {
                const double scale = 1e-13 * std::max(1.0, std::abs(j.d3(a, b, c)));
                EXPECT_NEAR(j.d3(a, b, c), j.d3(b, a, c), scale);
                EXPECT_NEAR(j.d3(a, b, c), j.d3(a, c, b), scale);
            }
        }
    EXPECT_NEAR(j.value, s.value(chart, x), 1e-14);
    EXPECT_EQ(eval_jet(s, chart, x).value, j.value);
}

TEST(GPSample, SmoothAcrossTorusSeam) {
    auto atlas = make_flat_torus(2, {2 * kPi, 3.0}, 8);
    auto m = std::make_shared<const GPModel>(build_model(atlas, 64, SpectralShape::GaussianIsotropic, 1));
    auto s = sample(m, 77);
    const auto& chart = atlas.charts[0];
    Coord x{0.2, 0.7}, y{0.2 + 2 * kPi, 0.7 + 3.0};
    Jet a = eval_jet(s, chart, x), b = eval_jet(s, chart, y);
    EXPECT_NEAR(a.value, b.value, 1e-12);
    for (int i = 0; i < 2; ++i) {
        EXPECT_NEAR(a.d1(i), b.d1(i), 1e-12);
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(a.d2(i, j), b.d2(i, j), 1e-11);
    }
}

TEST(GPSample, WaveBasisReproducesJets) {
    auto sphere = make_round_sphere(1.0, 8);
    auto m = std::make_shared<const GPModel>(build_model(sphere, 40, SpectralShape::UniformSphereShell, 4));
    auto s = sample(m, 5);
    std::vector<Coord> pts{{0.1, 0.2}, {-1.0, 0.4}};
    auto basis = wave_basis(*m, sphere.charts[1], pts);
    Eigen::RowVectorXd packed = s.coefficients.transpose() * basis.data;
    for (std::size_t p = 0; p < pts.size(); ++p) {
        Jet j = eval_jet(s, sphere.charts[1], pts[p]);
        std::vector<double> ref(Jet::packed_size(j.dim));
        j.pack(ref);
        for (int i = 0; i < Jet::packed_size(2); ++i)
            EXPECT_NEAR(packed(p * basis.packed + i), ref[i], 1e-12);
    }
    auto vals = wave_values(*m, sphere.charts[1], pts);
    for (std::size_t p = 0; p < pts.size(); ++p)
        EXPECT_NEAR(vals.col(p).dot(s.coefficients), s.value(sphere.charts[1], pts[p]), 1e-12);
}

TEST(GPSample, MonteCarloMomentsMatchCovariance) {
    auto atlas = make_flat_torus(2, {2 * kPi, 2 * kPi}, 8);
    auto m = torus_model(64, 21);
    const auto& chart = atlas.charts[0];
    RandomStream pick(99);
    std::vector<Coord> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({2 * kPi * pick.uniform(), 2 * kPi * pick.uniform()});
    auto basis = wave_values(*m, chart, pts);
    auto jets = wave_basis(*m, chart, {pts[0]});

    const int n = 100000;
    std::vector<double> s1(100, 0.0), s2(100, 0.0);  // products f(x_p) f(y_p)
    double mean = 0.0, var = 0.0;
    Eigen::Matrix2d gsum = Eigen::Matrix2d::Zero(), gsq = Eigen::Matrix2d::Zero();
    for (int t = 0; t < n; ++t) {
        auto s = sample(m, derive_seed(1234, t));
        Eigen::VectorXd v = basis.transpose() * s.coefficients;
        for (int p = 0; p < 100; ++p) {
            double prod = v(2 * p) * v(2 * p + 1);
            s1[p] += prod;
            s2[p] += prod * prod;
        }
        mean += v(0);
        var += v(0) * v(0);
        Eigen::RowVectorXd j = s.coefficients.transpose() * jets.data;
        Eigen::Vector2d grad(j(1), j(2));
        Eigen::Matrix2d outer = grad * grad.transpose();
        gsum += outer;
        gsq += outer.cwiseProduct(outer);
    }
    EXPECT_LT(std::abs(mean / n), 3.0 * std::sqrt(1.0 / n));
    const double v = var / n;
    EXPECT_LT(std::abs(v - 1.0), 3.0 * std::sqrt(2.0 / n));
    for (int p = 0; p < 100; ++p) {
        const double mu = s1[p] / n;
        const double se = std::sqrt((s2[p] / n - mu * mu) / n);
        const double expect = m->covariance(chart.ambient_point(pts[2 * p]), chart.ambient_point(pts[2 * p + 1]));
        EXPECT_LT(std::abs(mu - expect), 4.0 * se) << "pair " << p;
    }
    Eigen::Matrix2d g = induced_metric(*m, chart, pts[0]);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double mu = gsum(i, j) / n;
            const double se = std::sqrt((gsq(i, j) / n - mu * mu) / n);
            EXPECT_LT(std::abs(mu - g(i, j)), 4.0 * se);
        }
}

TEST(GPModel, SerializationRoundTrip) {
    auto m = torus_model(20, 6, SpectralShape::GaussianIsotropic);
    GPModel back = model_from_json(model_to_json(*m));
    EXPECT_TRUE(back.frequencies == m->frequencies);
    EXPECT_TRUE(back.amplitudes == m->amplitudes);
    EXPECT_EQ(back.shape, m->shape);
    EXPECT_EQ(back.seed, m->seed);
    const std::string path = ::testing::TempDir() + "randman_model.json";
    save_model(*m, path);
    GPModel file = load_model(path);
    EXPECT_TRUE(file.frequencies == m->frequencies);
    std::remove(path.c_str());
    EXPECT_THROW(save_model(*m, "/nonexistent-dir/x/model.json"), IoError);
    EXPECT_THROW(model_from_json("{\"ambient_dim\": 2}"), InvalidArgument);
}
