#include "randman/gp_model.hpp"

#include "randman/errors.hpp"
#include "randman/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace randman {

namespace {

constexpr std::uint64_t kFrequencyStream = 0x6672657175656e63ULL;  // "frequenc"

// s_q = <k_q, i(x)> as a jet.
Jet phase_jet(const std::vector<Jet>& ambient, const Eigen::MatrixXd& freq, int q) {
    Jet s(ambient.front().dim);
    for (std::size_t a = 0; a < ambient.size(); ++a) s.axpy(freq(a, q), ambient[a]);
    return s;
}

}  // namespace

std::string to_string(SpectralShape shape) {
    return shape == SpectralShape::UniformSphereShell ? "uniform-shell" : "gaussian";
}

SpectralShape parse_spectral_shape(const std::string& name) {
    if (name == "uniform-shell" || name == "uniform-sphere-shell")
        return SpectralShape::UniformSphereShell;
    if (name == "gaussian" || name == "gaussian-isotropic") return SpectralShape::GaussianIsotropic;
    throw InvalidArgument("unknown spectrum '" + name + "'");
}

Eigen::MatrixXd GPModel::second_moment() const {
    const Eigen::MatrixXd weighted = frequencies * amplitudes.cwiseAbs2().asDiagonal();
    return weighted * frequencies.transpose();
}

double GPModel::covariance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const {
    const Eigen::VectorXd phase = frequencies.transpose() * (p - q);
    double c = 0.0;
    for (int i = 0; i < num_waves(); ++i) c += amplitudes(i) * amplitudes(i) * std::cos(phase(i));
    return c;
}

void require_same_ambient(const GPModel& model, const Chart& chart, const char* where) {
    if (model.ambient_dim != chart.ambient_dim)
        throw InvalidArgument(std::string(where) + ": model ambient dimension " +
                              std::to_string(model.ambient_dim) + " does not match chart's " +
                              std::to_string(chart.ambient_dim));
}

GPModel build_model(const ManifoldAtlas& atlas, int num_waves, SpectralShape shape,
                    std::uint64_t seed) {
    const int d = atlas.ambient_dim;
    const int floor = d * (d + 1) / 2 + 1;
    if (num_waves < floor)
        throw InvalidArgument("build_model: need at least " + std::to_string(floor) +
                              " waves for ambient dimension " + std::to_string(d));

    GPModel model;
    model.ambient_dim = d;
    model.shape = shape;
    model.seed = seed;
    model.frequencies.resize(d, num_waves);
    RandomStream rng(seed, kFrequencyStream);
    for (int q = 0; q < num_waves; ++q) {
        for (int a = 0; a < d; ++a) model.frequencies(a, q) = rng.normal();
        if (shape == SpectralShape::UniformSphereShell) {
            const double norm = model.frequencies.col(q).norm();
            if (norm == 0.0) throw ModelConstructionError("build_model: zero wave vector drawn");
            model.frequencies.col(q) /= norm;
        }
    }
    model.amplitudes = Eigen::VectorXd::Constant(num_waves, 1.0);
    model.amplitudes /= std::sqrt(model.total_variance());

    // Symmetric correction k -> M^{-1/2} k makes the second moment the identity.
    const Eigen::MatrixXd moment = model.second_moment();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(moment);
    if (eig.info() != Eigen::Success)
        throw ModelConstructionError("build_model: eigen-decomposition of moment matrix failed");
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxMomentCondition) {
        std::ostringstream msg;
        msg << "build_model: moment matrix is singular or ill-conditioned (condition number "
            << (lo > 0.0 ? hi / lo : INFINITY) << ")";
        throw ModelConstructionError(msg.str());
    }
    const Eigen::MatrixXd inv_sqrt = eig.eigenvectors() *
                                     eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                     eig.eigenvectors().transpose();
    model.frequencies = inv_sqrt * model.frequencies;
    return model;
}

Eigen::MatrixXd induced_metric(const GPModel& model, const Chart& chart,
                               std::span<const double> x) {
    const Eigen::MatrixXd jac = chart.ambient_jacobian(x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const double smallest = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smallest > 1e-9))
        throw NumericalDegeneracy("induced_metric: ambient Jacobian is rank deficient in chart " +
                                  std::to_string(chart.id));
    return jac.transpose() * model.second_moment() * jac;
}

Eigen::MatrixXd induced_metric(const GPModel& model, const ManifoldAtlas& atlas,
                               const ChartPoint& x) {
    return induced_metric(model, atlas.charts.at(x.chart), x.x);
}

GPSample sample(std::shared_ptr<const GPModel> model, std::uint64_t seed) {
    GPSample s;
    const int q_count = model->num_waves();
    s.seed = seed;
    s.coefficients.resize(2 * q_count);
    RandomStream rng(seed);
    for (int q = 0; q < q_count; ++q) {
        s.coefficients(q) = model->amplitudes(q) * rng.normal();
        s.coefficients(q_count + q) = model->amplitudes(q) * rng.normal();
    }
    s.model = std::move(model);
    return s;
}

double GPSample::value(const Chart& chart, std::span<const double> x) const {
    const Eigen::VectorXd p = chart.ambient_point(x);
    const Eigen::VectorXd phase = model->frequencies.transpose() * p;
    const int q_count = model->num_waves();
    double f = 0.0;
    for (int q = 0; q < q_count; ++q)
        f += coefficients(q) * std::cos(phase(q)) + coefficients(q_count + q) * std::sin(phase(q));
    return f;
}

Jet eval_jet(const GPSample& s, const Chart& chart, std::span<const double> x) {
    const auto ambient = chart.ambient_jets(x);
    const int q_count = s.model->num_waves();
    Jet f(chart.dim);
    for (int q = 0; q < q_count; ++q) {
        const Jet phase = phase_jet(ambient, s.model->frequencies, q);
        f.axpy(s.coefficients(q), cos(phase));
        f.axpy(s.coefficients(q_count + q), sin(phase));
    }
    return f;
}

Jet eval_jet(const GPSample& s, const ManifoldAtlas& atlas, const ChartPoint& x) {
    return eval_jet(s, atlas.charts.at(x.chart), x.x);
}

WaveBasis wave_basis(const GPModel& model, const Chart& chart, const std::vector<Coord>& points) {
    require_same_ambient(model, chart, "wave_basis");
    WaveBasis basis;
    basis.dim = chart.dim;
    basis.num_waves = model.num_waves();
    basis.packed = Jet::packed_size(chart.dim);
    basis.num_points = points.size();
    const int q_count = basis.num_waves;
    basis.data.resize(2 * q_count, static_cast<Eigen::Index>(basis.packed * points.size()));
    std::vector<double> buf(basis.packed);
    for (std::size_t p = 0; p < points.size(); ++p) {
        const auto ambient = chart.ambient_jets(points[p]);
        const Eigen::Index col0 = static_cast<Eigen::Index>(p * basis.packed);
        for (int q = 0; q < q_count; ++q) {
            const Jet phase = phase_jet(ambient, model.frequencies, q);
            cos(phase).pack(buf);
            for (int c = 0; c < basis.packed; ++c) basis.data(q, col0 + c) = buf[c];
            sin(phase).pack(buf);
            for (int c = 0; c < basis.packed; ++c) basis.data(q_count + q, col0 + c) = buf[c];
        }
    }
    return basis;
}

Eigen::MatrixXd wave_values(const GPModel& model, const Chart& chart,
                            const std::vector<Coord>& points) {
    require_same_ambient(model, chart, "wave_values");
    const int q_count = model.num_waves();
    Eigen::MatrixXd out(2 * q_count, static_cast<Eigen::Index>(points.size()));
    for (std::size_t p = 0; p < points.size(); ++p) {
        const Eigen::VectorXd phase = model.frequencies.transpose() * chart.ambient_point(points[p]);
        for (int q = 0; q < q_count; ++q) {
            out(q, static_cast<Eigen::Index>(p)) = std::cos(phase(q));
            out(q_count + q, static_cast<Eigen::Index>(p)) = std::sin(phase(q));
        }
    }
    return out;
}

std::string model_to_json(const GPModel& model) {
    nlohmann::json j;
    j["ambient_dim"] = model.ambient_dim;
    j["spectrum"] = to_string(model.shape);
    j["seed"] = model.seed;
    nlohmann::json waves = nlohmann::json::array();
    for (int q = 0; q < model.num_waves(); ++q) {
        std::vector<double> k(model.frequencies.col(q).data(),
                              model.frequencies.col(q).data() + model.ambient_dim);
        waves.push_back({{"frequency", k}, {"amplitude", model.amplitudes(q)}});
    }
    j["waves"] = waves;
    return j.dump(2);
}

GPModel model_from_json(const std::string& text) {
    GPModel model;
    try {
        const auto j = nlohmann::json::parse(text);
        model.ambient_dim = j.at("ambient_dim").get<int>();
        model.shape = parse_spectral_shape(j.at("spectrum").get<std::string>());
        model.seed = j.at("seed").get<std::uint64_t>();
        const auto& waves = j.at("waves");
        model.frequencies.resize(model.ambient_dim, static_cast<Eigen::Index>(waves.size()));
        model.amplitudes.resize(static_cast<Eigen::Index>(waves.size()));
        for (std::size_t q = 0; q < waves.size(); ++q) {
            const auto k = waves[q].at("frequency").get<std::vector<double>>();
            if (static_cast<int>(k.size()) != model.ambient_dim)
                throw InvalidArgument("model file: frequency has wrong dimension");
            for (int a = 0; a < model.ambient_dim; ++a)
                model.frequencies(a, static_cast<Eigen::Index>(q)) = k[a];
            model.amplitudes(static_cast<Eigen::Index>(q)) = waves[q].at("amplitude").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("model file: ") + e.what());
    }
    return model;
}

void save_model(const GPModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file " + path);
    out << model_to_json(model) << '\n';
    if (!out) throw IoError("failed writing model file " + path);
}

GPModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read model file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace randman
