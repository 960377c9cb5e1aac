#include "randman/zeros.hpp"

#include "randman/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace randman {

namespace {

struct ValueGrad {
    double value = 0.0;
    double grad[2] = {0.0, 0.0};
};

ValueGrad value_grad(const GPSample& s, const Chart& chart, std::span<const double> x) {
    const auto ambient = chart.ambient_jets(x);
    const GPModel& model = *s.model;
    const int q_count = model.num_waves();
    ValueGrad out;
    for (int q = 0; q < q_count; ++q) {
        double phase = 0.0, d0 = 0.0, d1 = 0.0;
        for (int a = 0; a < model.ambient_dim; ++a) {
            const double k = model.frequencies(a, q);
            phase += k * ambient[a].value;
            d0 += k * ambient[a].d1(0);
            d1 += k * ambient[a].d1(1);
        }
        const double c = std::cos(phase), sn = std::sin(phase);
        const double a = s.coefficients(q), b = s.coefficients(q_count + q);
        out.value += a * c + b * sn;
        const double slope = -a * sn + b * c;
        out.grad[0] += slope * d0;
        out.grad[1] += slope * d1;
    }
    return out;
}

bool chart_usable(const Chart& chart, std::span<const double> x) {
    for (int i = 0; i < chart.dim; ++i) {
        if (chart.periodic[i]) continue;
        const double span = chart.upper[i] - chart.lower[i];
        if (x[i] < chart.lower[i] - span || x[i] > chart.upper[i] + span) return false;
    }
    return std::isfinite(x[0]) && std::isfinite(x[1]);
}

std::optional<Coord> newton(const GPSample& f1, const GPSample& f2, const Chart& chart, Coord x,
                            const ZeroCountOptions& opts) {
    ValueGrad a = value_grad(f1, chart, x), b = value_grad(f2, chart, x);
    double res = std::max(std::abs(a.value), std::abs(b.value));
    for (int it = 0; it < opts.max_newton; ++it) {
        const double det = a.grad[0] * b.grad[1] - a.grad[1] * b.grad[0];
        if (!(std::abs(det) > 1e-14)) return std::nullopt;
        const double dx0 = -(b.grad[1] * a.value - a.grad[1] * b.value) / det;
        const double dx1 = -(-b.grad[0] * a.value + a.grad[0] * b.value) / det;
        double step = 1.0;
        bool accepted = false;
        Coord trial(2);
        ValueGrad ta, tb;
        double trial_res = res;
        for (int halving = 0; halving < 12; ++halving, step *= 0.5) {
            trial = {x[0] + step * dx0, x[1] + step * dx1};
            if (!chart_usable(chart, trial)) continue;
            ta = value_grad(f1, chart, trial);
            tb = value_grad(f2, chart, trial);
            trial_res = std::max(std::abs(ta.value), std::abs(tb.value));
            if (trial_res < res || trial_res < opts.residual_tol) {
                accepted = true;
                break;
            }
        }
        if (!accepted) return std::nullopt;
        const double moved = step * std::hypot(dx0, dx1);
        x = chart.wrap(trial);
        a = ta;
        b = tb;
        res = trial_res;
        if (res < opts.residual_tol && moved < 1e-8) return x;
    }
    return res < opts.residual_tol ? std::optional<Coord>(x) : std::nullopt;
}

/// True when one Newton step from x lands within one cell of x: a root is
/// then expected nearby, so a failed solve means a possibly missed root.
bool root_predicted_near(const GPSample& f1, const GPSample& f2, const Chart& chart,
                         const Coord& x, double h0, double h1) {
    const ValueGrad a = value_grad(f1, chart, x), b = value_grad(f2, chart, x);
    const double det = a.grad[0] * b.grad[1] - a.grad[1] * b.grad[0];
    if (!(std::abs(det) > 1e-14)) return true;
    const double dx0 = -(b.grad[1] * a.value - a.grad[1] * b.value) / det;
    const double dx1 = -(-b.grad[0] * a.value + a.grad[0] * b.value) / det;
    return std::abs(dx0) <= h0 && std::abs(dx1) <= h1;
}

}  // namespace

ZeroCountResult count_common_zeros(const GPSample& f1, const GPSample& f2,
                                   const ManifoldAtlas& atlas, const ZeroCountOptions& opts) {
    if (atlas.dim != 2) throw InvalidArgument("count_common_zeros: manifold must be 2-dimensional");
    if (f1.model != f2.model) throw InvalidArgument("count_common_zeros: fields must share a model");
    if (f1.seed == f2.seed || f1.coefficients == f2.coefficients)
        throw InvalidArgument("count_common_zeros: the two fields come from the same seed");
    for (const Chart& chart : atlas.charts) require_same_ambient(*f1.model, chart, "count_common_zeros");
    if (opts.grid < 2) throw InvalidArgument("count_common_zeros: grid must be >= 2");

    ZeroCountResult result;
    std::vector<Eigen::VectorXd> found;  // ambient positions of accepted roots
    const auto record = [&](const Chart& chart, const Coord& x) {
        const Eigen::VectorXd p = chart.ambient_point(x);
        for (const auto& q : found)
            if ((p - q).norm() < opts.dedupe_tol) return;
        found.push_back(p);
        result.roots.push_back({chart.id, x});
    };

    const int g = opts.grid;
    for (const Chart& chart : atlas.charts) {
        const double h0 = (chart.upper[0] - chart.lower[0]) / g;
        const double h1 = (chart.upper[1] - chart.lower[1]) / g;
        const int v0 = chart.periodic[0] ? g : g + 1;
        const int v1 = chart.periodic[1] ? g : g + 1;
        std::vector<Coord> verts;
        verts.reserve(static_cast<std::size_t>(v0) * v1);
        for (int i = 0; i < v0; ++i)
            for (int j = 0; j < v1; ++j)
                verts.push_back({chart.lower[0] + i * h0, chart.lower[1] + j * h1});
        const Eigen::MatrixXd basis = wave_values(*f1.model, chart, verts);
        const Eigen::VectorXd val1 = basis.transpose() * f1.coefficients;
        const Eigen::VectorXd val2 = basis.transpose() * f2.coefficients;
        const auto vid = [&](int i, int j) { return (i % v0) * v1 + (j % v1); };

        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) {
                const Coord center{chart.lower[0] + (i + 0.5) * h0, chart.lower[1] + (j + 0.5) * h1};
                // Cells wholly outside the chart's region are covered by another chart.
                bool near_region = chart.in_region(center);
                for (int di = 0; di <= 1 && !near_region; ++di)
                    for (int dj = 0; dj <= 1 && !near_region; ++dj) {
                        const Coord corner{chart.lower[0] + (i + di) * h0,
                                           chart.lower[1] + (j + dj) * h1};
                        near_region = chart.in_region(corner);
                    }
                if (!near_region) continue;
                const int ids[4] = {vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)};
                double lo1 = INFINITY, hi1 = -INFINITY, lo2 = INFINITY, hi2 = -INFINITY;
                for (int id : ids) {
                    lo1 = std::min(lo1, val1(id));
                    hi1 = std::max(hi1, val1(id));
                    lo2 = std::min(lo2, val2(id));
                    hi2 = std::max(hi2, val2(id));
                }
                if (!(lo1 <= 0.0 && hi1 >= 0.0 && lo2 <= 0.0 && hi2 >= 0.0)) continue;

                if (auto root = newton(f1, f2, chart, center, opts)) {
                    record(chart, *root);
                    continue;
                }
                bool any = false;
                for (int si = 0; si < 2; ++si)
                    for (int sj = 0; sj < 2; ++sj) {
                        const Coord sub{chart.lower[0] + (i + 0.25 + 0.5 * si) * h0,
                                        chart.lower[1] + (j + 0.25 + 0.5 * sj) * h1};
                        if (auto root = newton(f1, f2, chart, sub, opts)) {
                            record(chart, *root);
                            any = true;
                        }
                    }
                if (!any && root_predicted_near(f1, f2, chart, center, h0, h1))
                    ++result.flagged_cells;
            }
    }
    result.count = static_cast<int>(result.roots.size());
    return result;
}

}  // namespace randman
