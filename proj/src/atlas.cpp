#include "randman/atlas.hpp"

#include "randman/errors.hpp"
#include "randman/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace randman {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Jet> coordinate_jets(std::span<const double> x) {
    const int m = static_cast<int>(x.size());
    std::vector<Jet> u;
    u.reserve(m);
    for (int i = 0; i < m; ++i) u.push_back(Jet::coordinate(m, i, x[i]));
    return u;
}

// Inverse stereographic projection; sign = +1 projects from the south pole
// (north chart), -1 from the north pole (south chart).
void stereographic_ambient(double radius, double sign, std::span<const double> x,
                           std::span<Jet> out) {
    const auto u = coordinate_jets(x);
    const Jet r2 = u[0] * u[0] + u[1] * u[1];
    const Jet inv = reciprocal(1.0 + r2);
    out[0] = (2.0 * radius) * (u[0] * inv);
    out[1] = (2.0 * radius) * (u[1] * inv);
    out[2] = (sign * radius) * ((1.0 - r2) * inv);
}

double cap_colatitude(std::span<const double> x) {
    return 2.0 * std::atan(std::hypot(x[0], x[1]));
}

Coord invert_plane(std::span<const double> x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    return {x[0] / r2, x[1] / r2};
}

Eigen::MatrixXd invert_plane_jacobian(std::span<const double> x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    Eigen::MatrixXd jac(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            jac(i, j) = ((i == j ? r2 : 0.0) - 2.0 * x[i] * x[j]) / (r2 * r2);
    return jac;
}

}  // namespace

double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

std::vector<Jet> Chart::ambient_jets(std::span<const double> x) const {
    std::vector<Jet> out(ambient_dim, Jet(dim));
    ambient(x, out);
    return out;
}

Eigen::VectorXd Chart::ambient_point(std::span<const double> x) const {
    const auto jets = ambient_jets(x);
    Eigen::VectorXd p(ambient_dim);
    for (int a = 0; a < ambient_dim; ++a) p(a) = jets[a].value;
    return p;
}

Eigen::MatrixXd Chart::ambient_jacobian(std::span<const double> x) const {
    const auto jets = ambient_jets(x);
    Eigen::MatrixXd jac(ambient_dim, dim);
    for (int a = 0; a < ambient_dim; ++a)
        for (int i = 0; i < dim; ++i) jac(a, i) = jets[a].d1(i);
    return jac;
}

std::vector<Eigen::MatrixXd> Chart::ambient_hessian(std::span<const double> x) const {
    const auto jets = ambient_jets(x);
    std::vector<Eigen::MatrixXd> out;
    for (const auto& jt : jets) {
        Eigen::MatrixXd h(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) h(i, j) = jt.d2(i, j);
        out.push_back(std::move(h));
    }
    return out;
}

std::vector<std::vector<double>> Chart::ambient_third(std::span<const double> x) const {
    const auto jets = ambient_jets(x);
    std::vector<std::vector<double>> out;
    for (const auto& jt : jets) {
        std::vector<double> t(dim * dim * dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                for (int l = 0; l < dim; ++l) t[(i * dim + j) * dim + l] = jt.d3(i, j, l);
        out.push_back(std::move(t));
    }
    return out;
}

bool Chart::in_box(std::span<const double> x) const {
    for (int i = 0; i < dim; ++i) {
        if (periodic[i]) continue;
        if (!(x[i] > lower[i] && x[i] < upper[i])) return false;
    }
    return true;
}

Coord Chart::wrap(std::span<const double> x) const {
    Coord out(x.begin(), x.end());
    for (int i = 0; i < dim; ++i) {
        if (!periodic[i]) continue;
        const double period = upper[i] - lower[i];
        double t = std::fmod(out[i] - lower[i], period);
        if (t < 0.0) t += period;
        if (t >= period) t = 0.0;
        out[i] = lower[i] + t;
    }
    return out;
}

const Transition* ManifoldAtlas::find_transition(int from, int to) const {
    for (const auto& t : transitions)
        if (t.from == from && t.to == to) return &t;
    return nullptr;
}

std::size_t ManifoldAtlas::node_count() const {
    std::size_t n = 0;
    for (const auto& q : quadrature) n += q.size();
    return n;
}

ManifoldAtlas make_flat_torus(int m, const std::vector<double>& periods, int nodes_per_axis,
                              const std::vector<double>& origin) {
    if (m < 1 || m > kMaxDim)
        throw InvalidArgument("make_flat_torus: dimension must be in [1, " +
                              std::to_string(kMaxDim) + "]");
    if (static_cast<int>(periods.size()) != m)
        throw InvalidArgument("make_flat_torus: expected " + std::to_string(m) + " periods");
    for (double p : periods)
        if (!(p > 0.0) || !std::isfinite(p))
            throw InvalidArgument("make_flat_torus: periods must be positive");
    if (nodes_per_axis < 4) throw InvalidArgument("make_flat_torus: nodes_per_axis must be >= 4");
    std::vector<double> shift = origin.empty() ? std::vector<double>(m, 0.0) : origin;
    if (static_cast<int>(shift.size()) != m)
        throw InvalidArgument("make_flat_torus: origin has wrong length");

    ManifoldAtlas atlas;
    std::ostringstream name;
    name << "torus:" << m;
    atlas.name = name.str();
    atlas.dim = m;
    atlas.ambient_dim = 2 * m;

    Chart chart;
    chart.id = 0;
    chart.dim = m;
    chart.ambient_dim = 2 * m;
    chart.lower.assign(m, 0.0);
    chart.upper = periods;
    chart.periodic.assign(m, true);
    chart.ambient = [periods, shift, m](std::span<const double> x, std::span<Jet> out) {
        for (int i = 0; i < m; ++i) {
            const double scale = periods[i] / (2.0 * kPi);
            Jet t = Jet::coordinate(m, i, x[i] + shift[i]);
            t *= 1.0 / scale;
            out[2 * i] = scale * cos(t);
            out[2 * i + 1] = scale * sin(t);
        }
    };
    chart.in_region = [](std::span<const double>) { return true; };
    atlas.charts.push_back(chart);

    Transition wrap;
    wrap.from = wrap.to = 0;
    wrap.map = [c = chart](std::span<const double> x) { return c.wrap(x); };
    wrap.jacobian = [m](std::span<const double>) { return Eigen::MatrixXd::Identity(m, m); };
    atlas.transitions.push_back(wrap);

    std::vector<QuadratureRule> rules;
    for (int i = 0; i < m; ++i) rules.push_back(periodic_trapezoid(nodes_per_axis, 0.0, periods[i]));
    std::vector<QuadratureNode> nodes;
    std::vector<int> idx(m, 0);
    while (true) {
        QuadratureNode node;
        node.weight = 1.0;
        for (int i = 0; i < m; ++i) {
            node.x.push_back(rules[i].nodes[idx[i]]);
            node.weight *= rules[i].weights[idx[i]];
        }
        nodes.push_back(std::move(node));
        int axis = m - 1;
        while (axis >= 0 && ++idx[axis] == nodes_per_axis) idx[axis--] = 0;
        if (axis < 0) break;
    }
    atlas.quadrature.push_back(std::move(nodes));
    atlas.partition.push_back([](std::span<const double>) { return 1.0; });

    double volume = 1.0;
    for (double p : periods) volume *= p;
    atlas.exact_volume = volume;
    atlas.exact_lkc.assign(m + 1, 0.0);
    atlas.exact_lkc[m] = volume;
    atlas.quadrature_tolerance = 1e-8;
    return atlas;
}

ManifoldAtlas make_round_sphere(double radius, int nodes) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw InvalidArgument("make_round_sphere: radius must be positive");
    if (nodes < 2) throw InvalidArgument("make_round_sphere: nodes must be >= 2");

    ManifoldAtlas atlas;
    atlas.name = "sphere";
    atlas.dim = 2;
    atlas.ambient_dim = 3;

    const double cap = std::sqrt(3.0);  // tan(pi/3): stereographic radius of theta = 2pi/3
    for (int c = 0; c < 2; ++c) {
        const double sign = c == 0 ? 1.0 : -1.0;
        Chart chart;
        chart.id = c;
        chart.dim = 2;
        chart.ambient_dim = 3;
        chart.lower = {-cap, -cap};
        chart.upper = {cap, cap};
        chart.periodic = {false, false};
        chart.ambient = [radius, sign](std::span<const double> x, std::span<Jet> out) {
            stereographic_ambient(radius, sign, x, out);
        };
        chart.in_region = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] < 3.0; };
        atlas.charts.push_back(chart);
    }

    // Colatitude measured from the chart's own pole, so both weights share one form.
    atlas.partition.push_back([](std::span<const double> x) {
        return 1.0 - smoothstep5((cap_colatitude(x) - kPi / 3.0) / (kPi / 3.0));
    });
    atlas.partition.push_back([](std::span<const double> x) {
        return smoothstep5((2.0 * kPi / 3.0 - cap_colatitude(x)) / (kPi / 3.0));
    });

    for (int c = 0; c < 2; ++c) {
        Transition t;
        t.from = c;
        t.to = 1 - c;
        t.map = invert_plane;
        t.jacobian = invert_plane_jacobian;
        atlas.transitions.push_back(t);
    }

    // Polar coordinates in the stereographic plane, split where the partition
    // weight stops being smooth.
    const double r_inner = std::tan(kPi / 6.0);
    const QuadratureRule panel1 = gauss_legendre(nodes, 0.0, r_inner);
    const QuadratureRule panel2 = gauss_legendre(nodes, r_inner, cap);
    const QuadratureRule angle = periodic_trapezoid(2 * nodes, 0.0, 2.0 * kPi);
    for (int c = 0; c < 2; ++c) {
        std::vector<QuadratureNode> chart_nodes;
        for (const auto* panel : {&panel1, &panel2}) {
            for (std::size_t a = 0; a < panel->nodes.size(); ++a) {
                const double r = panel->nodes[a];
                for (std::size_t b = 0; b < angle.nodes.size(); ++b) {
                    QuadratureNode node;
                    node.x = {r * std::cos(angle.nodes[b]), r * std::sin(angle.nodes[b])};
                    node.weight = panel->weights[a] * angle.weights[b] * r;
                    node.partition = atlas.partition[c](node.x);
                    chart_nodes.push_back(std::move(node));
                }
            }
        }
        atlas.quadrature.push_back(std::move(chart_nodes));
    }

    const double area = 4.0 * kPi * radius * radius;
    atlas.exact_volume = area;
    atlas.exact_lkc = {2.0, 0.0, area};
    atlas.quadrature_tolerance = 1e-8;
    return atlas;
}

MetricJet ambient_metric_jet(const Chart& chart, std::span<const double> x) {
    const int m = chart.dim;
    const auto jets = chart.ambient_jets(x);
    MetricJet mj(m);
    for (const auto& f : jets) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                mj.g(i, j) += f.d1(i) * f.d1(j);
                for (int p = 0; p < m; ++p) {
                    mj.dg(p, i, j) += f.d2(p, i) * f.d1(j) + f.d1(i) * f.d2(p, j);
                    for (int q = 0; q < m; ++q)
                        mj.ddg(p, q, i, j) += f.d3(p, q, i) * f.d1(j) + f.d2(p, i) * f.d2(q, j) +
                                              f.d2(q, i) * f.d2(p, j) + f.d1(i) * f.d3(p, q, j);
                }
            }
    }
    return mj;
}

double integrate_scalar(const ManifoldAtlas& atlas, const ScalarField& field,
                        const MetricField& metric) {
    double total = 0.0;
    for (std::size_t c = 0; c < atlas.quadrature.size(); ++c) {
        const auto& nodes = atlas.quadrature[c];
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            const auto& node = nodes[n];
            if (node.partition == 0.0) continue;
            const Eigen::MatrixXd g = metric(static_cast<int>(c), node.x);
            Eigen::LLT<Eigen::MatrixXd> llt(g);
            if (llt.info() != Eigen::Success)
                throw NumericalDegeneracy("integrate_scalar: metric not positive definite in chart " +
                                          std::to_string(c) + " at node " + std::to_string(n));
            const Eigen::MatrixXd l = llt.matrixL();
            const double sqrt_det = l.diagonal().prod();
            total += node.weight * node.partition * field(static_cast<int>(c), node.x) * sqrt_det;
        }
    }
    return total;
}

std::vector<std::vector<Coord>> evaluation_grid(const ManifoldAtlas& atlas, int per_axis) {
    if (per_axis < 1) throw InvalidArgument("evaluation_grid: per_axis must be positive");
    std::vector<std::vector<Coord>> out;
    for (const auto& chart : atlas.charts) {
        const int m = chart.dim;
        std::vector<Coord> pts;
        std::vector<int> idx(m, 0);
        while (true) {
            Coord x(m);
            for (int i = 0; i < m; ++i) {
                const double h = (chart.upper[i] - chart.lower[i]) / per_axis;
                x[i] = chart.lower[i] + (chart.periodic[i] ? idx[i] : idx[i] + 0.5) * h;
            }
            if (chart.in_region(x)) pts.push_back(std::move(x));
            int axis = m - 1;
            while (axis >= 0 && ++idx[axis] == per_axis) idx[axis--] = 0;
            if (axis < 0) break;
        }
        out.push_back(std::move(pts));
    }
    return out;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    return parts;
}

double parse_real(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InvalidArgument("manifold spec: cannot parse " + what + " '" + s + "'");
    }
    if (used != s.size()) throw InvalidArgument("manifold spec: trailing characters in " + what);
    return v;
}

}  // namespace

ManifoldAtlas parse_manifold(const std::string& spec, int nodes) {
    const auto parts = split(spec, ':');
    if (parts[0] == "torus") {
        if (parts.size() < 2 || parts.size() > 3)
            throw InvalidArgument("manifold spec: expected torus:<m>[:<P1,..,Pm>]");
        const int m = static_cast<int>(parse_real(parts[1], "dimension"));
        std::vector<double> periods(std::max(m, 0), 2.0 * kPi);
        if (parts.size() == 3) {
            periods.clear();
            for (const auto& p : split(parts[2], ',')) periods.push_back(parse_real(p, "period"));
        }
        return make_flat_torus(m, periods, nodes > 0 ? nodes : kDefaultTorusNodes);
    }
    if (parts[0] == "sphere") {
        if (parts.size() != 2) throw InvalidArgument("manifold spec: expected sphere:<radius>");
        return make_round_sphere(parse_real(parts[1], "radius"),
                                 nodes > 0 ? nodes : kDefaultSphereNodes);
    }
    throw InvalidArgument("manifold spec: unknown manifold '" + parts[0] + "'");
}

}  // namespace randman
