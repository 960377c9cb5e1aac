#include "randman/curvature.hpp"

#include "randman/errors.hpp"
#include "randman/gkf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace randman {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Positions (ascending) of `chosen` elements and their complement, with the
// sign of the permutation that lists chosen first.
struct Shuffle {
    std::vector<int> first;
    std::vector<int> rest;
    double sign;
};

std::vector<Shuffle> shuffles(int total, int chosen) {
    std::vector<Shuffle> out;
    std::vector<bool> mask(total, false);
    std::fill(mask.begin(), mask.begin() + chosen, true);
    do {
        Shuffle s;
        int inversions = 0, seen_rest = 0;
        for (int i = 0; i < total; ++i) {
            if (mask[i]) {
                s.first.push_back(i);
                inversions += seen_rest;
            } else {
                s.rest.push_back(i);
                ++seen_rest;
            }
        }
        s.sign = inversions % 2 == 0 ? 1.0 : -1.0;
        out.push_back(std::move(s));
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return out;
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxMetricCondition) {
        std::ostringstream msg;
        msg << "metric is singular or ill-conditioned (condition number "
            << (lo > 0.0 ? hi / lo : INFINITY) << ")";
        throw NumericalDegeneracy(msg.str());
    }
    return g.llt().solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
}

// Curvature components in a g-orthonormal frame, sign-adjusted to the double form.
std::vector<double> orthonormal_curvature_form(const CurvatureTensor& r, const Eigen::MatrixXd& g) {
    const int m = r.dim;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw NumericalDegeneracy("double_form_power_trace: metric not positive definite");
    // Columns of E = L^{-T} form a g-orthonormal frame.
    const Eigen::MatrixXd lower = llt.matrixL();
    const Eigen::MatrixXd frame =
        lower.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(m, m));
    std::vector<double> cur = r.r, next(cur.size());
    const auto idx = [m](int a, int b, int c, int d) { return ((a * m + b) * m + c) * m + d; };
    // Contract one slot at a time.
    for (int slot = 0; slot < 4; ++slot) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                for (int c = 0; c < m; ++c)
                    for (int d = 0; d < m; ++d) {
                        int t[4] = {a, b, c, d};
                        double sum = 0.0;
                        for (int s = 0; s < m; ++s) {
                            int u[4] = {a, b, c, d};
                            u[slot] = s;
                            sum += frame(s, t[slot]) * cur[idx(u[0], u[1], u[2], u[3])];
                        }
                        next[idx(a, b, c, d)] = sum;
                    }
        std::swap(cur, next);
    }
    for (double& v : cur) v *= kCurvatureFormSign;
    return cur;
}

// Component (S; T) of the p-th power of the (2,2) form `omega` (orthonormal
// frame), S and T index lists of length 2p.
double power_component(const std::vector<double>& omega, int m, const std::vector<int>& upper,
                       const std::vector<int>& lower) {
    const int len = static_cast<int>(upper.size());
    if (len == 0) return 1.0;
    if (len == 2)
        return omega[((upper[0] * m + upper[1]) * m + lower[0]) * m + lower[1]];
    static thread_local std::vector<std::vector<std::vector<Shuffle>>> cache;
    if (static_cast<int>(cache.size()) <= len) cache.resize(len + 1);
    auto& by_len = cache[len];
    if (by_len.empty()) by_len.push_back(shuffles(len, 2));
    const auto& sh = by_len.front();
    double total = 0.0;
    for (const auto& a : sh) {
        const int u0 = upper[a.first[0]], u1 = upper[a.first[1]];
        if (u0 == u1) continue;
        std::vector<int> upper_rest;
        for (int i : a.rest) upper_rest.push_back(upper[i]);
        for (const auto& b : sh) {
            const int l0 = lower[b.first[0]], l1 = lower[b.first[1]];
            const double w = omega[((u0 * m + u1) * m + l0) * m + l1];
            if (w == 0.0) continue;
            std::vector<int> lower_rest;
            for (int i : b.rest) lower_rest.push_back(lower[i]);
            total += a.sign * b.sign * w * power_component(omega, m, upper_rest, lower_rest);
        }
    }
    return total;
}

}  // namespace

double CurvatureTensor::norm() const {
    double s = 0.0;
    for (double v : r) s += v * v;
    return std::sqrt(s);
}

ChristoffelField christoffel(const MetricJet& jet) {
    const int m = jet.dim;
    const Eigen::MatrixXd g_inv = checked_inverse(jet.metric());
    ChristoffelField out;
    out.dim = m;
    out.gamma.assign(m * m * m, 0.0);
    for (int n = 0; n < m; ++n)
        for (int j = 0; j < m; ++j)
            for (int k = j; k < m; ++k) {
                double s = 0.0;
                for (int l = 0; l < m; ++l)
                    s += g_inv(n, l) * (jet.dg(k, l, j) + jet.dg(j, l, k) - jet.dg(l, j, k));
                out(n, j, k) = out(n, k, j) = 0.5 * s;
            }
    return out;
}

CurvatureTensor riemann(const MetricJet& jet, const ChristoffelField& gamma) {
    const int m = jet.dim;
    CurvatureTensor out;
    out.dim = m;
    out.r.assign(m * m * m * m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) {
                    double v = 0.5 * (jet.ddg(j, k, i, l) + jet.ddg(i, l, j, k) -
                                      jet.ddg(j, l, i, k) - jet.ddg(i, k, j, l));
                    for (int n = 0; n < m; ++n)
                        for (int p = 0; p < m; ++p)
                            v += jet.g(n, p) *
                                 (gamma(n, j, k) * gamma(p, i, l) - gamma(n, j, l) * gamma(p, i, k));
                    out(i, j, k, l) = v;
                }
    return out;
}

Eigen::MatrixXd covariant_hessian(const Jet& f, const ChristoffelField& gamma) {
    const int m = gamma.dim;
    Eigen::MatrixXd h(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double v = f.d2(i, j);
            for (int l = 0; l < m; ++l) v -= gamma(l, i, j) * f.d1(l);
            h(i, j) = v;
        }
    return h;
}

DoubleForm::DoubleForm(int dim, int degree) : dim_(dim), degree_(degree) {
    if (dim < 1 || degree < 0) throw InvalidArgument("DoubleForm: bad dimension or degree");
    std::size_t size = 1;
    for (int i = 0; i < 2 * degree; ++i) size *= static_cast<std::size_t>(dim);
    comps_.assign(size, 0.0);
}

std::size_t DoubleForm::index(std::span<const int> upper, std::span<const int> lower) const {
    std::size_t idx = 0;
    for (int v : upper) idx = idx * dim_ + v;
    for (int v : lower) idx = idx * dim_ + v;
    return idx;
}

double DoubleForm::at(std::span<const int> upper, std::span<const int> lower) const {
    return comps_[index(upper, lower)];
}

double& DoubleForm::at(std::span<const int> upper, std::span<const int> lower) {
    return comps_[index(upper, lower)];
}

DoubleForm DoubleForm::operator*(const DoubleForm& other) const {
    if (other.dim_ != dim_) throw InvalidArgument("DoubleForm product: dimension mismatch");
    const int a = degree_, b = other.degree_, d = a + b;
    DoubleForm out(dim_, d);
    const auto sh = shuffles(d, a);
    std::vector<int> x(d, 0), y(d, 0), xa(a), ya(a), xb(b), yb(b);
    for (std::size_t flat = 0; flat < out.comps_.size(); ++flat) {
        std::size_t rem = flat;
        for (int i = d - 1; i >= 0; --i) {
            y[i] = static_cast<int>(rem % dim_);
            rem /= dim_;
        }
        for (int i = d - 1; i >= 0; --i) {
            x[i] = static_cast<int>(rem % dim_);
            rem /= dim_;
        }
        double total = 0.0;
        for (const auto& s : sh) {
            for (int i = 0; i < a; ++i) xa[i] = x[s.first[i]];
            for (int i = 0; i < b; ++i) xb[i] = x[s.rest[i]];
            for (const auto& t : sh) {
                for (int i = 0; i < a; ++i) ya[i] = y[t.first[i]];
                for (int i = 0; i < b; ++i) yb[i] = y[t.rest[i]];
                total += s.sign * t.sign * at(xa, ya) * other.at(xb, yb);
            }
        }
        out.comps_[flat] = total;
    }
    return out;
}

double DoubleForm::trace(const Eigen::MatrixXd& g_inverse) const {
    const int d = degree_;
    double total = 0.0;
    std::vector<int> x(d), y(d);
    for (std::size_t flat = 0; flat < comps_.size(); ++flat) {
        if (comps_[flat] == 0.0) continue;
        std::size_t rem = flat;
        for (int i = d - 1; i >= 0; --i) {
            y[i] = static_cast<int>(rem % dim_);
            rem /= dim_;
        }
        for (int i = d - 1; i >= 0; --i) {
            x[i] = static_cast<int>(rem % dim_);
            rem /= dim_;
        }
        double w = comps_[flat];
        for (int i = 0; i < d; ++i) w *= g_inverse(x[i], y[i]);
        total += w;
    }
    return total / factorial(d);
}

DoubleForm curvature_double_form(const CurvatureTensor& r) {
    const int m = r.dim;
    DoubleForm out(m, 2);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) {
                    const int up[2] = {i, j}, lo[2] = {k, l};
                    out.at(up, lo) = kCurvatureFormSign * r(i, j, k, l);
                }
    return out;
}

double double_form_power_trace(const CurvatureTensor& r, const Eigen::MatrixXd& g, int p) {
    const int m = r.dim;
    if (p < 0 || 2 * p > m)
        throw InvalidArgument("double_form_power_trace: need 0 <= 2p <= m");
    if (p == 0) return 1.0;
    const std::vector<double> omega = orthonormal_curvature_form(r, g);
    // In an orthonormal frame the trace is the sum of diagonal components
    // over increasing index sets.
    const int len = 2 * p;
    std::vector<bool> mask(m, false);
    std::fill(mask.begin(), mask.begin() + len, true);
    double total = 0.0;
    do {
        std::vector<int> set;
        for (int i = 0; i < m; ++i)
            if (mask[i]) set.push_back(i);
        total += power_component(omega, m, set, set);
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return total;
}

double lkc_constant(int m, int j) {
    if ((m - j) % 2 != 0) return 0.0;
    const int p = (m - j) / 2;
    return std::pow(-2.0 * std::numbers::pi, -p) / factorial(p);
}

LKCVector lkc(const ManifoldAtlas& atlas, const std::vector<std::vector<MetricJet>>& jets) {
    const int m = atlas.dim;
    if (jets.size() != atlas.quadrature.size())
        throw InvalidArgument("lkc: need metric jets for every chart");
    std::vector<double> integrals(m + 1, 0.0);
    for (std::size_t c = 0; c < jets.size(); ++c) {
        const auto& nodes = atlas.quadrature[c];
        if (jets[c].size() != nodes.size())
            throw InvalidArgument("lkc: need one metric jet per quadrature node");
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            const auto& node = nodes[n];
            if (node.partition == 0.0) continue;
            const MetricJet& jet = jets[c][n];
            const Eigen::MatrixXd g = jet.metric();
            Eigen::LLT<Eigen::MatrixXd> llt(g);
            if (llt.info() != Eigen::Success)
                throw NumericalDegeneracy("lkc: metric not positive definite in chart " +
                                          std::to_string(c) + " at node " + std::to_string(n));
            const Eigen::MatrixXd lower = llt.matrixL();
            const double volume = node.weight * node.partition * lower.diagonal().prod();
            integrals[m] += volume;
            if (m < 2) continue;
            CurvatureTensor r;
            try {
                r = riemann(jet, christoffel(jet));
            } catch (const NumericalDegeneracy& e) {
                throw NumericalDegeneracy(std::string("lkc: chart ") + std::to_string(c) +
                                          " node " + std::to_string(n) + ": " + e.what());
            }
            for (int j = m - 2; j >= 0; j -= 2)
                integrals[j] += volume * double_form_power_trace(r, g, (m - j) / 2);
        }
    }
    std::vector<double> out(m + 1, 0.0);
    for (int j = 0; j <= m; ++j)
        if ((m - j) % 2 == 0) out[j] = lkc_constant(m, j) * integrals[j];
    return LKCVector(std::move(out));
}

LKCVector reference_lkc(const ManifoldAtlas& atlas) {
    std::vector<std::vector<MetricJet>> jets;
    for (std::size_t c = 0; c < atlas.charts.size(); ++c) {
        std::vector<MetricJet> chart_jets;
        for (const auto& node : atlas.quadrature[c])
            chart_jets.push_back(ambient_metric_jet(atlas.charts[c], node.x));
        jets.push_back(std::move(chart_jets));
    }
    return lkc(atlas, jets);
}

double tube_volume(const LKCVector& lkc_values, double rho, int N) {
    if (rho < 0.0) throw InvalidArgument("tube_volume: rho must be nonnegative");
    if (static_cast<int>(lkc_values.size()) != N + 1)
        throw InvalidArgument("tube_volume: LKC vector must have N + 1 entries");
    double total = 0.0;
    for (int j = 0; j <= N; ++j) total += std::pow(rho, N - j) * ball_volume(N - j) * lkc_values[j];
    return total;
}

}  // namespace randman
