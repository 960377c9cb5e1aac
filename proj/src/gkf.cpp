#include "randman/gkf.hpp"

#include "randman/errors.hpp"

#include <cmath>
#include <numbers>

namespace randman {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double binomial(int a, int b) {
    double r = 1.0;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
}

}  // namespace

double ball_volume(int n) {
    if (n < 0) throw InvalidArgument("ball_volume: n must be nonnegative");
    if (n == 0) return 1.0;
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double flag_coefficient(int a, int b) {
    if (b < 0 || a < 0 || b > a)
        throw InvalidArgument("flag_coefficient: need 0 <= b <= a");
    return binomial(a, b) * ball_volume(a) / (ball_volume(a - b) * ball_volume(b));
}

GMFTable gmf_point(int n, int j_max) {
    if (n < 1) throw InvalidArgument("gmf_point: n must be >= 1");
    if (j_max < 0) throw InvalidArgument("gmf_point: j_max must be >= 0");
    GMFTable table;
    table.n = n;
    table.values.assign(j_max + 1, 0.0);
    const double half_n = 0.5 * n;
    const double norm = std::pow(2.0, half_n) * std::tgamma(half_n);
    for (int l = 0; n + 2 * l <= j_max; ++l) {
        const int j = n + 2 * l;
        table.values[j] = factorial(j) * std::pow(-0.5, l) / (norm * factorial(l) * (half_n + l));
    }
    return table;
}

double gmf_subspace(int k, int n, int j) {
    if (n < 1 || n > k) throw InvalidArgument("gmf_subspace: need 1 <= n <= k");
    if (j < 0) throw InvalidArgument("gmf_subspace: j must be >= 0");
    return gmf_point(n, j).values[j];
}

std::vector<double> lebesgue_minkowski(const LKCVector& lkc, int N) {
    if (N < 0 || static_cast<int>(lkc.size()) != N + 1)
        throw InvalidArgument("lebesgue_minkowski: LKC vector must have N + 1 entries");
    std::vector<double> m(N + 1);
    for (int j = 0; j <= N; ++j) m[j] = factorial(j) * ball_volume(j) * lkc[N - j];
    return m;
}

double minkowski_tube_volume(const std::vector<double>& minkowski, double rho) {
    double total = 0.0, power = 1.0;
    for (std::size_t j = 0; j < minkowski.size(); ++j) {
        total += power / factorial(static_cast<int>(j)) * minkowski[j];
        power *= rho;
    }
    return total;
}

double gkf_rhs(int i, const LKCVector& lkc_m, const GMFTable& gmf_d, int m) {
    if (i < 0 || i > m) throw InvalidArgument("gkf_rhs: need 0 <= i <= m");
    if (static_cast<int>(lkc_m.size()) != m + 1)
        throw InvalidArgument("gkf_rhs: LKC vector must have m + 1 entries");
    double total = 0.0;
    for (int j = 0; j <= m - i; ++j)
        total += flag_coefficient(i + j, j) * std::pow(2.0 * std::numbers::pi, -0.5 * j) *
                 lkc_m[i + j] * gmf_d.at(j);
    return total;
}

Eigen::VectorXd ZMatrix::apply(const LKCVector& lkc) const {
    if (static_cast<int>(lkc.size()) != size())
        throw InvalidArgument("ZMatrix::apply: size mismatch");
    const Eigen::Map<const Eigen::VectorXd> l(lkc.values.data(), size());
    return z * l;
}

ZMatrix z_matrix(int a) {
    if (a < 0) throw InvalidArgument("z_matrix: a must be >= 0");
    ZMatrix out;
    out.z = Eigen::MatrixXd::Zero(a + 1, a + 1);
    out.z(0, 0) = 1.0;
    for (int n = 1; n <= a; ++n) {
        const GMFTable gmf = gmf_point(n, a);
        for (int j = 0; j <= a; ++j)
            out.z(n, j) = std::pow(2.0 * std::numbers::pi, -0.5 * j) * gmf.values[j];
    }
    return out;
}

LKCVector recover_lkc(const ZMatrix& z, const Eigen::VectorXd& mu) {
    const int size = z.size();
    if (mu.size() != size) throw InvalidArgument("recover_lkc: mu must have a + 1 entries");
    std::vector<double> l(size, 0.0);
    for (int n = size - 1; n >= 0; --n) {
        const double diag = z.z(n, n);
        if (diag == 0.0)
            throw InternalConsistencyError("recover_lkc: zero diagonal entry in Z at row " +
                                           std::to_string(n));
        double rest = mu(n);
        for (int j = n + 1; j < size; ++j) rest -= z.z(n, j) * l[j];
        l[n] = rest / diag;
    }
    return LKCVector(std::move(l));
}

}  // namespace randman
