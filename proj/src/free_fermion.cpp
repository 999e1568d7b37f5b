#include "ionsim/free_fermion.hpp"

#include "ionsim/units.hpp"

#include <cmath>
#include <stdexcept>

namespace ionsim {

// ===== Transverse-field Ising chain =======================================

TfimSolution solve_tfim_nn(int n, double j, double b) {
    if (n < 2) throw std::invalid_argument("solve_tfim_nn: need n >= 2");

    Eigen::MatrixXd t = -b * Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i + 1 < n; ++i) t(i, i + 1) += j;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);

    TfimSolution s;
    s.n = n;
    s.j = j;
    s.b = b;
    s.energy = -svd.singularValues().sum();
    s.contraction = -(svd.matrixU() * svd.matrixV().transpose());
    s.modes = 2.0 * svd.singularValues().reverse();
    s.gap = s.modes(0);
    return s;
}

double tfim_sigma_x(const TfimSolution& s, int i) {
    return -s.contraction(i, i);
}

double tfim_corr_zz(const TfimSolution& s, int i, int j) {
    if (i == j) return 1.0;
    if (i > j) std::swap(i, j);
    const int m = j - i;
    Eigen::MatrixXd d(m, m);
    for (int a = 0; a < m; ++a)
        for (int c = 0; c < m; ++c) d(a, c) = s.contraction(i + a, i + 1 + c);
    return d.determinant();
}

double tfim_corr_xx_connected(const TfimSolution& s, int i, int j) {
    if (i == j) return 1.0 - tfim_sigma_x(s, i) * tfim_sigma_x(s, i);
    return -s.contraction(i, j) * s.contraction(j, i);
}

// ===== XY nearest-neighbor chain ==========================================

XxSolution solve_xx_nn(int n, double j, double b) {
    if (n < 2) throw std::invalid_argument("solve_xx_nn: need n >= 2");

    XxSolution s;
    s.n = n;
    s.j = j;
    s.b = b;
    s.g = Eigen::MatrixXd::Zero(n, n);
    s.energy = n * b; // field offset; mode fillings add to it

    const double norm = std::sqrt(2.0 / (n + 1));
    for (int k = 1; k <= n; ++k) {
        const double theta = units::pi * k / (n + 1);
        const double eps = 4.0 * j * std::cos(theta) - 2.0 * b;
        if (eps >= 0.0) continue;
        s.energy += eps;
        ++s.occupied;
        Eigen::VectorXd phi(n);
        for (int i = 0; i < n; ++i) phi(i) = norm * std::sin(theta * (i + 1));
        s.g.noalias() += phi * phi.transpose();
    }
    return s;
}

double xx_sigma_z(const XxSolution& s, int i) { return 1.0 - 2.0 * s.g(i, i); }

double xx_magnetization(const XxSolution& s) {
    return 1.0 - 2.0 * static_cast<double>(s.occupied) / s.n;
}

double xx_corr_zz_connected(const XxSolution& s, int i, int j) {
    if (i == j) return 1.0 - xx_sigma_z(s, i) * xx_sigma_z(s, i);
    return -4.0 * s.g(i, j) * s.g(j, i);
}

double xx_corr_xx(const XxSolution& s, int i, int j) {
    if (i == j) return 1.0;
    if (i > j) std::swap(i, j);
    const int m = j - i;
    // String determinant over <B_p A_q> = 2 G_pq - delta_pq.
    Eigen::MatrixXd d(m, m);
    for (int a = 0; a < m; ++a)
        for (int c = 0; c < m; ++c) {
            const int p = i + a, q = i + 1 + c;
            d(a, c) = 2.0 * s.g(p, q) - (p == q ? 1.0 : 0.0);
        }
    return d.determinant();
}

double xx_saturation_field(int n, double j) {
    return 2.0 * std::abs(j) * std::cos(units::pi / (n + 1));
}

double xx_sector_energy(int n, double j, int n_flipped) {
    if (n_flipped < 0 || n_flipped > n)
        throw std::invalid_argument("xx_sector_energy: n_flipped out of range");
    // Fill the lowest single-particle modes at zero field.
    Eigen::VectorXd eps(n);
    for (int k = 1; k <= n; ++k)
        eps(k - 1) = 4.0 * j * std::cos(units::pi * k / (n + 1));
    std::sort(eps.data(), eps.data() + n);
    double e = 0.0;
    for (int k = 0; k < n_flipped; ++k) e += eps(k);
    return e;
}

} // namespace ionsim
