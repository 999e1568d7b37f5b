#include "ionsim/couplings.hpp"

#include <cmath>
#include <stdexcept>

namespace ionsim {

Eigen::MatrixXd coupling_matrix(const IonChain& chain, Axis a, double force) {
    const Eigen::MatrixXd k = chain.stiffness(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) <= 0.0)
        throw std::domain_error("coupling_matrix: branch is unstable, couplings undefined");

    const int n = chain.size();
    Eigen::MatrixXd j = -force * force *
        k.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
    j = 0.5 * (j + j.transpose().eval()); // keep exactly symmetric
    j.diagonal().setZero();
    return j;
}

Eigen::MatrixXd coupling_matrix_mode_sum(const PhononModes& modes, double force) {
    if (!modes.stable())
        throw std::domain_error("coupling_matrix_mode_sum: branch is unstable");
    const int n = static_cast<int>(modes.omega2.size());
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int m = 0; m < n; ++m)
        j.noalias() -= (force * force / modes.omega2(m)) *
                       modes.vectors.col(m) * modes.vectors.col(m).transpose();
    j.diagonal().setZero();
    return j;
}

Eigen::MatrixXd coupling_matrix_stiff(const IonChain& chain, Axis a, double force) {
    const int n = chain.size();
    const double wa = chain.trap().along(a);
    const double pref = axis_coefficient(a) * force * force / std::pow(wa, 4.0);
    const auto& z = chain.positions();
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int l = i + 1; l < n; ++l) {
            const double r = std::abs(z(i) - z(l));
            j(i, l) = j(l, i) = pref / (r * r * r);
        }
    return j;
}

double field_correction(double b, const TrapFrequencies& w, Axis a, double force) {
    const double wa = w.along(a);
    return b + force * force / (wa * wa);
}

CouplingProfile coupling_profile(const Eigen::MatrixXd& j) {
    const int n = static_cast<int>(j.rows());
    if (n < 3 || j.cols() != n)
        throw std::invalid_argument("coupling_profile: need a square matrix, n >= 3");

    CouplingProfile p;
    double nn_sum = 0.0;
    for (int i = 0; i + 1 < n; ++i) nn_sum += std::abs(j(i, i + 1));
    p.j0_nn_mean = nn_sum / (n - 1);

    const int c = (n - 1) / 2;
    p.j0_center = std::abs(j(c, c + 1));
    p.antiferro = j(c, c + 1) > 0.0;

    // Least-squares slope of log|J(c, c+r)| against log r.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int r = 1; c + r < n; ++r) {
        const double val = std::abs(j(c, c + r));
        if (val <= 0.0) continue;
        const double x = std::log(static_cast<double>(r));
        const double y = std::log(val);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++m;
    }
    if (m >= 2) {
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        p.fitted_exponent = -slope;
    }
    return p;
}

} // namespace ionsim
