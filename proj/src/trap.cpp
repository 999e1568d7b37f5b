#include "ionsim/trap.hpp"

#include "ionsim/units.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ionsim {

namespace {

// Gradient of U = (1/2) sum z^2 + sum_{i<j} 1/|z_i - z_j|.
Eigen::VectorXd gradient(const Eigen::VectorXd& z) {
    const int n = static_cast<int>(z.size());
    Eigen::VectorXd g = z;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = z(i) - z(j);
            g(i) -= d / std::abs(d * d * d);
        }
    }
    return g;
}

// The axial stiffness matrix doubles as the Hessian of U.
Eigen::MatrixXd stiffness_at(const Eigen::VectorXd& z, Axis a,
                             const TrapFrequencies& w) {
    const int n = static_cast<int>(z.size());
    const double c = axis_coefficient(a);
    const double w2 = w.along(a) * w.along(a);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = w2;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d3 = std::pow(std::abs(z(i) - z(j)), 3.0);
            diag -= c / d3;
            k(i, j) = c / d3;
        }
        k(i, i) = diag;
    }
    return k;
}

} // namespace

IonChain IonChain::equilibrium(int n, const TrapFrequencies& w,
                               double grad_tol, int max_iter) {
    if (n < 1) throw std::invalid_argument("IonChain: need at least one ion");
    if (!(w.wz > 0.0) || !(w.wx > 0.0) || !(w.wy > 0.0))
        throw std::invalid_argument("IonChain: trap frequencies must be positive");

    IonChain chain;
    chain.w_ = w;

    if (n == 1) {
        chain.z_ = Eigen::VectorXd::Zero(1);
        chain.grad_norm_ = 0.0;
        return chain;
    }

    // Seed from the asymptotic central spacing; a stretched start keeps the
    // Coulomb terms mild and Newton converges from it for all tested n.
    const double d0 = std::cbrt(24.0 * std::log(6.0 * n)) * std::pow(n, -2.0 / 3.0);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = d0 * (i - 0.5 * (n - 1));

    Eigen::VectorXd g = gradient(z);
    double gnorm = g.lpNorm<Eigen::Infinity>();
    for (int iter = 0; iter < max_iter && gnorm > grad_tol; ++iter) {
        const Eigen::MatrixXd hess = stiffness_at(z, Axis::Z, w);
        Eigen::VectorXd step = hess.ldlt().solve(g);
        if (!step.allFinite()) step = g; // fall back to steepest descent

        // Backtracking on the gradient norm; also reject any step that
        // would reorder ions (the potential is singular at coincidence).
        bool improved = false;
        double s = 1.0;
        for (int bt = 0; bt < 60; ++bt, s *= 0.5) {
            Eigen::VectorXd trial = z - s * step;
            bool ordered = true;
            for (int i = 0; i + 1 < n; ++i)
                if (trial(i + 1) - trial(i) <= 0.0) { ordered = false; break; }
            if (!ordered) continue;
            Eigen::VectorXd gt = gradient(trial);
            const double gn = gt.lpNorm<Eigen::Infinity>();
            if (gn < gnorm) {
                z = std::move(trial);
                g = std::move(gt);
                gnorm = gn;
                improved = true;
                break;
            }
        }
        if (!improved) break; // at the rounding floor; tolerance check follows
    }
    if (gnorm > grad_tol)
        throw std::runtime_error("IonChain: equilibrium solver did not converge");

    chain.z_ = std::move(z);
    chain.grad_norm_ = gnorm;
    return chain;
}

Eigen::VectorXd IonChain::gaps() const {
    const int n = size();
    Eigen::VectorXd g(std::max(0, n - 1));
    for (int i = 0; i + 1 < n; ++i) g(i) = z_(i + 1) - z_(i);
    return g;
}

double IonChain::mean_gap() const {
    if (size() < 2) throw std::domain_error("IonChain: spacing needs >= 2 ions");
    return gaps().mean();
}

double IonChain::min_gap() const {
    if (size() < 2) throw std::domain_error("IonChain: spacing needs >= 2 ions");
    return gaps().minCoeff();
}

Eigen::MatrixXd IonChain::stiffness(Axis a) const {
    return stiffness_at(z_, a, w_);
}

PhononModes IonChain::modes(Axis a) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(stiffness(a));
    PhononModes m;
    m.omega2 = es.eigenvalues();
    m.vectors = es.eigenvectors();

    // Deterministic sign: largest-magnitude component positive.
    for (int k = 0; k < m.vectors.cols(); ++k) {
        int imax = 0;
        m.vectors.col(k).cwiseAbs().maxCoeff(&imax);
        if (m.vectors(imax, k) < 0.0) m.vectors.col(k) *= -1.0;
    }

    m.omega = m.omega2.unaryExpr([](double x) {
        return x > 0.0 ? std::sqrt(x) : std::numeric_limits<double>::quiet_NaN();
    });
    return m;
}

double IonChain::beta(Axis a) const {
    const double wa = w_.along(a);
    return std::abs(axis_coefficient(a)) / (wa * wa * std::pow(mean_gap(), 3.0));
}

double IonChain::beta_local(Axis a) const {
    const double wa = w_.along(a);
    return std::abs(axis_coefficient(a)) / (wa * wa * std::pow(min_gap(), 3.0));
}

StabilityReport IonChain::stability() const {
    StabilityReport r;
    r.min_omega2_x = modes(Axis::X).omega2(0);
    r.min_omega2_y = modes(Axis::Y).omega2(0);
    r.stable = r.min_omega2_x > 0.0 && r.min_omega2_y > 0.0;
    if (size() >= 2) {
        r.beta_x = beta(Axis::X);
        r.beta_y = beta(Axis::Y);
        r.beta_local_x = beta_local(Axis::X);
        r.beta_local_y = beta_local(Axis::Y);
    }
    r.beta_local_threshold = 1.0 / (3.5 * units::zeta3);
    r.coarse_unstable = std::max(r.beta_x, r.beta_y) >= 1.0;
    return r;
}

double beta_estimate(Axis a, int n, const TrapFrequencies& w,
                     std::string* warning) {
    if (n < 1) throw std::invalid_argument("beta_estimate: n must be >= 1");
    if (warning) {
        if (n == 1)
            *warning = "beta is undefined for a single ion (no spacing); "
                       "returned value is the bare formula and has no meaning";
        else if (n <= 3)
            *warning = "asymptotic spacing formula is unreliable for n <= 3";
        else
            warning->clear();
    }
    const double d0_cubed = 24.0 * std::log(6.0 * n) / (static_cast<double>(n) * n);
    const double wa = w.along(a);
    return std::abs(axis_coefficient(a)) / (wa * wa * d0_cubed);
}

double critical_radial_frequency(int n, double rel_tol) {
    if (n < 3) throw std::invalid_argument(
        "critical_radial_frequency: zig-zag needs n >= 3");

    auto min_eig = [n](double wx) {
        TrapFrequencies w{wx, wx, 1.0};
        return IonChain::equilibrium(n, w).modes(Axis::X).omega2(0);
    };

    // The axial equilibrium does not depend on wx, so the lowest transverse
    // eigenvalue is monotone in wx; bracket then bisect.
    double lo = 0.5, hi = 1.0;
    while (min_eig(hi) <= 0.0) hi *= 2.0;
    while (min_eig(lo) >= 0.0) lo *= 0.5;
    while ((hi - lo) / hi > rel_tol) {
        const double mid = 0.5 * (lo + hi);
        (min_eig(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace ionsim
