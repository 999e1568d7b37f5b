#pragma once

/**
 * @file trap.hpp
 * @brief Linear Paul-trap ion chain: equilibrium geometry, normal modes,
 *        and stability of the linear configuration.
 *
 * Positions are solved along the trap axis (z) in reduced units (see
 * units.hpp). The three spatial directions decouple at quadratic order, so
 * each axis has its own stiffness matrix and phonon branch:
 *
 *   K^a_ii = w_a^2 - c_a * sum_{j != i} 1 / |z_i - z_j|^3
 *   K^a_ij = c_a / |z_i - z_j|^3                  (i != j)
 *
 * with c_x = c_y = 1 for the transverse branches and c_z = -2 for the axial
 * one. Row sums equal w_a^2 for any geometry, so the center-of-mass vector
 * (1,...,1)/sqrt(N) is always an exact eigenvector with eigenvalue w_a^2.
 *
 * The transverse branches soften as the chain is compressed; the linear
 * chain is stable iff every transverse eigenvalue is positive. The
 * dimensionless stiffness parameter
 *
 *   beta_a = |c_a| / (w_a^2 d^3)
 *
 * (d a characteristic ion spacing) controls both stability margins and the
 * shape of the spin-spin couplings derived in couplings.hpp.
 */

#include <Eigen/Dense>

#include <string>

namespace ionsim {

enum class Axis { X, Y, Z };

/// Trap frequencies in units of the axial frequency (wz is normally 1).
struct TrapFrequencies {
    double wx = 10.0;
    double wy = 10.0;
    double wz = 1.0;

    double along(Axis a) const {
        switch (a) {
        case Axis::X: return wx;
        case Axis::Y: return wy;
        default:      return wz;
        }
    }
};

/// Anisotropy coefficient of the Coulomb curvature along each axis.
inline double axis_coefficient(Axis a) { return a == Axis::Z ? -2.0 : 1.0; }

/// Result of diagonalizing one stiffness matrix.
struct PhononModes {
    Eigen::VectorXd omega2;  ///< eigenvalues of K, ascending (units wz^2)
    Eigen::VectorXd omega;   ///< sqrt(omega2) where positive, NaN otherwise
    Eigen::MatrixXd vectors; ///< orthonormal columns, sign-fixed

    bool stable() const { return omega2.size() > 0 && omega2(0) > 0.0; }
};

/// Stability diagnostics for the linear configuration.
struct StabilityReport {
    bool stable = false;      ///< exact criterion: all transverse omega2 > 0
    double min_omega2_x = 0.0;
    double min_omega2_y = 0.0;
    double beta_x = 0.0;        ///< |c| / (wx^2 d_mean^3)
    double beta_y = 0.0;
    double beta_local_x = 0.0;  ///< |c| / (wx^2 d_min^3), tightest spacing
    double beta_local_y = 0.0;
    /// Homogeneous-chain instability threshold for beta_local:
    /// the zig-zag mode condenses when beta_local exceeds 1 / (3.5 zeta(3)).
    double beta_local_threshold = 0.0;
    /// Order-of-magnitude flag only: beta_mean >= 1 certainly fails, but
    /// chains go unstable well before that (see beta_local_threshold).
    bool coarse_unstable = false;
};

/**
 * @brief An ion chain at its equilibrium configuration.
 *
 * Construct through equilibrium(), which minimizes the axial potential
 *   U = (1/2) sum z_i^2 + sum_{i<j} 1/|z_i - z_j|
 * by a damped Newton iteration until the gradient max-norm drops below
 * the requested tolerance.
 */
class IonChain {
public:
    /// Solve the equilibrium positions for n ions.
    /// @throws std::invalid_argument for n < 1
    /// @throws std::runtime_error if Newton fails to reach tolerance
    static IonChain equilibrium(int n, const TrapFrequencies& w = {},
                                double grad_tol = 1e-12, int max_iter = 300);

    int size() const { return static_cast<int>(z_.size()); }
    const TrapFrequencies& trap() const { return w_; }

    /// Equilibrium positions, ascending, in units of the length scale l.
    const Eigen::VectorXd& positions() const { return z_; }

    /// Max-norm of the potential gradient at the solution.
    double gradient_norm() const { return grad_norm_; }

    /// Nearest-neighbor gaps (size n-1; empty for a single ion).
    Eigen::VectorXd gaps() const;
    double mean_gap() const;
    double min_gap() const;

    /// Stiffness (dynamical) matrix K^a in units of wz^2.
    Eigen::MatrixXd stiffness(Axis a) const;

    /// Normal modes of the given branch. Eigenvalues ascending; each
    /// eigenvector's largest-magnitude component is made positive so the
    /// decomposition is deterministic.
    PhononModes modes(Axis a) const;

    /// Stiffness parameter from the mean nearest-neighbor gap.
    double beta(Axis a) const;
    /// Stiffness parameter from the smallest gap (chain center).
    double beta_local(Axis a) const;

    StabilityReport stability() const;

private:
    IonChain() = default;
    TrapFrequencies w_;
    Eigen::VectorXd z_;
    double grad_norm_ = 0.0;
};

/**
 * @brief Quick analytic estimate of beta along an axis, using the
 *        asymptotic central spacing d0^3 ~ 24 log(6 n) / n^2 of a harmonic
 *        chain. For the axial branch this reduces to
 *        beta_z ~ n^2 / (12 log(6 n)).
 *
 * Useful for order-of-magnitude design only; compare IonChain::beta for
 * measured values. For n = 1 there is no spacing at all, so the estimate is
 * meaningless: the function still returns the formula value but sets
 * *warning to a non-empty message (and does the same for n = 2..3 where the
 * asymptotic form is poor).
 */
double beta_estimate(Axis a, int n, const TrapFrequencies& w = {},
                     std::string* warning = nullptr);

/**
 * @brief Critical transverse confinement of the linear chain.
 *
 * Returns the ratio wx/wz at which the lowest transverse eigenvalue
 * crosses zero (the zig-zag instability), located by bisection to
 * the given relative tolerance.
 */
double critical_radial_frequency(int n, double rel_tol = 1e-10);

} // namespace ionsim
