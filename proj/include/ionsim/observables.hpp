#pragma once

/**
 * @file observables.hpp
 * @brief Measurements on matrix-product states and the statistical fits
 *        used to pull phase-diagram quantities out of them.
 *
 * Measurement routines take the state by non-const reference because they
 * shuttle the orthogonality center along the chain; the physical state is
 * unchanged. All expectation values are normalized by the state's norm, so
 * callers need not renormalize first.
 *
 * The fits are deliberately simple and transparent: straight-line least
 * squares in log space, with an explicit window-sensitivity band so that a
 * quoted exponent carries its own robustness estimate.
 */

#include "ionsim/mps.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ionsim {

// ----- Local expectation values --------------------------------------------

/// Per-site <sx_i>.
Eigen::VectorXd measure_sigma_x(Mps& psi);
/// Per-site <sz_i>.
Eigen::VectorXd measure_sigma_z(Mps& psi);
/// Per-site <sy_i>; identically zero for the real states produced by the
/// ground-state solvers, kept for completeness of the triple.
Eigen::VectorXd measure_sigma_y(Mps& psi);

// ----- Two-point functions --------------------------------------------------

/// Row of <o1_{j0} o2_j> for all j; entry j0 holds <(o1 o2)_{j0}>.
/// The operators are 2x2 matrices in the sz basis (bra index first).
Eigen::VectorXd correlation_row(Mps& psi, int j0, const Eigen::Matrix2d& o1,
                                const Eigen::Matrix2d& o2);

Eigen::VectorXd correlation_zz_row(Mps& psi, int j0);
Eigen::VectorXd correlation_xx_row(Mps& psi, int j0);
Eigen::VectorXd correlation_yy_row(Mps& psi, int j0);

/// Connected version: <sz_{j0} sz_j> - <sz_{j0}><sz_j>, and likewise xx.
Eigen::VectorXd connected_zz_row(Mps& psi, int j0);
Eigen::VectorXd connected_xx_row(Mps& psi, int j0);

// ----- Entanglement ----------------------------------------------------------

/// Von Neumann entropy across each of the n-1 bonds.
Eigen::VectorXd entanglement_entropies(Mps& psi);

// ----- Fits ------------------------------------------------------------------

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0; ///< coefficient of determination
    int points = 0;
};

/// Ordinary least squares through (x, y) pairs.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct DecayFit {
    double exponent = 0.0;    ///< power law: |C| ~ r^(-exponent)
    double amplitude = 0.0;   ///< prefactor at r = 1
    double r2 = 0.0;
    double window_band = 0.0; ///< exponent spread when the window is nudged
    int rmin = 0, rmax = 0;
    int points = 0;
};

/// Log-log fit of |c[r]| over r in [rmin, rmax]. Entries below 1e-12 in
/// magnitude are skipped; at least three usable points are required.
/// @throws std::invalid_argument for malformed windows or too few points
DecayFit fit_power_law_decay(const std::vector<double>& c, int rmin, int rmax);

struct ExpDecayFit {
    double xi = 0.0;          ///< correlation length: |C| ~ exp(-r / xi)
    double rate = 0.0;        ///< 1 / xi
    double amplitude = 0.0;
    double r2 = 0.0;
    double window_band = 0.0; ///< xi spread when the window is nudged
    int rmin = 0, rmax = 0;
    int points = 0;
};

/// Semilog fit of |c[r]| over r in [rmin, rmax]; same floor and point rules.
ExpDecayFit fit_exponential_decay(const std::vector<double>& c, int rmin,
                                  int rmax);

// ----- Transition locators ----------------------------------------------------

struct CurvaturePeak {
    double location = 0.0; ///< refined abscissa of max |d^2 y / d x^2|
    double curvature = 0.0;
    int index = 0;         ///< grid index of the discrete maximum
};

/// Maximum-|curvature| point of y(x) by nonuniform central differences with
/// parabolic refinement between grid points. Needs at least five points.
CurvaturePeak peak_curvature(const std::vector<double>& x,
                             const std::vector<double>& y);

/// Transition estimate from a magnetization curve m(b): the field where
/// |d^2 m / d b^2| peaks.
CurvaturePeak locate_critical_field(const std::vector<double>& b,
                                    const std::vector<double>& m);

/// Per-site transition estimates from site-resolved magnetization curves
/// (one row per field value, one column per site).
std::vector<double> local_critical_fields(const std::vector<double>& b,
                                          const Eigen::MatrixXd& site_m);

/// Log-log regression of xi on |b - bc| for xi ~ |b - bc|^(-nu); the
/// critical exponent is nu = -slope. Points with |b - bc| or xi below
/// 1e-12 (or nonfinite xi) are skipped.
LinearFit fit_critical_exponent(const std::vector<double>& b,
                                const std::vector<double>& xi, double bc);

/// First field (on an ascending grid) where m reaches 1 - tol; NaN if never.
double saturation_onset(const std::vector<double>& b,
                        const std::vector<double>& m, double tol = 1e-3);

} // namespace ionsim
