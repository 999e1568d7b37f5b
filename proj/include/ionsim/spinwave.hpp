/**
 * @file spinwave.hpp
 * @brief Linear spin-wave theory for the long-range Ising chain on a ring.
 *
 * Both ordered phases of the antiferromagnetic 1/r^p Ising model in a
 * transverse field admit a quadratic boson description:
 *
 *  - Paramagnet (large field): bosons on top of the field-polarized state.
 *    The mode energies are Omega(q)^2 = 1 + Jhat(q)/B in units of 2B, and the
 *    connected zz correlator is the lattice Fourier transform of 1/Omega(q).
 *  - Antiferromagnet (small field): bosons on top of the staggered state,
 *    tilted by the field. The tilt is sin(theta) = B/Jt with Jt = -Jhat(pi)
 *    the staggered band edge, the transverse magnetization is <sx> = -B/Jt,
 *    and the mode energies are Omega(q)^2 = 1 + (B^2/Jt^3) Jhat(q + pi) in
 *    units of 2 Jt. The uniform mode goes soft exactly where the tilt
 *    saturates, at B = Jt. The connected xx correlator is cos^2(theta) times
 *    the transform of 1/Omega(q); the staggered sign of the order is folded
 *    into the momentum shift.
 *
 * Periodic ring couplings J(r) = j0/min(r, n-r)^p remove boundary effects, so
 * those results approximate the bulk of an open chain. Every solution carries
 * the mean boson density; the linearization is trusted only while that stays
 * below spin_wave_density_threshold and all mode energies are real.
 */
#pragma once

#include <Eigen/Dense>

namespace ionsim {

// ===== Ring couplings =====

/// Translation-invariant couplings on a ring of n sites: entry r holds
/// J(r) = j0 / min(r, n-r)^p for r = 1..n-1 and J(0) = 0.
Eigen::VectorXd ring_couplings(int n, double j0, double p);

/// Discrete Fourier transform of a symmetric ring coupling vector:
/// entry k holds Jhat(q_k) = sum_r J(r) cos(q_k r) with q_k = 2 pi k / n.
Eigen::VectorXd coupling_fourier(const Eigen::VectorXd& jr);

// ===== Spin-wave solutions =====

/// Largest mean boson density at which the quadratic theory is reported as
/// trustworthy.
inline constexpr double spin_wave_density_threshold = 0.2;

/// One quadratic spin-wave solution. Vectors indexed by mode number k
/// (momentum q_k = 2 pi k / n) or by ring distance r as noted.
struct SpinWaveSolution {
    int n = 0;             ///< ring size
    double j0 = 0.0;       ///< coupling scale
    double p = 3.0;        ///< power-law exponent
    double field = 0.0;    ///< transverse field B
    bool antiferro = false; ///< true for the staggered (small-field) branch

    Eigen::VectorXd jr;    ///< ring couplings J(r), indexed by distance
    Eigen::VectorXd jq;    ///< Jhat(q_k), indexed by mode
    Eigen::VectorXd omega; ///< mode energies Omega(q_k); NaN where unstable

    /// Connected correlator by ring distance: C^zz on the paramagnetic
    /// branch, C^xx on the antiferromagnetic branch. corr(0) is the on-site
    /// fluctuation (1 at leading order).
    Eigen::VectorXd corr;

    /// Companion kernel A(r) = (1/n) sum_k cos(q_k r) / Omega(q_k)^3. Because
    /// corr(q) ~ 1/Omega = Omega^2/Omega^3, the correlator resums exactly as
    /// corr = prefactor * (A + g * (K conv A)) with a branch-specific kernel
    /// K and weight g; see spin_wave_identity_residual.
    Eigen::VectorXd a_kernel;

    double staggered_edge = 0.0;    ///< Jt = -Jhat(pi) (NaN for odd n)
    double instability_field = 0.0; ///< field where the branch goes soft
    double boson_density = 0.0;     ///< mean a^dag a per site
    double mean_sigma_x = 0.0;      ///< <sx> estimate on this branch
    bool valid = false;             ///< real modes and density below threshold
};

/// Quadratic theory around the field-polarized state. Requires field > 0.
/// Mode energies are real for field > instability_field = -min_q Jhat(q).
SpinWaveSolution paramagnetic_spin_wave(int n, double j0, double p, double field);

/// Quadratic theory around the tilted staggered state. Requires even n and
/// field >= 0; the tilt saturates at field = staggered_edge, beyond which the
/// solution is flagged invalid.
SpinWaveSolution antiferro_spin_wave(int n, double j0, double p, double field);

/// Residual of the resummation identity, evaluated in real space:
/// max_r |corr(r) - prefactor * (A(r) + g * (K conv A)(r))| where the
/// paramagnetic branch has prefactor 1, K(r) = J(r), g = 1/B, and the
/// antiferromagnetic branch has prefactor cos^2(theta) = 1 - (B/Jt)^2,
/// K(r) = (-1)^r J(r), g = B^2/Jt^3. Exact up to rounding, so it doubles as
/// an internal consistency check.
double spin_wave_identity_residual(const SpinWaveSolution& sw);

} // namespace ionsim
