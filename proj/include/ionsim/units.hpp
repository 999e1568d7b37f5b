#pragma once

/**
 * @file units.hpp
 * @brief Unit system and mathematical constants used across the library.
 *
 * The library works in reduced (dimensionless) units throughout:
 *
 *   - mass m = 1, squared charge e^2 = 1 (Gaussian convention), hbar = 1,
 *   - the axial trap frequency sets the time scale, omega_z = 1,
 *   - lengths are measured in l = (e^2 / (m omega_z^2))^(1/3), the scale on
 *     which Coulomb repulsion and the axial confinement balance.
 *
 * In these units the potential energy of a linear chain is
 *   U = (1/2) sum_i z_i^2 + sum_{i<j} 1 / |z_i - z_j|,
 * radial trap frequencies are quoted as ratios omega_{x,y} / omega_z, and
 * spin couplings come out directly in the natural energy scale. Helpers are
 * provided to convert to laboratory units when needed.
 */

#include <cmath>

namespace ionsim::units {

// Riemann zeta(3) (Apery's constant), used by homogeneous-chain stability
// estimates that sum 1/r^3 over all neighbor distances.
inline constexpr double zeta3 = 1.2020569031595942854;

// Dirichlet eta(3) = (3/4) zeta(3): alternating sum of 1/r^3. Sets the
// staggered band edge of power-law couplings on a chain.
inline constexpr double eta3 = 0.9015426773696957140;

inline constexpr double pi = 3.14159265358979323846;

/// Characteristic length l = (e^2 / (m omega_z^2))^(1/3) in meters.
/// @param charge      ion charge in Coulomb
/// @param mass        ion mass in kg
/// @param omega_z     axial angular frequency in rad/s
inline double length_scale_si(double charge, double mass, double omega_z) {
    constexpr double coulomb_k = 8.9875517873681764e9; // 1/(4 pi eps0), SI
    return std::cbrt(coulomb_k * charge * charge / (mass * omega_z * omega_z));
}

/// Natural energy scale e^2 / l in Joule for the given trap.
inline double energy_scale_si(double charge, double mass, double omega_z) {
    constexpr double coulomb_k = 8.9875517873681764e9;
    const double l = length_scale_si(charge, mass, omega_z);
    return coulomb_k * charge * charge / l;
}

} // namespace ionsim::units
