#pragma once

/**
 * @file couplings.hpp
 * @brief Effective spin-spin couplings mediated by the phonon branches.
 *
 * A state-dependent force F pushing the ions along axis a displaces the
 * normal modes and leaves an effective Ising coupling between the spins.
 * Adiabatic elimination of the phonons gives, in reduced units,
 *
 *   J_ij = -F^2 (K_a^{-1})_ij = -F^2 sum_n M_in M_jn / w_n^2,
 *
 * with K_a the stiffness matrix of the pushed branch and (w_n^2, M) its
 * eigensystem. The overall sign convention is fixed so that transverse
 * pushing yields J > 0 (antiferromagnetic) and axial pushing J < 0
 * (ferromagnetic); the spin Hamiltonian built from J is
 * H = (1/2) sum_{i != j} J_ij sz_i sz_j + field terms.
 *
 * When the branch is stiff (beta = |c_a|/(w_a^2 d^3) << 1) the inverse
 * stiffness is dominated by its first Coulomb correction and the coupling
 * becomes a bare power law of the ion separation,
 *
 *   J_ij -> c_a F^2 / (w_a^4 |z_i - z_j|^3),
 *
 * accurate to O(beta). The same elimination shifts a transverse field by
 * the mean force energy, B -> B + F^2 / w_a^2.
 */

#include "ionsim/trap.hpp"

#include <Eigen/Dense>

namespace ionsim {

/// Phonon-mediated coupling matrix via the inverse stiffness matrix.
/// Diagonal entries are zeroed (they only shift the energy origin).
/// @throws std::domain_error if the branch is unstable
Eigen::MatrixXd coupling_matrix(const IonChain& chain, Axis a, double force);

/// Same quantity assembled mode by mode, J_ij = -F^2 sum_n M_in M_jn / w_n^2.
/// Numerically independent route used to cross-check coupling_matrix.
Eigen::MatrixXd coupling_matrix_mode_sum(const PhononModes& modes, double force);

/// Stiff-branch power-law approximation J_ij = c_a F^2 / (w_a^4 |z_i-z_j|^3).
Eigen::MatrixXd coupling_matrix_stiff(const IonChain& chain, Axis a, double force);

/// Effective field after eliminating the pushed branch: B + F^2 / w_a^2.
double field_correction(double b, const TrapFrequencies& w, Axis a, double force);

/// Summary of a coupling matrix as seen by the spin models.
struct CouplingProfile {
    double j0_nn_mean = 0.0;   ///< mean |J| over nearest-neighbor bonds
    double j0_center = 0.0;    ///< |J| on the central bond
    double fitted_exponent = 0.0; ///< power-law exponent vs index distance
    bool antiferro = false;    ///< sign of the nearest-neighbor couplings
};

/// Fit the decay of |J| with index distance from the central ion.
/// @throws std::invalid_argument for matrices smaller than 3x3
CouplingProfile coupling_profile(const Eigen::MatrixXd& j);

} // namespace ionsim
