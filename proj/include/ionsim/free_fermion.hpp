#pragma once

/**
 * @file free_fermion.hpp
 * @brief Exact solutions of the nearest-neighbor chains via the
 *        Jordan-Wigner mapping. These serve as large-n reference values
 *        for the variational solver.
 *
 * Transverse-field Ising chain, H = J sum sz_i sz_{i+1} + B sum sx_i:
 * rotating the spin frame (sx -> tz, sz -> tx) and mapping to Majorana
 * operators A_i = c^+_i + c_i, B_i = c^+_i - c_i turns H into
 * sum_{ij} B_i T_ij A_j with the n x n matrix T = -B I + J S, S the index
 * upshift. A real SVD T = U diag(s) V^T solves the chain: ground energy
 * -sum_k s_k, elementary excitations 2 s_k, and the ground-state
 * contractions <B_i A_j> = -(U V^T)_ij generate every observable by Wick's
 * theorem. At B = 0 the chain has an exact zero mode and the ground state
 * is degenerate; energies remain valid there but single-state observables
 * are convention-dependent, so keep B != 0 when comparing them.
 *
 * XY nearest-neighbor chain, H = J sum (sx sx + sy sy) + B sum sz:
 * maps to free fermions with dispersion e_k = 4 J cos(pi k/(n+1)) - 2 B;
 * filling the negative modes gives the ground state, and the one-body
 * matrix G_ij = <c^+_i c_j> generates observables.
 */

#include <Eigen/Dense>

namespace ionsim {

// ===== Transverse-field Ising chain =======================================

struct TfimSolution {
    int n = 0;
    double j = 0.0, b = 0.0;
    double energy = 0.0;
    double gap = 0.0;          ///< lowest excitation energy 2 min_k s_k
    Eigen::VectorXd modes;     ///< excitation energies 2 s_k, ascending
    Eigen::MatrixXd contraction; ///< <B_i A_j>
};

TfimSolution solve_tfim_nn(int n, double j, double b);

/// <sx_i> in the ground state.
double tfim_sigma_x(const TfimSolution& s, int i);
/// Full two-point function <sz_i sz_j> (the <sz> background is zero).
double tfim_corr_zz(const TfimSolution& s, int i, int j);
/// Connected <sx_i sx_j> - <sx_i><sx_j>.
double tfim_corr_xx_connected(const TfimSolution& s, int i, int j);

// ===== XY nearest-neighbor chain ==========================================

struct XxSolution {
    int n = 0;
    double j = 0.0, b = 0.0;
    double energy = 0.0;
    int occupied = 0;          ///< number of filled fermion modes
    Eigen::MatrixXd g;         ///< <c^+_i c_j>
};

XxSolution solve_xx_nn(int n, double j, double b);

double xx_sigma_z(const XxSolution& s, int i);
double xx_magnetization(const XxSolution& s); ///< mean sz
double xx_corr_zz_connected(const XxSolution& s, int i, int j);
/// Full two-point function <sx_i sx_j> (equals <sy_i sy_j> by symmetry).
double xx_corr_xx(const XxSolution& s, int i, int j);

/// Field at which the XY chain reaches full polarization, |B| = 2J cos(pi/(n+1)).
double xx_saturation_field(int n, double j);

/// Ground energy of the XY chain at zero field restricted to a fixed
/// number of flipped spins (the fermion number). Differences of these
/// sector energies locate the magnetization plateau onsets.
double xx_sector_energy(int n, double j, int n_flipped);

} // namespace ionsim
