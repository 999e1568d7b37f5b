#pragma once

/**
 * @file mpo.hpp
 * @brief Matrix-product operators for the spin Hamiltonians.
 *
 * Each site carries a sparse list of (row, col, 2x2 operator) entries; the
 * first site is a row vector in the auxiliary space and the last a column
 * vector. Two Hamiltonian constructions are provided:
 *
 *  - exact_sum: works for an arbitrary coupling matrix. The auxiliary space
 *    at bond l consists of a vacuum channel, a done channel, and one
 *    channel per retained singular value of the off-diagonal block
 *    J[0..l, l+1..n). For banded J (nearest-neighbor) this reduces to the
 *    textbook bond dimension automatically; for smooth long-range J the
 *    rank grows only logarithmically. Exact up to the SVD cutoff.
 *
 *  - power_law_compressed: for homogeneous |i-j|^(-p) couplings, routes the
 *    interaction through n_exp geometric channels fitted by
 *    compress_power_law, giving bond dimension n_exp + 2 (Ising) or
 *    2 n_exp + 2 (XY) independent of n.
 *
 * Measurement operators for conserved-quantity diagnostics are provided as
 * small fixed-bond-dimension MPOs.
 */

#include "ionsim/powerlaw_fit.hpp"
#include "ionsim/spin_model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ionsim {

struct MpoEntry {
    int row = 0, col = 0;
    Eigen::Matrix2d op;
};

struct MpoSite {
    int rows = 1, cols = 1;
    std::vector<MpoEntry> entries;
};

class Mpo {
public:
    int sites() const { return static_cast<int>(w_.size()); }
    const MpoSite& site(int i) const { return w_[i]; }
    int max_bond_dim() const;

    /// Dense matrix in the bit basis (site 0 = bit 0); n <= 12 guard.
    Eigen::MatrixXd to_dense() const;

    /// Exact MPO for any SpinModel; relative SVD cutoff controls which
    /// singular channels of the coupling blocks are kept.
    static Mpo exact_sum(const SpinModel& model, double rel_cutoff = 1e-13);

    /// Geometric-channel MPO for homogeneous power-law couplings
    /// J(r) = j0 / r^p. Accuracy is set by the exponential fit.
    static Mpo power_law_compressed(ModelKind kind, int n, double j0, double p,
                                    double field, int n_exp);
    /// Same, but with a caller-supplied fit (reuse across builds).
    static Mpo power_law_compressed(ModelKind kind, int n, double j0,
                                    const ExpFit& fit, double field);

    /// (sum_i sz_i)^2, bond dimension 3.
    static Mpo total_sz_squared(int n);
    /// (sum_i sx_i)^2, bond dimension 3.
    static Mpo total_sx_squared(int n);
    /// (sum_i (-1)^i sz_i)^2, bond dimension 3.
    static Mpo staggered_sz_squared(int n);

private:
    std::vector<MpoSite> w_;
};

} // namespace ionsim
