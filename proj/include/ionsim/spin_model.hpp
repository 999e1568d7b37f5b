#pragma once

/**
 * @file spin_model.hpp
 * @brief Effective spin Hamiltonians realized by the pushed ion chain.
 *
 * Two families, both on n spins with an arbitrary symmetric coupling
 * matrix J (zero diagonal):
 *
 *   Ising, transverse field:
 *     H = (1/2) sum_{i != j} J_ij sz_i sz_j + B sum_i sx_i
 *
 *   XY, longitudinal field (rotating-frame limit of strong fields):
 *     H = (1/2) sum_{i != j} J_ij (sx_i sx_j + sy_i sy_j) + B sum_i sz_i
 *
 * J > 0 is antiferromagnetic. The XY form conserves the total sz and its
 * flip-flop matrix elements between |...up_i...down_j...> states are
 * 2 J_ij. Only the isotropic XY case is representable here; anisotropic
 * couplings do not arise from the elimination scheme and are rejected at
 * the builder level by construction.
 *
 * The staggered transformation J_ij -> (-1)^(i-j) J_ij is implemented by a
 * sublattice unitary (sz flip on odd sites for the Ising family, sx/sy flip
 * for XY), so it preserves the spectrum for any J. For nearest-neighbor
 * couplings it exchanges the antiferro- and ferromagnetic models; for
 * longer-ranged J the image has alternating bond signs instead.
 */

#include <Eigen/Dense>

namespace ionsim {

enum class ModelKind { IsingTransverse, XYTransverse };

struct SpinModel {
    ModelKind kind = ModelKind::IsingTransverse;
    Eigen::MatrixXd j; ///< symmetric couplings, zero diagonal
    double field = 0.0;

    int size() const { return static_cast<int>(j.rows()); }

    /// @throws std::invalid_argument if J is not symmetric with zero
    /// diagonal, or anything is non-finite
    void validate() const;
};

/// Homogeneous power-law couplings J_ij = j0 / |i-j|^p.
SpinModel ising_power_law(int n, double j0, double p, double field);
SpinModel xy_power_law(int n, double j0, double p, double field);

/// Nearest-neighbor chains.
SpinModel ising_nearest_neighbor(int n, double j0, double field);
SpinModel xy_nearest_neighbor(int n, double j0, double field);

/// Wrap an explicit coupling matrix (e.g. from couplings.hpp).
SpinModel ising_from_couplings(const Eigen::MatrixXd& j, double field);
SpinModel xy_from_couplings(const Eigen::MatrixXd& j, double field);

/// The sublattice-rotated couplings (-1)^(i-j) J_ij.
Eigen::MatrixXd staggered_couplings(const Eigen::MatrixXd& j);

} // namespace ionsim
