#pragma once

/**
 * @file dense_solver.hpp
 * @brief Exact ground states of small spin systems by matrix-free Lanczos.
 *
 * States live in the computational sz basis: basis index s encodes spin i
 * through bit i, with sz = +1 for a clear bit. All Hamiltonians here are
 * real symmetric, so ground vectors are real.
 *
 * The Ising family is solved in the full 2^n space with the start vector
 * projected onto an eigenspace of the global flip P = prod_i sx_i (both
 * parities are solved and the lower one returned, so quasi-degenerate
 * ordered phases still yield a parity-pure, reproducible state). The XY
 * family conserves total sz; each magnetization sector is solved in its
 * own basis and the global minimum returned, embedded back into the full
 * space.
 */

#include "ionsim/spin_model.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace ionsim {

/// sz value (+1/-1) of site i in basis state s.
inline double bit_spin(std::uint64_t s, int i) {
    return 1.0 - 2.0 * static_cast<double>((s >> i) & 1u);
}

struct LanczosOptions {
    int max_iter = 500;
    double tol = 1e-10;      ///< Ritz residual target, relative to max(1,|E|)
    std::uint64_t seed = 0x5eed1234abcd77ULL;
};

struct LanczosResult {
    double value = 0.0;
    Eigen::VectorXd vector;
    double residual = 0.0;   ///< explicit |A x - value x|_2 of the result
    int iterations = 0;
};

/// Lowest eigenpair of a symmetric operator given only its action.
/// Full reorthogonalization; restarts are unnecessary at these sizes.
LanczosResult lanczos_lowest(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
    int dim, const Eigen::VectorXd& start, const LanczosOptions& opts = {});

/// Matrix-free action of a SpinModel Hamiltonian on full-space vectors.
class DenseHamiltonian {
public:
    explicit DenseHamiltonian(SpinModel model);

    int sites() const { return model_.size(); }
    int dim() const { return 1 << model_.size(); }
    const SpinModel& model() const { return model_; }

    void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;
    void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

private:
    template <class Vec> void apply_impl(const Vec& in, Vec& out) const;

    SpinModel model_;
    Eigen::VectorXd diag_;                    // diagonal part in the bit basis
    std::vector<std::pair<int, int>> pairs_;  // nonzero off-diagonal bonds
    std::vector<double> pair_j_;
};

struct GroundSolution {
    double energy = 0.0;
    Eigen::VectorXd state;   ///< full 2^n basis
    double residual = 0.0;
    int iterations = 0;
    int parity = 0;          ///< Ising: winning sector of prod sx (+1/-1)
    int total_sz = 0;        ///< XY: winning sum of sz over sites
};

/// Exact ground state. Supported up to n = 16 (memory and time bound).
/// @throws std::invalid_argument for n > 16
/// @throws std::runtime_error if Lanczos cannot reach tolerance
GroundSolution solve_ground_dense(const SpinModel& model,
                                  const LanczosOptions& opts = {});

// ----- Observables on full-space vectors ---------------------------------

double dense_sigma_z(const Eigen::VectorXd& psi, int i);
double dense_sigma_x(const Eigen::VectorXd& psi, int i);
/// <sy> vanishes for real vectors; provided for completeness of the triple.
double dense_sigma_y(const Eigen::VectorXd& psi, int i);

double dense_corr_zz(const Eigen::VectorXd& psi, int i, int j); ///< <sz_i sz_j>
double dense_corr_xx(const Eigen::VectorXd& psi, int i, int j); ///< <sx_i sx_j>
double dense_corr_yy(const Eigen::VectorXd& psi, int i, int j); ///< <sy_i sy_j>

/// Complex-state versions used by real-time evolution.
std::complex<double> dense_sigma_z(const Eigen::VectorXcd& psi, int i);
std::complex<double> dense_corr_zz(const Eigen::VectorXcd& psi, int i, int j);

} // namespace ionsim
