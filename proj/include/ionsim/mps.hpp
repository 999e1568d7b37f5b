#pragma once

/**
 * @file mps.hpp
 * @brief Matrix-product states for open spin-1/2 chains.
 *
 * A state is a train of site tensors A[i], each stored as two matrices
 * (one per local sz basis state) of shape (left bond) x (right bond); the
 * first and last bonds have dimension 1. The class tracks an orthogonality
 * center: tensors strictly left of it are left-orthonormal, tensors
 * strictly right of it are right-orthonormal. Center moves use QR/LQ
 * factorizations and are exact; truncation happens only inside the
 * variational solver, which manipulates bonds directly.
 */

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ionsim {

struct SiteTensor {
    std::array<Eigen::MatrixXd, 2> m; ///< physical index selects the matrix

    Eigen::Index left() const { return m[0].rows(); }
    Eigen::Index right() const { return m[0].cols(); }
};

class Mps {
public:
    Mps() = default;

    /// Product state from per-site spinors (normalized internally).
    /// Spinor component 0 multiplies |sz=+1>, component 1 |sz=-1>.
    static Mps product_state(const std::vector<Eigen::Vector2d>& local);

    /// Random state with the given internal bond dimension, normalized and
    /// canonicalized with the center at site 0.
    static Mps random_state(int n, int bond, std::uint64_t seed);

    int sites() const { return static_cast<int>(a_.size()); }
    const SiteTensor& site(int i) const { return a_[i]; }
    SiteTensor& site(int i) { return a_[i]; }

    int center() const { return center_; }
    /// Declare the center after external surgery on the tensors (the
    /// variational sweep does this); no factorization is performed.
    void set_center(int c) { center_ = c; }

    /// Bond dimension between sites b and b+1 (b in [0, n-2]).
    int bond_dim(int b) const { return static_cast<int>(a_[b].right()); }
    int max_bond_dim() const;

    /// Move the orthogonality center (exact, QR-based).
    void move_center_to(int target);

    /// Norm of the state; with a valid center this is the center tensor's
    /// Frobenius norm.
    double norm() const;
    void normalize();

    /// Full state vector in the dense bit basis (site 0 = bit 0). Guarded
    /// to n <= 16; intended for tests.
    Eigen::VectorXd to_dense() const;

    /// Binary serialization (portable within one architecture).
    void save(std::ostream& os) const;
    static Mps load(std::istream& is);

private:
    std::vector<SiteTensor> a_;
    int center_ = 0;

    void orthonormalize_step_right(int i); ///< QR at i, absorb R into i+1
    void orthonormalize_step_left(int i);  ///< LQ at i, absorb L into i-1
};

} // namespace ionsim
