#include "ionsim/mps.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace ionsim {

namespace {

// Stack the two physical blocks vertically: (2 Dl) x Dr.
Eigen::MatrixXd stack_rows(const SiteTensor& t) {
    Eigen::MatrixXd s(2 * t.left(), t.right());
    s.topRows(t.left()) = t.m[0];
    s.bottomRows(t.left()) = t.m[1];
    return s;
}

// Concatenate the two physical blocks horizontally: Dl x (2 Dr).
Eigen::MatrixXd stack_cols(const SiteTensor& t) {
    Eigen::MatrixXd s(t.left(), 2 * t.right());
    s.leftCols(t.right()) = t.m[0];
    s.rightCols(t.right()) = t.m[1];
    return s;
}

} // namespace

Mps Mps::product_state(const std::vector<Eigen::Vector2d>& local) {
    if (local.empty()) throw std::invalid_argument("Mps: empty chain");
    Mps psi;
    psi.a_.resize(local.size());
    for (std::size_t i = 0; i < local.size(); ++i) {
        Eigen::Vector2d v = local[i];
        const double n = v.norm();
        if (!(n > 0.0)) throw std::invalid_argument("Mps: zero local spinor");
        v /= n;
        psi.a_[i].m[0] = Eigen::MatrixXd::Constant(1, 1, v(0));
        psi.a_[i].m[1] = Eigen::MatrixXd::Constant(1, 1, v(1));
    }
    psi.center_ = 0;
    return psi;
}

Mps Mps::random_state(int n, int bond, std::uint64_t seed) {
    if (n < 1 || bond < 1) throw std::invalid_argument("Mps: bad dimensions");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);

    Mps psi;
    psi.a_.resize(n);
    int dl = 1;
    for (int i = 0; i < n; ++i) {
        // Keep bond profile consistent with open boundaries.
        int dr = std::min({bond, dl * 2, 1 << std::min(30, n - 1 - i)});
        if (i == n - 1) dr = 1;
        for (int s = 0; s < 2; ++s) {
            psi.a_[i].m[s].resize(dl, dr);
            for (Eigen::Index r = 0; r < dl; ++r)
                for (Eigen::Index c = 0; c < dr; ++c) psi.a_[i].m[s](r, c) = g(rng);
        }
        dl = dr;
    }
    psi.center_ = n - 1;
    psi.move_center_to(0);
    psi.normalize();
    return psi;
}

int Mps::max_bond_dim() const {
    int m = 1;
    for (const auto& t : a_) m = std::max(m, static_cast<int>(t.right()));
    return m;
}

void Mps::orthonormalize_step_right(int i) {
    Eigen::MatrixXd s = stack_rows(a_[i]);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(s);
    const Eigen::Index keep = std::min(s.rows(), s.cols());
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(s.rows(), keep);
    Eigen::MatrixXd r =
        qr.matrixQR().topLeftCorner(keep, s.cols()).triangularView<Eigen::Upper>();

    const Eigen::Index dl = a_[i].left();
    a_[i].m[0] = q.topRows(dl);
    a_[i].m[1] = q.bottomRows(dl);
    a_[i + 1].m[0] = r * a_[i + 1].m[0];
    a_[i + 1].m[1] = r * a_[i + 1].m[1];
}

void Mps::orthonormalize_step_left(int i) {
    Eigen::MatrixXd s = stack_cols(a_[i]);
    // LQ via QR of the transpose: s = L Q with Q having orthonormal rows.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(s.transpose());
    const Eigen::Index keep = std::min(s.rows(), s.cols());
    Eigen::MatrixXd q =
        (qr.householderQ() * Eigen::MatrixXd::Identity(s.cols(), keep)).transpose();
    Eigen::MatrixXd l = qr.matrixQR()
                            .topLeftCorner(keep, s.rows())
                            .triangularView<Eigen::Upper>()
                            .transpose();

    const Eigen::Index dr = a_[i].right();
    a_[i].m[0] = q.leftCols(dr);
    a_[i].m[1] = q.rightCols(dr);
    a_[i - 1].m[0] = a_[i - 1].m[0] * l;
    a_[i - 1].m[1] = a_[i - 1].m[1] * l;
}

void Mps::move_center_to(int target) {
    if (target < 0 || target >= sites())
        throw std::invalid_argument("Mps: center out of range");
    while (center_ < target) {
        orthonormalize_step_right(center_);
        ++center_;
    }
    while (center_ > target) {
        orthonormalize_step_left(center_);
        --center_;
    }
}

double Mps::norm() const {
    const auto& c = a_[center_];
    return std::sqrt(c.m[0].squaredNorm() + c.m[1].squaredNorm());
}

void Mps::normalize() {
    const double n = norm();
    if (!(n > 0.0)) throw std::runtime_error("Mps: cannot normalize zero state");
    a_[center_].m[0] /= n;
    a_[center_].m[1] /= n;
}

Eigen::VectorXd Mps::to_dense() const {
    const int n = sites();
    if (n > 16) throw std::invalid_argument("Mps::to_dense: n too large");
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::VectorXd out(dim);
    for (Eigen::Index s = 0; s < dim; ++s) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(1, 1);
        for (int i = 0; i < n; ++i) acc = acc * a_[i].m[(s >> i) & 1];
        out(s) = acc(0, 0);
    }
    return out;
}

void Mps::save(std::ostream& os) const {
    const char magic[8] = {'M', 'P', 'S', 'B', 'I', 'N', '0', '1'};
    os.write(magic, 8);
    const std::int64_t n = sites(), c = center_;
    os.write(reinterpret_cast<const char*>(&n), 8);
    os.write(reinterpret_cast<const char*>(&c), 8);
    for (const auto& t : a_) {
        const std::int64_t dl = t.left(), dr = t.right();
        os.write(reinterpret_cast<const char*>(&dl), 8);
        os.write(reinterpret_cast<const char*>(&dr), 8);
        for (const auto& m : t.m)
            os.write(reinterpret_cast<const char*>(m.data()),
                     static_cast<std::streamsize>(sizeof(double) * m.size()));
    }
}

Mps Mps::load(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != "MPSBIN01")
        throw std::runtime_error("Mps::load: bad header");
    std::int64_t n = 0, c = 0;
    is.read(reinterpret_cast<char*>(&n), 8);
    is.read(reinterpret_cast<char*>(&c), 8);
    if (!is || n < 1 || c < 0 || c >= n)
        throw std::runtime_error("Mps::load: corrupt metadata");

    Mps psi;
    psi.a_.resize(static_cast<std::size_t>(n));
    for (auto& t : psi.a_) {
        std::int64_t dl = 0, dr = 0;
        is.read(reinterpret_cast<char*>(&dl), 8);
        is.read(reinterpret_cast<char*>(&dr), 8);
        if (!is || dl < 1 || dr < 1 || dl > (1 << 20) || dr > (1 << 20))
            throw std::runtime_error("Mps::load: corrupt dimensions");
        for (auto& m : t.m) {
            m.resize(dl, dr);
            is.read(reinterpret_cast<char*>(m.data()),
                    static_cast<std::streamsize>(sizeof(double) * m.size()));
        }
    }
    if (!is) throw std::runtime_error("Mps::load: truncated data");
    psi.center_ = static_cast<int>(c);
    return psi;
}

} // namespace ionsim
