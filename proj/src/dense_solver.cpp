#include "ionsim/dense_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ionsim {

// ===== Lanczos =============================================================

LanczosResult lanczos_lowest(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
    int dim, const Eigen::VectorXd& start, const LanczosOptions& opts) {
    if (dim < 1) throw std::invalid_argument("lanczos_lowest: empty space");

    LanczosResult res;
    if (dim == 1) {
        Eigen::VectorXd e = Eigen::VectorXd::Ones(1), out(1);
        apply(e, out);
        res.value = out(0);
        res.vector = e;
        res.residual = 0.0;
        return res;
    }

    double snorm = start.norm();
    if (!(snorm > 0.0))
        throw std::invalid_argument("lanczos_lowest: zero start vector");

    std::vector<Eigen::VectorXd> basis;
    basis.reserve(64);
    basis.push_back(start / snorm);

    std::vector<double> alpha, beta;
    Eigen::VectorXd w(dim);
    Eigen::VectorXd ritz; // eigenvector of the tridiagonal problem

    const int kmax = std::min(opts.max_iter, dim);
    for (int k = 0; k < kmax; ++k) {
        apply(basis[k], w);
        if (k > 0) w -= beta[k - 1] * basis[k - 1];
        const double a = basis[k].dot(w);
        alpha.push_back(a);
        w -= a * basis[k];

        // Full reorthogonalization, two passes.
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& v : basis) w -= v.dot(w) * v;

        // Lowest Ritz pair of the current tridiagonal matrix.
        const int m = static_cast<int>(alpha.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        res.value = es.eigenvalues()(0);
        ritz = es.eigenvectors().col(0);
        res.iterations = m;

        const double b = w.norm();
        const double scale = std::max(1.0, std::abs(res.value));
        if (b * std::abs(ritz(m - 1)) < opts.tol * scale || b < 1e-14 ||
            m == dim || k == kmax - 1)
            break;

        beta.push_back(b);
        basis.push_back(w / b);
    }

    res.vector = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < static_cast<int>(basis.size()) &&
                    i < static_cast<int>(ritz.size()); ++i)
        res.vector += ritz(i) * basis[i];
    res.vector.normalize();

    apply(res.vector, w);
    res.residual = (w - res.value * res.vector).norm();
    return res;
}

// ===== Full-space Hamiltonian action ======================================

DenseHamiltonian::DenseHamiltonian(SpinModel model) : model_(std::move(model)) {
    model_.validate();
    const int n = model_.size();
    if (n > 24)
        throw std::invalid_argument("DenseHamiltonian: n too large for dense storage");
    const std::size_t d = std::size_t{1} << n;

    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (model_.j(i, j) != 0.0) {
                pairs_.emplace_back(i, j);
                pair_j_.push_back(model_.j(i, j));
            }

    diag_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    if (model_.kind == ModelKind::IsingTransverse) {
        // (1/2) sum_{i!=j} J sz sz = sum_{i<j} J sz sz on the diagonal.
        for (std::size_t s = 0; s < d; ++s) {
            double e = 0.0;
            for (std::size_t p = 0; p < pairs_.size(); ++p)
                e += pair_j_[p] * bit_spin(s, pairs_[p].first) *
                     bit_spin(s, pairs_[p].second);
            diag_(static_cast<Eigen::Index>(s)) = e;
        }
    } else {
        // Longitudinal field B sum sz is diagonal; sz sums to n - 2 popcount.
        for (std::size_t s = 0; s < d; ++s)
            diag_(static_cast<Eigen::Index>(s)) =
                model_.field * (n - 2.0 * static_cast<double>(__builtin_popcountll(s)));
    }
}

template <class Vec>
void DenseHamiltonian::apply_impl(const Vec& in, Vec& out) const {
    const int n = model_.size();
    const std::size_t d = std::size_t{1} << n;
    out = diag_.cast<typename Vec::Scalar>().cwiseProduct(in);

    if (model_.kind == ModelKind::IsingTransverse) {
        const double b = model_.field;
        if (b != 0.0) {
            for (int i = 0; i < n; ++i) {
                const std::size_t bit = std::size_t{1} << i;
                for (std::size_t s = 0; s < d; ++s)
                    if (!(s & bit)) {
                        out(static_cast<Eigen::Index>(s)) +=
                            b * in(static_cast<Eigen::Index>(s | bit));
                        out(static_cast<Eigen::Index>(s | bit)) +=
                            b * in(static_cast<Eigen::Index>(s));
                    }
            }
        }
    } else {
        // Flip-flop: 2 J_ij between states differing by one up-down swap.
        for (std::size_t p = 0; p < pairs_.size(); ++p) {
            const std::size_t bi = std::size_t{1} << pairs_[p].first;
            const std::size_t bj = std::size_t{1} << pairs_[p].second;
            const double amp = 2.0 * pair_j_[p];
            for (std::size_t s = 0; s < d; ++s)
                if ((s & bi) && !(s & bj)) {
                    const std::size_t t = (s ^ bi) | bj;
                    out(static_cast<Eigen::Index>(t)) +=
                        amp * in(static_cast<Eigen::Index>(s));
                    out(static_cast<Eigen::Index>(s)) +=
                        amp * in(static_cast<Eigen::Index>(t));
                }
        }
    }
}

void DenseHamiltonian::apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
    apply_impl(in, out);
}
void DenseHamiltonian::apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    apply_impl(in, out);
}

// ===== Ground-state driver =================================================

namespace {

// XY sector apply in a fixed-popcount basis.
struct SectorProblem {
    std::vector<std::uint64_t> states; // ascending
    const SpinModel* model = nullptr;
    double diag_field = 0.0;

    int index_of(std::uint64_t s) const {
        return static_cast<int>(std::lower_bound(states.begin(), states.end(), s) -
                                states.begin());
    }

    void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
        const int n = model->size();
        out = diag_field * in;
        const auto& j = model->j;
        for (std::size_t k = 0; k < states.size(); ++k) {
            const std::uint64_t s = states[k];
            for (int a = 0; a < n; ++a) {
                if (!((s >> a) & 1u)) continue;
                for (int b = 0; b < n; ++b) {
                    if (b == a || ((s >> b) & 1u)) continue;
                    const double amp = 2.0 * j(a, b);
                    if (amp == 0.0) continue;
                    const std::uint64_t t =
                        (s ^ (std::uint64_t{1} << a)) | (std::uint64_t{1} << b);
                    // visit each directed hop once: accumulate into out[t]
                    out(index_of(t)) += amp * in(static_cast<Eigen::Index>(k));
                }
            }
        }
    }
};

Eigen::VectorXd random_vector(int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = g(rng);
    return v;
}

GroundSolution solve_ising(const SpinModel& model, const LanczosOptions& opts) {
    DenseHamiltonian h(model);
    const int dim = h.dim();
    const std::uint64_t flip_mask = static_cast<std::uint64_t>(dim - 1);

    auto apply = [&h](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        h.apply(in, out);
    };

    GroundSolution best;
    best.energy = std::numeric_limits<double>::infinity();
    for (int parity : {+1, -1}) {
        // Project the random start onto the parity sector of prod sx, whose
        // action in the sz basis is a global bit flip.
        Eigen::VectorXd v = random_vector(dim, opts.seed + (parity > 0 ? 0 : 1));
        Eigen::VectorXd pv(dim);
        for (int s = 0; s < dim; ++s)
            pv(s) = v(static_cast<Eigen::Index>(flip_mask ^ static_cast<std::uint64_t>(s)));
        v = 0.5 * (v + parity * pv);
        if (v.norm() < 1e-8) continue; // can only happen for n = 0

        auto r = lanczos_lowest(apply, dim, v, opts);
        if (r.value < best.energy) {
            best.energy = r.value;
            best.state = r.vector;
            best.residual = r.residual;
            best.iterations = r.iterations;
            best.parity = parity;
            best.total_sz = 0;
        }
    }
    return best;
}

GroundSolution solve_xy(const SpinModel& model, const LanczosOptions& opts) {
    const int n = model.size();

    GroundSolution best;
    best.energy = std::numeric_limits<double>::infinity();

    for (int nup = 0; nup <= n; ++nup) {
        SectorProblem sp;
        sp.model = &model;
        sp.diag_field = model.field * (n - 2.0 * nup);
        for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s)
            if (__builtin_popcountll(s) == nup) sp.states.push_back(s);

        const int dim = static_cast<int>(sp.states.size());
        auto apply = [&sp](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
            sp.apply(in, out);
        };
        auto r = lanczos_lowest(apply, dim, random_vector(dim, opts.seed + nup), opts);
        if (r.value < best.energy) {
            best.energy = r.value;
            best.residual = r.residual;
            best.iterations = r.iterations;
            best.parity = 0;
            best.total_sz = n - 2 * nup;
            best.state = Eigen::VectorXd::Zero(Eigen::Index{1} << n);
            for (int k = 0; k < dim; ++k)
                best.state(static_cast<Eigen::Index>(sp.states[k])) = r.vector(k);
        }
    }
    return best;
}

} // namespace

GroundSolution solve_ground_dense(const SpinModel& model, const LanczosOptions& opts) {
    model.validate();
    if (model.size() > 16)
        throw std::invalid_argument("solve_ground_dense: supported up to 16 spins");

    GroundSolution sol = model.kind == ModelKind::IsingTransverse
                             ? solve_ising(model, opts)
                             : solve_xy(model, opts);

    const double scale = std::max(1.0, std::abs(sol.energy));
    if (sol.residual > 1e3 * opts.tol * scale)
        throw std::runtime_error("solve_ground_dense: Lanczos did not converge");
    return sol;
}

// ===== Observables =========================================================

double dense_sigma_z(const Eigen::VectorXd& psi, int i) {
    double r = 0.0;
    for (Eigen::Index s = 0; s < psi.size(); ++s)
        r += psi(s) * psi(s) * bit_spin(static_cast<std::uint64_t>(s), i);
    return r;
}

double dense_sigma_x(const Eigen::VectorXd& psi, int i) {
    const Eigen::Index bit = Eigen::Index{1} << i;
    double r = 0.0;
    for (Eigen::Index s = 0; s < psi.size(); ++s)
        r += psi(s) * psi(s ^ bit);
    return r;
}

double dense_sigma_y(const Eigen::VectorXd&, int) {
    return 0.0; // purely imaginary matrix element against a real vector
}

double dense_corr_zz(const Eigen::VectorXd& psi, int i, int j) {
    double r = 0.0;
    for (Eigen::Index s = 0; s < psi.size(); ++s)
        r += psi(s) * psi(s) * bit_spin(static_cast<std::uint64_t>(s), i) *
             bit_spin(static_cast<std::uint64_t>(s), j);
    return r;
}

double dense_corr_xx(const Eigen::VectorXd& psi, int i, int j) {
    const Eigen::Index flip = (Eigen::Index{1} << i) | (Eigen::Index{1} << j);
    double r = 0.0;
    for (Eigen::Index s = 0; s < psi.size(); ++s)
        r += psi(s) * psi(s ^ flip);
    return r;
}

double dense_corr_yy(const Eigen::VectorXd& psi, int i, int j) {
    const Eigen::Index flip = (Eigen::Index{1} << i) | (Eigen::Index{1} << j);
    double r = 0.0;
    for (Eigen::Index s = 0; s < psi.size(); ++s) {
        const double sign = bit_spin(static_cast<std::uint64_t>(s), i) *
                            bit_spin(static_cast<std::uint64_t>(s), j);
        r -= sign * psi(s) * psi(s ^ flip);
    }
    return r;
}

std::complex<double> dense_sigma_z(const Eigen::VectorXcd& psi, int i) {
    std::complex<double> r = 0.0;
    for (Eigen::Index s = 0; s < psi.size(); ++s)
        r += std::conj(psi(s)) * psi(s) * bit_spin(static_cast<std::uint64_t>(s), i);
    return r;
}

std::complex<double> dense_corr_zz(const Eigen::VectorXcd& psi, int i, int j) {
    std::complex<double> r = 0.0;
    for (Eigen::Index s = 0; s < psi.size(); ++s)
        r += std::conj(psi(s)) * psi(s) * bit_spin(static_cast<std::uint64_t>(s), i) *
             bit_spin(static_cast<std::uint64_t>(s), j);
    return r;
}

} // namespace ionsim
