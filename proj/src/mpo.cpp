#include "ionsim/mpo.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace ionsim {

namespace {

Eigen::Matrix2d pauli_i() { return Eigen::Matrix2d::Identity(); }
Eigen::Matrix2d pauli_z() {
    Eigen::Matrix2d m;
    m << 1, 0, 0, -1;
    return m;
}
Eigen::Matrix2d pauli_x() {
    Eigen::Matrix2d m;
    m << 0, 1, 1, 0;
    return m;
}
// Flip-flop halves: sp = |up><down|, sm = |down><up| in the sz basis
// (up = physical index 0).
Eigen::Matrix2d pauli_plus() {
    Eigen::Matrix2d m;
    m << 0, 1, 0, 0;
    return m;
}
Eigen::Matrix2d pauli_minus() {
    Eigen::Matrix2d m;
    m << 0, 0, 1, 0;
    return m;
}

Eigen::Matrix2d onsite_field_op(ModelKind kind, double field) {
    return field * (kind == ModelKind::IsingTransverse ? pauli_x() : pauli_z());
}

} // namespace

int Mpo::max_bond_dim() const {
    int m = 1;
    for (const auto& s : w_) m = std::max(m, s.cols);
    return m;
}

Eigen::MatrixXd Mpo::to_dense() const {
    const int n = sites();
    if (n > 12) throw std::invalid_argument("Mpo::to_dense: n too large");

    // Accumulate, per auxiliary channel, the operator on the first k sites.
    std::vector<Eigen::MatrixXd> acc(w_[0].cols, Eigen::MatrixXd::Zero(2, 2));
    for (const auto& e : w_[0].entries) acc[e.col] += e.op;

    for (int i = 1; i < n; ++i) {
        const Eigen::Index dim = Eigen::Index{1} << i;
        std::vector<Eigen::MatrixXd> next(w_[i].cols,
                                          Eigen::MatrixXd::Zero(2 * dim, 2 * dim));
        for (const auto& e : w_[i].entries) {
            if (acc[e.row].size() == 0) continue;
            // Bit i is more significant than bits 0..i-1, so the site-i
            // operator indexes the outer blocks.
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    if (e.op(a, b) != 0.0)
                        next[e.col].block(a * dim, b * dim, dim, dim) +=
                            e.op(a, b) * acc[e.row];
        }
        acc = std::move(next);
    }
    return acc[0];
}

// ===== exact_sum ===========================================================

Mpo Mpo::exact_sum(const SpinModel& model, double rel_cutoff) {
    model.validate();
    const int n = model.size();
    const bool ising = model.kind == ModelKind::IsingTransverse;
    // Interaction operator pairs: Ising has one (sz, sz) channel family;
    // XY has (2 sp, sm) and (2 sm, sp).
    const int fam = ising ? 1 : 2;
    const Eigen::Matrix2d left_ops[2] = {ising ? pauli_z() : 2.0 * pauli_plus(),
                                         2.0 * pauli_minus()};
    const Eigen::Matrix2d right_ops[2] = {ising ? pauli_z() : pauli_minus(),
                                          pauli_plus()};

    Mpo h;
    h.w_.resize(n);
    if (n == 1) {
        h.w_[0].rows = h.w_[0].cols = 1;
        h.w_[0].entries.push_back({0, 0, onsite_field_op(model.kind, model.field)});
        return h;
    }

    // Per-bond factorization J[0..l, l+1..n) = P Q^T (P over left sites,
    // Q over right sites), with channels truncated at the relative cutoff.
    // Q matrices are kept to build the pass-through maps.
    std::vector<Eigen::MatrixXd> qs(n - 1); // bond l: rows j = l+1..n-1
    std::vector<Eigen::MatrixXd> ps(n - 1); // bond l: rows i = 0..l
    for (int l = 0; l + 1 < n; ++l) {
        Eigen::MatrixXd block = model.j.block(0, l + 1, l + 1, n - 1 - l);
        Eigen::BDCSVD<Eigen::MatrixXd> svd(block,
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        const double cut = rel_cutoff * (s.size() > 0 ? s(0) : 0.0);
        int rank = 0;
        while (rank < s.size() && s(rank) > cut && s(rank) > 0.0) ++rank;
        Eigen::VectorXd sqrt_s = s.head(rank).cwiseSqrt();
        ps[l] = svd.matrixU().leftCols(rank) * sqrt_s.asDiagonal();
        qs[l] = svd.matrixV().leftCols(rank) * sqrt_s.asDiagonal();
    }

    // Channel layout per bond: 0 = vacuum, 1..r = interaction, r+1 = done.
    auto bond_rank = [&](int l) { return static_cast<int>(ps[l].cols()); };

    for (int i = 0; i < n; ++i) {
        MpoSite& w = h.w_[i];
        const int rl = (i == 0) ? 0 : bond_rank(i - 1) * fam;
        const int rr = (i == n - 1) ? 0 : bond_rank(i) * fam;
        w.rows = (i == 0) ? 1 : rl + 2;
        w.cols = (i == n - 1) ? 1 : rr + 2;

        const int row_vac = 0;
        const int row_done = (i == 0) ? 0 : rl + 1;
        const int col_vac = 0;
        const int col_done = (i == n - 1) ? 0 : rr + 1;

        // Identity rails.
        if (i > 0 && i < n - 1) {
            w.entries.push_back({row_vac, col_vac, pauli_i()});
            w.entries.push_back({row_done, col_done, pauli_i()});
        } else if (i == 0) {
            w.entries.push_back({0, col_vac, pauli_i()});
        } else {
            w.entries.push_back({row_done, 0, pauli_i()});
        }

        // Onsite field.
        const Eigen::Matrix2d fop = onsite_field_op(model.kind, model.field);
        if (model.field != 0.0)
            w.entries.push_back({row_vac, col_done, fop});

        // Enter a channel at this site (needs a bond to the right).
        if (i < n - 1) {
            const int r = bond_rank(i);
            for (int f = 0; f < fam; ++f)
                for (int k = 0; k < r; ++k) {
                    const double c = ps[i](i, k);
                    if (c != 0.0)
                        w.entries.push_back({row_vac, 1 + f * r + k, c * left_ops[f]});
                }
        }

        // Exit a channel at this site (needs a bond to the left).
        if (i > 0) {
            const int r = bond_rank(i - 1);
            for (int f = 0; f < fam; ++f)
                for (int k = 0; k < r; ++k) {
                    // Row index j = i in bond (i-1)'s Q block, whose rows
                    // start at site i.
                    const double c = qs[i - 1](0, k);
                    if (c != 0.0)
                        w.entries.push_back({1 + f * r + k, col_done, c * right_ops[f]});
                }
        }

        // Pass channels through: express bond (i-1) channels in terms of
        // bond (i) channels on the remaining sites j > i.
        if (i > 0 && i < n - 1) {
            const int r_in = bond_rank(i - 1);
            const int r_out = bond_rank(i);
            // Rows of qs[i-1] cover j = i..n-1; drop the first (j = i).
            Eigen::MatrixXd q_prev = qs[i - 1].bottomRows(qs[i - 1].rows() - 1);
            // Solve q_prev = T * qs[i]^T ... i.e. T = q_prev^T's coefficients
            // in the basis qs[i]: T (r_in x r_out) = q_prev^T pinv(qs[i]^T).
            Eigen::MatrixXd t =
                qs[i].completeOrthogonalDecomposition().solve(q_prev).transpose();
            for (int f = 0; f < fam; ++f)
                for (int a = 0; a < r_in; ++a)
                    for (int b = 0; b < r_out; ++b)
                        if (std::abs(t(a, b)) > 1e-300)
                            w.entries.push_back(
                                {1 + f * r_in + a, 1 + f * r_out + b,
                                 t(a, b) * pauli_i()});
        }
    }
    return h;
}

// ===== power_law_compressed ===============================================

Mpo Mpo::power_law_compressed(ModelKind kind, int n, double j0, double p,
                              double field, int n_exp) {
    return power_law_compressed(kind, n, j0,
                                compress_power_law(p, 1, std::max(2, n - 1), n_exp),
                                field);
}

Mpo Mpo::power_law_compressed(ModelKind kind, int n, double j0,
                              const ExpFit& fit, double field) {
    if (n < 2) throw std::invalid_argument("power_law_compressed: need n >= 2");
    const int k = fit.terms();
    const bool ising = kind == ModelKind::IsingTransverse;
    const int fam = ising ? 1 : 2;
    const int d = fam * k + 2; // vacuum + channels + done

    const Eigen::Matrix2d left_ops[2] = {ising ? pauli_z() : 2.0 * pauli_plus(),
                                         2.0 * pauli_minus()};
    const Eigen::Matrix2d right_ops[2] = {ising ? pauli_z() : pauli_minus(),
                                          pauli_plus()};

    Mpo h;
    h.w_.resize(n);
    const int done = d - 1;

    for (int i = 0; i < n; ++i) {
        MpoSite& w = h.w_[i];
        w.rows = (i == 0) ? 1 : d;
        w.cols = (i == n - 1) ? 1 : d;
        const int row_vac = 0;
        const int row_done = (i == 0) ? 0 : done;
        const int col_vac = 0;
        const int col_done = (i == n - 1) ? 0 : done;

        if (i == 0) {
            w.entries.push_back({0, col_vac, pauli_i()});
        } else if (i == n - 1) {
            w.entries.push_back({row_done, 0, pauli_i()});
        } else {
            w.entries.push_back({row_vac, col_vac, pauli_i()});
            w.entries.push_back({row_done, col_done, pauli_i()});
        }

        if (field != 0.0)
            w.entries.push_back({row_vac, col_done, onsite_field_op(kind, field)});

        for (int f = 0; f < fam; ++f)
            for (int c = 0; c < k; ++c) {
                const int ch = 1 + f * k + c;
                const double lam = fit.rate(c);
                if (i < n - 1)
                    w.entries.push_back(
                        {row_vac, ch, (j0 * fit.amplitude(c) * lam) * left_ops[f]});
                if (i > 0 && i < n - 1)
                    w.entries.push_back({ch, ch, lam * pauli_i()});
                if (i > 0)
                    w.entries.push_back({ch, col_done, right_ops[f]});
            }
    }
    return h;
}

// ===== measurement operators ==============================================

namespace {

/// (sum_i o_i)^2 for single-site involutions o (o^2 = 1): the diagonal part
/// contributes n identities and each pair contributes 2 o_i o_j.
std::vector<MpoSite> total_op_squared_sites(
    int n, const char* what, const std::function<Eigen::Matrix2d(int)>& op) {
    if (n < 1) throw std::invalid_argument(std::string(what) + ": n must be >= 1");
    std::vector<MpoSite> sites(n);
    for (int i = 0; i < n; ++i) {
        MpoSite& w = sites[i];
        w.rows = (i == 0) ? 1 : 3;
        w.cols = (i == n - 1) ? 1 : 3;
        const int row_vac = 0, row_done = (i == 0) ? 0 : 2;
        const int col_vac = 0, col_done = (i == n - 1) ? 0 : 2;
        if (i < n - 1) w.entries.push_back({row_vac, col_vac, pauli_i()});
        if (i > 0) w.entries.push_back({row_done, col_done, pauli_i()});
        w.entries.push_back({row_vac, col_done, pauli_i()});
        if (i < n - 1) w.entries.push_back({row_vac, 1, 2.0 * op(i)});
        if (i > 0 && i < n - 1) w.entries.push_back({1, 1, pauli_i()});
        if (i > 0) w.entries.push_back({1, col_done, op(i)});
    }
    return sites;
}

} // namespace

Mpo Mpo::total_sz_squared(int n) {
    Mpo h;
    h.w_ = total_op_squared_sites(n, "total_sz_squared", [](int) { return pauli_z(); });
    return h;
}

Mpo Mpo::total_sx_squared(int n) {
    Mpo h;
    h.w_ = total_op_squared_sites(n, "total_sx_squared", [](int) { return pauli_x(); });
    return h;
}

Mpo Mpo::staggered_sz_squared(int n) {
    Mpo h;
    h.w_ = total_op_squared_sites(n, "staggered_sz_squared", [](int i) {
        return Eigen::Matrix2d((i % 2 == 0) ? pauli_z() : (-pauli_z()).eval());
    });
    return h;
}

} // namespace ionsim
