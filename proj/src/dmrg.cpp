#include "ionsim/dmrg.hpp"

#include "ionsim/units.hpp"

#include "json.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <utility>

namespace ionsim {

namespace {

using EnvBlocks = std::vector<Eigen::MatrixXd>; // one matrix per MPO channel

// Extend a left environment (channels of the bond entering `w`) across one
// site: out[b] = sum over entries (a,b,op) of op(s,s') * m[s]^T in[a] m[s'].
EnvBlocks transfer_left(const MpoSite& w, const SiteTensor& t, const EnvBlocks& in) {
    const Eigen::Index dr = t.right();
    EnvBlocks out(w.cols, Eigen::MatrixXd::Zero(dr, dr));

    // Ket half first, reused across entries sharing a row channel.
    std::vector<std::array<Eigen::MatrixXd, 2>> ket(w.rows);
    std::vector<bool> have(w.rows, false);
    for (const auto& e : w.entries) {
        if (!have[e.row]) {
            ket[e.row][0] = in[e.row] * t.m[0];
            ket[e.row][1] = in[e.row] * t.m[1];
            have[e.row] = true;
        }
        for (int s = 0; s < 2; ++s)
            for (int sp = 0; sp < 2; ++sp)
                if (e.op(s, sp) != 0.0)
                    out[e.col].noalias() +=
                        e.op(s, sp) * (t.m[s].transpose() * ket[e.row][sp]);
    }
    return out;
}

// Mirror image: out[a] = sum over entries (a,b,op) of op(s,s')m[s] in[b] m[s']^T.
EnvBlocks transfer_right(const MpoSite& w, const SiteTensor& t, const EnvBlocks& in) {
    const Eigen::Index dl = t.left();
    EnvBlocks out(w.rows, Eigen::MatrixXd::Zero(dl, dl));

    std::vector<std::array<Eigen::MatrixXd, 2>> ket(w.cols);
    std::vector<bool> have(w.cols, false);
    for (const auto& e : w.entries) {
        if (!have[e.col]) {
            ket[e.col][0] = in[e.col] * t.m[0].transpose();
            ket[e.col][1] = in[e.col] * t.m[1].transpose();
            have[e.col] = true;
        }
        for (int s = 0; s < 2; ++s)
            for (int sp = 0; sp < 2; ++sp)
                if (e.op(s, sp) != 0.0)
                    out[e.row].noalias() += e.op(s, sp) * (t.m[s] * ket[e.col][sp]);
    }
    return out;
}

// Two-site window in matrix form: block (s1, s2) of size dl x dr.
struct Window {
    Eigen::Index dl = 0, dr = 0;
    std::array<Eigen::MatrixXd, 4> b; // index s1 * 2 + s2

    Eigen::MatrixXd& at(int s1, int s2) { return b[2 * s1 + s2]; }
    const Eigen::MatrixXd& at(int s1, int s2) const { return b[2 * s1 + s2]; }

    void from_flat(const Eigen::VectorXd& x) {
        for (int k = 0; k < 4; ++k)
            b[k] = Eigen::Map<const Eigen::MatrixXd>(x.data() + k * dl * dr, dl, dr);
    }
    void to_flat(Eigen::VectorXd& x) const {
        x.resize(4 * dl * dr);
        for (int k = 0; k < 4; ++k)
            Eigen::Map<Eigen::MatrixXd>(x.data() + k * dl * dr, dl, dr) = b[k];
    }
};

// Effective two-site Hamiltonian action: contract the left environment, both
// MPO sites, and the right environment with the window, channel by channel.
class TwoSiteAction {
public:
    TwoSiteAction(const EnvBlocks& left, const MpoSite& w1, const MpoSite& w2,
                  const EnvBlocks& right, Eigen::Index dl, Eigen::Index dr)
        : l_(left), w1_(w1), w2_(w2), r_(right), dl_(dl), dr_(dr) {}

    Eigen::Index dim() const { return 4 * dl_ * dr_; }

    void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
        Window in;
        in.dl = dl_;
        in.dr = dr_;
        in.from_flat(x);

        // Stage 1: left environment times each window block, per row channel.
        std::vector<std::array<Eigen::MatrixXd, 4>> lx(w1_.rows);
        std::vector<bool> have(w1_.rows, false);

        // Stage 2: first MPO site mixes s1' into s1 and maps channel a -> b.
        std::vector<std::array<Eigen::MatrixXd, 4>> mid(
            w1_.cols, {Eigen::MatrixXd::Zero(dl_, dr_), Eigen::MatrixXd::Zero(dl_, dr_),
                       Eigen::MatrixXd::Zero(dl_, dr_), Eigen::MatrixXd::Zero(dl_, dr_)});
        std::vector<bool> midset(w1_.cols, false);
        for (const auto& e : w1_.entries) {
            if (!have[e.row]) {
                for (int k = 0; k < 4; ++k) lx[e.row][k].noalias() = l_[e.row] * in.b[k];
                have[e.row] = true;
            }
            midset[e.col] = true;
            for (int s1 = 0; s1 < 2; ++s1)
                for (int s1p = 0; s1p < 2; ++s1p) {
                    const double c = e.op(s1, s1p);
                    if (c == 0.0) continue;
                    for (int s2 = 0; s2 < 2; ++s2)
                        mid[e.col][2 * s1 + s2] += c * lx[e.row][2 * s1p + s2];
                }
        }

        // Stage 3: second MPO site mixes s2' into s2 and maps b -> c, then the
        // right environment closes the contraction.
        Window out;
        out.dl = dl_;
        out.dr = dr_;
        for (int k = 0; k < 4; ++k) out.b[k] = Eigen::MatrixXd::Zero(dl_, dr_);

        std::vector<std::array<Eigen::MatrixXd, 4>> fin(
            w2_.cols, {Eigen::MatrixXd::Zero(dl_, dr_), Eigen::MatrixXd::Zero(dl_, dr_),
                       Eigen::MatrixXd::Zero(dl_, dr_), Eigen::MatrixXd::Zero(dl_, dr_)});
        std::vector<bool> finset(w2_.cols, false);
        for (const auto& e : w2_.entries) {
            if (!midset[e.row]) continue;
            finset[e.col] = true;
            for (int s2 = 0; s2 < 2; ++s2)
                for (int s2p = 0; s2p < 2; ++s2p) {
                    const double c = e.op(s2, s2p);
                    if (c == 0.0) continue;
                    for (int s1 = 0; s1 < 2; ++s1)
                        fin[e.col][2 * s1 + s2] += c * mid[e.row][2 * s1 + s2p];
                }
        }
        for (int c = 0; c < w2_.cols; ++c) {
            if (!finset[c]) continue;
            for (int k = 0; k < 4; ++k)
                out.b[k].noalias() += fin[c][k] * r_[c].transpose();
        }
        out.to_flat(y);
    }

private:
    const EnvBlocks& l_;
    const MpoSite& w1_;
    const MpoSite& w2_;
    const EnvBlocks& r_;
    Eigen::Index dl_, dr_;
};

struct SplitResult {
    double truncation = 0.0;
    int bond = 1;
};

// SVD-split the window across its central bond, keeping at most `cap`
// singular values and discarding weight below `cutoff`. The kept spectrum is
// renormalized so the state stays unit norm.
SplitResult split_window(const Window& th, int cap, double cutoff, bool to_right,
                         SiteTensor& left, SiteTensor& right) {
    const Eigen::Index dl = th.dl, dr = th.dr;
    Eigen::MatrixXd m(2 * dl, 2 * dr);
    for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2)
            m.block(s1 * dl, s2 * dr, dl, dr) = th.at(s1, s2);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double total = sv.squaredNorm();
    if (!(total > 0.0)) throw std::runtime_error("dmrg: zero window after solve");

    int k = 0;
    while (k < sv.size() && sv(k) * sv(k) > cutoff * total) ++k;
    k = std::max(1, std::min<int>(k, cap));

    Eigen::VectorXd kept = sv.head(k);
    SplitResult res;
    res.truncation = 1.0 - kept.squaredNorm() / total;
    res.bond = k;
    kept /= kept.norm();

    const Eigen::MatrixXd u = svd.matrixU().leftCols(k);
    const Eigen::MatrixXd v = svd.matrixV().leftCols(k);
    for (int s = 0; s < 2; ++s) {
        if (to_right) {
            left.m[s] = u.middleRows(s * dl, dl);
            right.m[s] = kept.asDiagonal() * v.middleRows(s * dr, dr).transpose();
        } else {
            left.m[s] = u.middleRows(s * dl, dl) * kept.asDiagonal();
            right.m[s] = v.middleRows(s * dr, dr).transpose();
        }
    }
    return res;
}

} // namespace

// ===== Expectation values ==================================================

double mpo_expectation(const Mpo& op, const Mps& psi) {
    if (op.sites() != psi.sites())
        throw std::invalid_argument("mpo_expectation: size mismatch");
    EnvBlocks env(1, Eigen::MatrixXd::Ones(1, 1));
    for (int i = 0; i < psi.sites(); ++i)
        env = transfer_left(op.site(i), psi.site(i), env);
    return env[0](0, 0);
}

// ===== Solver ===============================================================

DmrgSolver::DmrgSolver(Mpo hamiltonian, DmrgOptions opts)
    : h_(std::move(hamiltonian)), opts_(opts) {
    if (h_.sites() < 2)
        throw std::invalid_argument("DmrgSolver: need at least two sites");
    if (opts_.max_bond < 1 || opts_.warmup_bond < 1)
        throw std::invalid_argument("DmrgSolver: bond caps must be positive");
    if (opts_.max_sweeps < 1)
        throw std::invalid_argument("DmrgSolver: max_sweeps must be positive");
}

DmrgResult DmrgSolver::solve(Mps psi, int sweeps_done) const {
    const int n = h_.sites();
    if (psi.sites() != n)
        throw std::invalid_argument("DmrgSolver::solve: state size mismatch");

    psi.move_center_to(0);
    psi.normalize();

    // Environment caches. lenv[i] covers sites < i (channels = rows of site
    // i's MPO tensor); renv[i] covers sites > i (channels = its columns).
    std::vector<EnvBlocks> lenv(n), renv(n);
    lenv[0] = EnvBlocks(1, Eigen::MatrixXd::Ones(1, 1));
    renv[n - 1] = EnvBlocks(1, Eigen::MatrixXd::Ones(1, 1));
    for (int i = n - 2; i >= 0; --i)
        renv[i] = transfer_right(h_.site(i + 1), psi.site(i + 1), renv[i + 1]);

    DmrgResult res;
    res.state = std::move(psi);
    Mps& state = res.state;

    std::mt19937_64 rng(opts_.seed + 0x9e3779b97f4a7c15ULL *
                                         static_cast<std::uint64_t>(sweeps_done));
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto optimize_bond = [&](int i, bool to_right, int cap, double noise,
                             SweepRecord& rec) {
        const Eigen::Index dl = state.site(i).left();
        const Eigen::Index dr = state.site(i + 1).right();

        Window th;
        th.dl = dl;
        th.dr = dr;
        for (int s1 = 0; s1 < 2; ++s1)
            for (int s2 = 0; s2 < 2; ++s2)
                th.at(s1, s2).noalias() = state.site(i).m[s1] * state.site(i + 1).m[s2];

        TwoSiteAction heff(lenv[i], h_.site(i), h_.site(i + 1), renv[i + 1], dl, dr);
        Eigen::VectorXd start;
        th.to_flat(start);
        if (!(start.norm() > 0.0)) {
            for (Eigen::Index k = 0; k < start.size(); ++k) start(k) = gauss(rng);
        }

        LanczosResult lr = lanczos_lowest(
            [&heff](const Eigen::VectorXd& x, Eigen::VectorXd& y) { heff(x, y); },
            static_cast<int>(heff.dim()), start, opts_.lanczos);

        Eigen::VectorXd flat = lr.vector;
        if (noise > 0.0) {
            for (Eigen::Index k = 0; k < flat.size(); ++k)
                flat(k) += noise * gauss(rng);
            flat.normalize();
        }
        th.from_flat(flat);

        SplitResult sp = split_window(th, cap, opts_.svd_cutoff, to_right,
                                      state.site(i), state.site(i + 1));
        rec.max_truncation = std::max(rec.max_truncation, sp.truncation);
        rec.max_bond = std::max(rec.max_bond, sp.bond);

        if (to_right) {
            state.set_center(i + 1);
            lenv[i + 1] = transfer_left(h_.site(i), state.site(i), lenv[i]);
        } else {
            state.set_center(i);
            renv[i] = transfer_right(h_.site(i + 1), state.site(i + 1), renv[i + 1]);
        }
    };

    double prev_energy = 0.0;
    bool have_prev = false;
    int settled = 0;

    for (int sweep = sweeps_done; sweep < opts_.max_sweeps; ++sweep) {
        const bool warm = sweep < opts_.warmup_sweeps;
        const int cap = warm ? std::min(opts_.warmup_bond, opts_.max_bond)
                             : opts_.max_bond;
        const double noise = warm ? opts_.warmup_noise : 0.0;

        SweepRecord rec;
        for (int i = 0; i <= n - 2; ++i) optimize_bond(i, true, cap, noise, rec);
        for (int i = n - 2; i >= 0; --i) optimize_bond(i, false, cap, noise, rec);

        rec.energy = mpo_expectation(h_, state);
        res.history.push_back(rec);
        res.sweeps = sweep + 1;
        res.energy = rec.energy;

        if (!opts_.checkpoint_path.empty() &&
            (sweep + 1 - sweeps_done) % std::max(1, opts_.checkpoint_every) == 0)
            save_dmrg_checkpoint(opts_.checkpoint_path, state, sweep + 1, rec.energy);

        if (have_prev && !warm) {
            const double scale = std::max(1.0, std::abs(rec.energy));
            if (std::abs(rec.energy - prev_energy) < opts_.energy_tol * scale)
                ++settled;
            else
                settled = 0;
        }
        prev_energy = rec.energy;
        have_prev = true;

        if (settled >= 2 && sweep + 1 >= opts_.min_sweeps) {
            res.converged = true;
            break;
        }
    }

    // Resuming past the sweep budget still reports the state faithfully.
    if (res.history.empty()) {
        res.energy = mpo_expectation(h_, state);
        res.sweeps = sweeps_done;
    }

    state.move_center_to(0);
    state.normalize();
    return res;
}

// ===== Starting states =====================================================

Mps neel_state(int n) {
    std::vector<Eigen::Vector2d> local(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        local[static_cast<std::size_t>(i)] =
            (i % 2 == 0) ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d(0.0, 1.0);
    return Mps::product_state(local);
}

Mps x_polarized_state(int n) {
    std::vector<Eigen::Vector2d> local(static_cast<std::size_t>(n),
                                       Eigen::Vector2d(1.0, 1.0));
    return Mps::product_state(local);
}

Mps tilted_state(int n, double theta) {
    std::vector<Eigen::Vector2d> local(
        static_cast<std::size_t>(n),
        Eigen::Vector2d(std::cos(theta / 2.0), std::sin(theta / 2.0)));
    return Mps::product_state(local);
}

Mps initial_state_for(const SpinModel& model) {
    const int n = model.size();
    if (model.kind == ModelKind::XYTransverse)
        return tilted_state(n, 0.45 * units::pi);

    // Staggered tilt: overlaps the antiferromagnetic orders and the
    // transverse-polarized phase at once.
    std::vector<Eigen::Vector2d> local(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double s = (i % 2 == 0) ? 1.0 : -1.0;
        local[static_cast<std::size_t>(i)] = Eigen::Vector2d(1.0, 0.45 * s);
    }
    return Mps::product_state(local);
}

// ===== Checkpointing ========================================================

void save_dmrg_checkpoint(const std::string& path, const Mps& state,
                          int sweeps_done, double energy) {
    {
        std::ofstream os(path + ".mps", std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write checkpoint: " + path + ".mps");
        state.save(os);
    }
    nlohmann::json meta = {{"format", "dmrg-checkpoint-1"},
                           {"sweeps_done", sweeps_done},
                           {"energy", energy},
                           {"sites", state.sites()},
                           {"max_bond_dim", state.max_bond_dim()}};
    std::ofstream js(path + ".json", std::ios::trunc);
    if (!js) throw std::runtime_error("cannot write checkpoint: " + path + ".json");
    js << meta.dump(2) << "\n";
}

std::optional<DmrgCheckpoint> load_dmrg_checkpoint(const std::string& path) {
    std::ifstream js(path + ".json");
    std::ifstream ms(path + ".mps", std::ios::binary);
    if (!js || !ms) return std::nullopt;
    try {
        nlohmann::json meta = nlohmann::json::parse(js);
        if (meta.value("format", "") != "dmrg-checkpoint-1") return std::nullopt;
        DmrgCheckpoint cp;
        cp.state = Mps::load(ms);
        cp.sweeps_done = meta.at("sweeps_done").get<int>();
        cp.energy = meta.at("energy").get<double>();
        if (cp.state.sites() != meta.at("sites").get<int>()) return std::nullopt;
        return cp;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace ionsim
