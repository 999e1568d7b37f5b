#include "ionsim/powerlaw_fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ionsim {

namespace {

// Rate seeds from the matrix pencil of the sampled sequence: the top right
// singular subspace of the Hankel matrix is shift-invariant for an exact
// sum of exponentials, so the shift operator's eigenvalues estimate lambda.
std::vector<double> pencil_rates(const Eigen::VectorXd& h, int k) {
    const int m = static_cast<int>(h.size());
    const int l = m / 2;
    Eigen::MatrixXd y(m - l, l + 1);
    for (int i = 0; i < m - l; ++i)
        for (int j = 0; j <= l; ++j) y(i, j) = h(i + j);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeThinV);
    const int rank = std::min<int>(k, static_cast<int>(svd.singularValues().size()));
    Eigen::MatrixXd v = svd.matrixV().leftCols(rank);

    Eigen::MatrixXd v1 = v.topRows(l);    // drop last row
    Eigen::MatrixXd v2 = v.bottomRows(l); // drop first row
    // Shift matrix in the signal subspace: pinv(V1) V2.
    Eigen::MatrixXd shift =
        v1.completeOrthogonalDecomposition().pseudoInverse() * v2;

    Eigen::EigenSolver<Eigen::MatrixXd> es(shift);
    std::vector<double> rates;
    for (int i = 0; i < rank; ++i) {
        const std::complex<double> ev = es.eigenvalues()(i);
        if (std::abs(ev.imag()) > 1e-8 * std::max(1.0, std::abs(ev.real())))
            continue;
        const double r = ev.real();
        if (r > 1e-14 && r < 1.0 - 1e-14) rates.push_back(r);
    }
    std::sort(rates.begin(), rates.end(), std::greater<>());
    rates.erase(std::unique(rates.begin(), rates.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                rates.end());
    // Pad with a geometric ladder below the smallest seed if the pencil
    // returned fewer usable rates than requested.
    while (static_cast<int>(rates.size()) < k)
        rates.push_back((rates.empty() ? 0.5 : rates.back()) * 0.35);
    rates.resize(k);
    return rates;
}

// Weighted linear solve for the amplitudes at fixed rates, relative error.
Eigen::VectorXd fit_amplitudes(const Eigen::VectorXd& logrates,
                               const Eigen::VectorXd& f,
                               const Eigen::VectorXd& w, int rmin) {
    const int m = static_cast<int>(f.size());
    const int k = static_cast<int>(logrates.size());
    Eigen::MatrixXd a(m, k);
    Eigen::VectorXd b(m);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < k; ++c)
            a(r, c) = w(r) * std::exp(logrates(c) * (rmin + r)) / f(r);
        b(r) = w(r);
    }
    return a.colPivHouseholderQr().solve(b);
}

} // namespace

ExpFit compress_power_law(double p, int rmin, int rmax, int n_exp) {
    if (rmin < 1 || rmax <= rmin)
        throw std::invalid_argument("compress_power_law: need 1 <= rmin < rmax");
    if (n_exp < 1)
        throw std::invalid_argument("compress_power_law: need at least one term");
    const int m = rmax - rmin + 1;
    if (n_exp > m / 2)
        throw std::invalid_argument("compress_power_law: too many terms for window");

    Eigen::VectorXd f(m);
    for (int r = 0; r < m; ++r) f(r) = std::pow(static_cast<double>(rmin + r), -p);

    // Seed rates and amplitudes.
    auto seeds = pencil_rates(f, n_exp);
    const int k = n_exp;
    Eigen::VectorXd t(k); // log lambda
    for (int i = 0; i < k; ++i) t(i) = std::log(seeds[i]);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd amp = fit_amplitudes(t, f, w, rmin);

    auto residuals = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& lt,
                         Eigen::VectorXd& rho) {
        for (int r = 0; r < m; ++r) {
            double v = 0.0;
            for (int c = 0; c < k; ++c) v += a(c) * std::exp(lt(c) * (rmin + r));
            rho(r) = v / f(r) - 1.0;
        }
    };

    Eigen::VectorXd rho(m), best_a = amp, best_t = t;
    residuals(amp, t, rho);
    double best_err = rho.cwiseAbs().maxCoeff();

    // Lawson outer loop: re-weight by the residual magnitudes so the
    // weighted LM solution walks toward the minimax fit.
    for (int outer = 0; outer < 30; ++outer) {
        // Levenberg-Marquardt on (a, t) with weights w.
        double mu = 1e-3;
        Eigen::VectorXd a = amp, lt = t;
        residuals(a, lt, rho);
        double cost = (w.asDiagonal() * rho).squaredNorm();
        for (int it = 0; it < 60; ++it) {
            Eigen::MatrixXd jac(m, 2 * k);
            for (int r = 0; r < m; ++r)
                for (int c = 0; c < k; ++c) {
                    const double e = std::exp(lt(c) * (rmin + r)) / f(r);
                    jac(r, c) = w(r) * e;
                    jac(r, k + c) = w(r) * a(c) * (rmin + r) * e;
                }
            Eigen::VectorXd wrho = w.asDiagonal() * rho;
            Eigen::MatrixXd jtj = jac.transpose() * jac;
            Eigen::VectorXd jtr = jac.transpose() * wrho;

            bool accepted = false;
            for (int tries = 0; tries < 8; ++tries) {
                Eigen::MatrixXd damped = jtj;
                damped.diagonal() += mu * jtj.diagonal().cwiseMax(1e-12);
                Eigen::VectorXd step = damped.ldlt().solve(jtr);
                Eigen::VectorXd a2 = a - step.head(k);
                Eigen::VectorXd t2 = lt - step.tail(k);
                for (int c = 0; c < k; ++c) t2(c) = std::min(t2(c), -1e-12);
                Eigen::VectorXd rho2(m);
                residuals(a2, t2, rho2);
                const double cost2 = (w.asDiagonal() * rho2).squaredNorm();
                if (cost2 < cost) {
                    a = a2; lt = t2; rho = rho2; cost = cost2;
                    mu = std::max(mu / 3.0, 1e-12);
                    accepted = true;
                    break;
                }
                mu *= 4.0;
            }
            if (!accepted) break;
        }

        amp = a;
        t = lt;
        residuals(amp, t, rho);
        const double err = rho.cwiseAbs().maxCoeff();
        if (err < best_err) {
            best_err = err;
            best_a = amp;
            best_t = t;
        }

        // Lawson update, gently, with a floor to keep weights alive.
        const double floor_val = 1e-4 * err;
        for (int r = 0; r < m; ++r)
            w(r) *= std::sqrt(std::abs(rho(r)) + floor_val);
        w *= m / w.sum();
    }

    ExpFit fit;
    fit.amplitude = best_a;
    fit.rate = best_t.array().exp().matrix();
    fit.max_rel_error = best_err;
    fit.rmin = rmin;
    fit.rmax = rmax;
    fit.exponent = p;
    return fit;
}

} // namespace ionsim
