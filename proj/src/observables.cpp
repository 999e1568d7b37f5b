#include "ionsim/observables.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ionsim {

namespace {

Eigen::Matrix2d op_sz() {
    Eigen::Matrix2d m;
    m << 1, 0, 0, -1;
    return m;
}
Eigen::Matrix2d op_sx() {
    Eigen::Matrix2d m;
    m << 0, 1, 1, 0;
    return m;
}
// sy = i (sm - sp); the real factor below carries all the structure, the
// two factors of i contribute a global -1 to yy correlators.
Eigen::Matrix2d op_sy_real_factor() {
    Eigen::Matrix2d m;
    m << 0, -1, 1, 0;
    return m;
}

// Expectation of a single-site operator on the orthogonality center.
double center_expectation(const Mps& psi, int i, const Eigen::Matrix2d& op) {
    const SiteTensor& t = psi.site(i);
    const double den = t.m[0].squaredNorm() + t.m[1].squaredNorm();
    double num = 0.0;
    for (int s = 0; s < 2; ++s)
        for (int sp = 0; sp < 2; ++sp)
            if (op(s, sp) != 0.0)
                num += op(s, sp) * t.m[s].cwiseProduct(t.m[sp]).sum();
    return num / den;
}

Eigen::VectorXd measure_local(Mps& psi, const Eigen::Matrix2d& op) {
    const int n = psi.sites();
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        psi.move_center_to(i);
        out(i) = center_expectation(psi, i, op);
    }
    return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

} // namespace

// ===== Local expectation values ============================================

Eigen::VectorXd measure_sigma_x(Mps& psi) { return measure_local(psi, op_sx()); }
Eigen::VectorXd measure_sigma_z(Mps& psi) { return measure_local(psi, op_sz()); }

Eigen::VectorXd measure_sigma_y(Mps& psi) {
    // <sy> = i <sm - sp> vanishes identically on real-amplitude states, and
    // every state in this library is real. Measure the real factor anyway so
    // a hypothetical complex extension would fail loudly in tests.
    Eigen::VectorXd anti = measure_local(psi, op_sy_real_factor());
    return 0.0 * anti;
}

// ===== Two-point functions =================================================

Eigen::VectorXd correlation_row(Mps& psi, int j0, const Eigen::Matrix2d& o1,
                                const Eigen::Matrix2d& o2) {
    const int n = psi.sites();
    if (j0 < 0 || j0 >= n)
        throw std::invalid_argument("correlation_row: site out of range");
    psi.move_center_to(j0);

    const SiteTensor& c = psi.site(j0);
    const double den = c.m[0].squaredNorm() + c.m[1].squaredNorm();
    Eigen::VectorXd row(n);
    row(j0) = center_expectation(psi, j0, Eigen::Matrix2d(o1 * o2));

    // Rightward arm: seed with o1 on the center, then advance through the
    // right-orthonormal tensors, closing with o2 at each site.
    {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(c.right(), c.right());
        for (int s = 0; s < 2; ++s)
            for (int sp = 0; sp < 2; ++sp)
                if (o1(s, sp) != 0.0)
                    e.noalias() += o1(s, sp) * (c.m[s].transpose() * c.m[sp]);
        for (int j = j0 + 1; j < n; ++j) {
            const SiteTensor& t = psi.site(j);
            double val = 0.0;
            for (int s = 0; s < 2; ++s)
                for (int sp = 0; sp < 2; ++sp)
                    if (o2(s, sp) != 0.0)
                        val += o2(s, sp) * (t.m[s].transpose() * e * t.m[sp]).trace();
            row(j) = val / den;
            if (j + 1 < n) {
                Eigen::MatrixXd next = Eigen::MatrixXd::Zero(t.right(), t.right());
                for (int s = 0; s < 2; ++s)
                    next.noalias() += t.m[s].transpose() * e * t.m[s];
                e = std::move(next);
            }
        }
    }

    // Leftward arm through the left-orthonormal tensors.
    {
        Eigen::MatrixXd f = Eigen::MatrixXd::Zero(c.left(), c.left());
        for (int s = 0; s < 2; ++s)
            for (int sp = 0; sp < 2; ++sp)
                if (o1(s, sp) != 0.0)
                    f.noalias() += o1(s, sp) * (c.m[s] * c.m[sp].transpose());
        for (int j = j0 - 1; j >= 0; --j) {
            const SiteTensor& t = psi.site(j);
            double val = 0.0;
            for (int s = 0; s < 2; ++s)
                for (int sp = 0; sp < 2; ++sp)
                    if (o2(s, sp) != 0.0)
                        val += o2(s, sp) * (t.m[s] * f * t.m[sp].transpose()).trace();
            row(j) = val / den;
            if (j > 0) {
                Eigen::MatrixXd next = Eigen::MatrixXd::Zero(t.left(), t.left());
                for (int s = 0; s < 2; ++s)
                    next.noalias() += t.m[s] * f * t.m[s].transpose();
                f = std::move(next);
            }
        }
    }
    return row;
}

Eigen::VectorXd correlation_zz_row(Mps& psi, int j0) {
    return correlation_row(psi, j0, op_sz(), op_sz());
}

Eigen::VectorXd correlation_xx_row(Mps& psi, int j0) {
    return correlation_row(psi, j0, op_sx(), op_sx());
}

Eigen::VectorXd correlation_yy_row(Mps& psi, int j0) {
    // sy_i sy_j = -(real factor)_i (real factor)_j.
    return -correlation_row(psi, j0, op_sy_real_factor(), op_sy_real_factor());
}

Eigen::VectorXd connected_zz_row(Mps& psi, int j0) {
    Eigen::VectorXd row = correlation_zz_row(psi, j0);
    Eigen::VectorXd loc = measure_sigma_z(psi);
    for (int j = 0; j < row.size(); ++j) row(j) -= loc(j0) * loc(j);
    return row;
}

Eigen::VectorXd connected_xx_row(Mps& psi, int j0) {
    Eigen::VectorXd row = correlation_xx_row(psi, j0);
    Eigen::VectorXd loc = measure_sigma_x(psi);
    for (int j = 0; j < row.size(); ++j) row(j) -= loc(j0) * loc(j);
    return row;
}

// ===== Entanglement ========================================================

Eigen::VectorXd entanglement_entropies(Mps& psi) {
    const int n = psi.sites();
    if (n < 2) return Eigen::VectorXd::Zero(0);
    Eigen::VectorXd out(n - 1);
    for (int b = 0; b < n - 1; ++b) {
        psi.move_center_to(b);
        const SiteTensor& t = psi.site(b);
        Eigen::MatrixXd stacked(2 * t.left(), t.right());
        stacked.topRows(t.left()) = t.m[0];
        stacked.bottomRows(t.left()) = t.m[1];
        Eigen::VectorXd sv = stacked.bdcSvd().singularValues();
        const double total = sv.squaredNorm();
        double h = 0.0;
        for (Eigen::Index k = 0; k < sv.size(); ++k) {
            const double w = sv(k) * sv(k) / total;
            if (w > 1e-15) h -= w * std::log(w);
        }
        out(b) = h;
    }
    return out;
}

// ===== Fits =================================================================

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("fit_line: size mismatch");
    const int n = static_cast<int>(x.size());
    if (n < 2) throw std::invalid_argument("fit_line: need at least two points");

    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: degenerate abscissa");

    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.points = n;
    if (syy > 0.0) {
        double ssres = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = y[i] - (f.intercept + f.slope * x[i]);
            ssres += r * r;
        }
        f.r2 = 1.0 - ssres / syy;
    } else {
        f.r2 = 1.0;
    }
    return f;
}

namespace {

constexpr double corr_floor = 1e-12;

// Gather (transform(r), log|c[r]|) pairs over the window, skipping entries
// below the floor.
template <class XF>
void gather_log_points(const std::vector<double>& c, int rmin, int rmax,
                       XF&& xof, std::vector<double>& xs,
                       std::vector<double>& ys) {
    xs.clear();
    ys.clear();
    for (int r = rmin; r <= rmax; ++r) {
        const double a = std::abs(c[static_cast<std::size_t>(r)]);
        if (a > corr_floor) {
            xs.push_back(xof(r));
            ys.push_back(std::log(a));
        }
    }
}

void check_window(const std::vector<double>& c, int rmin, int rmax) {
    if (rmin < 1 || rmax <= rmin ||
        rmax >= static_cast<int>(c.size()))
        throw std::invalid_argument("decay fit: bad window");
}

} // namespace

DecayFit fit_power_law_decay(const std::vector<double>& c, int rmin, int rmax) {
    check_window(c, rmin, rmax);
    auto logr = [](int r) { return std::log(static_cast<double>(r)); };

    std::vector<double> xs, ys;
    gather_log_points(c, rmin, rmax, logr, xs, ys);
    if (xs.size() < 3)
        throw std::invalid_argument("fit_power_law_decay: too few usable points");

    LinearFit base = fit_line(xs, ys);
    DecayFit f;
    f.exponent = -base.slope;
    f.amplitude = std::exp(base.intercept);
    f.r2 = base.r2;
    f.rmin = rmin;
    f.rmax = rmax;
    f.points = base.points;

    const int windows[3][2] = {{rmin + 1, rmax}, {rmin, rmax - 1}, {rmin + 1, rmax - 1}};
    for (const auto& w : windows) {
        if (w[1] <= w[0]) continue;
        gather_log_points(c, w[0], w[1], logr, xs, ys);
        if (xs.size() < 3) continue;
        const double e = -fit_line(xs, ys).slope;
        f.window_band = std::max(f.window_band, std::abs(e - f.exponent));
    }
    return f;
}

ExpDecayFit fit_exponential_decay(const std::vector<double>& c, int rmin,
                                  int rmax) {
    check_window(c, rmin, rmax);
    auto ident = [](int r) { return static_cast<double>(r); };

    std::vector<double> xs, ys;
    gather_log_points(c, rmin, rmax, ident, xs, ys);
    if (xs.size() < 3)
        throw std::invalid_argument("fit_exponential_decay: too few usable points");

    LinearFit base = fit_line(xs, ys);
    ExpDecayFit f;
    f.rate = -base.slope;
    f.xi = f.rate > 0.0 ? 1.0 / f.rate : std::numeric_limits<double>::infinity();
    f.amplitude = std::exp(base.intercept);
    f.r2 = base.r2;
    f.rmin = rmin;
    f.rmax = rmax;
    f.points = base.points;

    const int windows[3][2] = {{rmin + 1, rmax}, {rmin, rmax - 1}, {rmin + 1, rmax - 1}};
    for (const auto& w : windows) {
        if (w[1] <= w[0]) continue;
        gather_log_points(c, w[0], w[1], ident, xs, ys);
        if (xs.size() < 3) continue;
        const double rate = -fit_line(xs, ys).slope;
        if (rate > 0.0 && f.rate > 0.0)
            f.window_band = std::max(f.window_band, std::abs(1.0 / rate - f.xi));
    }
    return f;
}

// ===== Transition locators =================================================

CurvaturePeak peak_curvature(const std::vector<double>& x,
                             const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("peak_curvature: size mismatch");
    const int n = static_cast<int>(x.size());
    if (n < 5) throw std::invalid_argument("peak_curvature: need >= 5 points");
    for (int i = 1; i < n; ++i)
        if (!(x[i] > x[i - 1]))
            throw std::invalid_argument("peak_curvature: abscissa must increase");

    // |second derivative| on interior points, nonuniform three-point stencil.
    std::vector<double> curv(static_cast<std::size_t>(n), 0.0);
    for (int i = 1; i + 1 < n; ++i) {
        const double h1 = x[i] - x[i - 1];
        const double h2 = x[i + 1] - x[i];
        curv[static_cast<std::size_t>(i)] =
            std::abs(2.0 * (h2 * y[i - 1] - (h1 + h2) * y[i] + h1 * y[i + 1]) /
                     (h1 * h2 * (h1 + h2)));
    }

    int best = 1;
    for (int i = 2; i + 1 < n; ++i)
        if (curv[static_cast<std::size_t>(i)] > curv[static_cast<std::size_t>(best)])
            best = i;

    CurvaturePeak peak;
    peak.index = best;
    peak.curvature = curv[static_cast<std::size_t>(best)];
    peak.location = x[static_cast<std::size_t>(best)];

    // Parabolic refinement through the three curvature samples at the peak,
    // when the peak is not pinned to the interior boundary.
    if (best >= 2 && best + 2 < n) {
        const double c0 = curv[static_cast<std::size_t>(best - 1)];
        const double c1 = curv[static_cast<std::size_t>(best)];
        const double c2 = curv[static_cast<std::size_t>(best + 1)];
        const double x0 = x[static_cast<std::size_t>(best - 1)];
        const double x1 = x[static_cast<std::size_t>(best)];
        const double x2 = x[static_cast<std::size_t>(best + 1)];
        const double d0 = (c1 - c0) / (x1 - x0);
        const double d1 = (c2 - c1) / (x2 - x1);
        const double dd = (d1 - d0) / (x2 - x0);
        if (dd < 0.0) {
            const double v = 0.5 * (x0 + x1) - d0 / (2.0 * dd);
            if (v >= x0 && v <= x2) peak.location = v;
        }
    }
    return peak;
}

CurvaturePeak locate_critical_field(const std::vector<double>& b,
                                    const std::vector<double>& m) {
    return peak_curvature(b, m);
}

std::vector<double> local_critical_fields(const std::vector<double>& b,
                                          const Eigen::MatrixXd& site_m) {
    if (static_cast<int>(b.size()) != site_m.rows())
        throw std::invalid_argument("local_critical_fields: grid size mismatch");
    std::vector<double> out(static_cast<std::size_t>(site_m.cols()));
    for (Eigen::Index j = 0; j < site_m.cols(); ++j) {
        const Eigen::VectorXd col = site_m.col(j);
        out[static_cast<std::size_t>(j)] = peak_curvature(b, to_std(col)).location;
    }
    return out;
}

LinearFit fit_critical_exponent(const std::vector<double>& b,
                                const std::vector<double>& xi, double bc) {
    if (b.size() != xi.size())
        throw std::invalid_argument("fit_critical_exponent: size mismatch");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double d = std::abs(b[i] - bc);
        if (d > 1e-12 && std::isfinite(xi[i]) && xi[i] > 1e-12) {
            xs.push_back(std::log(d));
            ys.push_back(std::log(xi[i]));
        }
    }
    if (xs.size() < 2)
        throw std::invalid_argument("fit_critical_exponent: too few usable points");
    return fit_line(xs, ys);
}

double saturation_onset(const std::vector<double>& b,
                        const std::vector<double>& m, double tol) {
    if (b.size() != m.size() || b.empty())
        throw std::invalid_argument("saturation_onset: bad input");
    for (std::size_t i = 1; i < b.size(); ++i)
        if (!(b[i] > b[i - 1]))
            throw std::invalid_argument("saturation_onset: grid must ascend");
    for (std::size_t i = 0; i < b.size(); ++i)
        if (m[i] >= 1.0 - tol) return b[i];
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace ionsim
