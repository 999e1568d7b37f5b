/**
 * @file spinwave.cpp
 * @brief Quadratic spin-wave branches of the long-range Ising ring.
 */
#include "ionsim/spinwave.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ionsim/units.hpp"

namespace ionsim {

namespace {

// ===== Shared transforms =====

void check_ring_args(int n, double p) {
    if (n < 2) throw std::invalid_argument("ring_couplings: need at least two sites");
    if (!(p > 0.0)) throw std::invalid_argument("ring_couplings: exponent must be positive");
}

/// Inverse transform back to distances: out(r) = (1/n) sum_k cos(q_k r) f(k).
Eigen::VectorXd distance_transform(const Eigen::VectorXd& f) {
    const int n = static_cast<int>(f.size());
    Eigen::VectorXd out(n);
    for (int r = 0; r < n; ++r) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            acc += std::cos(2.0 * units::pi * k * r / n) * f(k);
        }
        out(r) = acc / n;
    }
    return out;
}

/// Zero-point occupation of one mode with energy omega (relative to the
/// harmonic reference at omega = 1): <a^dag a> = (omega + 1/omega)/4 - 1/2.
double mode_density(double omega) { return 0.25 * (omega + 1.0 / omega) - 0.5; }

/// Fill the parts of a solution that only depend on the dispersion.
void finish_solution(SpinWaveSolution& sw) {
    const int n = sw.n;
    Eigen::VectorXd inv(n);
    Eigen::VectorXd inv3(n);
    double density = 0.0;
    for (int k = 0; k < n; ++k) {
        const double w = sw.omega(k);
        inv(k) = 1.0 / w;
        inv3(k) = inv(k) * inv(k) * inv(k);
        density += mode_density(w);
    }
    sw.corr = distance_transform(inv);
    sw.a_kernel = distance_transform(inv3);
    sw.boson_density = density / n;
}

} // namespace

// ===== Ring couplings =====

Eigen::VectorXd ring_couplings(int n, double j0, double p) {
    check_ring_args(n, p);
    Eigen::VectorXd jr = Eigen::VectorXd::Zero(n);
    for (int r = 1; r < n; ++r) {
        const int d = std::min(r, n - r);
        jr(r) = j0 / std::pow(static_cast<double>(d), p);
    }
    return jr;
}

Eigen::VectorXd coupling_fourier(const Eigen::VectorXd& jr) {
    const int n = static_cast<int>(jr.size());
    if (n < 2) throw std::invalid_argument("coupling_fourier: need at least two sites");
    Eigen::VectorXd jq(n);
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int r = 1; r < n; ++r) {
            acc += jr(r) * std::cos(2.0 * units::pi * k * r / n);
        }
        jq(k) = acc;
    }
    return jq;
}

// ===== Paramagnetic branch =====

SpinWaveSolution paramagnetic_spin_wave(int n, double j0, double p, double field) {
    if (!(field > 0.0))
        throw std::invalid_argument("paramagnetic_spin_wave: field must be positive");
    SpinWaveSolution sw;
    sw.n = n;
    sw.j0 = j0;
    sw.p = p;
    sw.field = field;
    sw.antiferro = false;
    sw.jr = ring_couplings(n, j0, p);
    sw.jq = coupling_fourier(sw.jr);

    sw.instability_field = std::max(0.0, -sw.jq.minCoeff());
    sw.staggered_edge =
        (n % 2 == 0) ? -sw.jq(n / 2) : std::numeric_limits<double>::quiet_NaN();

    sw.omega.resize(n);
    for (int k = 0; k < n; ++k) {
        sw.omega(k) = std::sqrt(1.0 + sw.jq(k) / field);
    }
    finish_solution(sw);
    sw.mean_sigma_x = -1.0 + 2.0 * sw.boson_density;
    sw.valid = sw.omega.allFinite() && sw.boson_density <= spin_wave_density_threshold;
    return sw;
}

// ===== Antiferromagnetic branch =====

SpinWaveSolution antiferro_spin_wave(int n, double j0, double p, double field) {
    if (n % 2 != 0)
        throw std::invalid_argument("antiferro_spin_wave: ring size must be even");
    if (field < 0.0)
        throw std::invalid_argument("antiferro_spin_wave: field must be non-negative");
    SpinWaveSolution sw;
    sw.n = n;
    sw.j0 = j0;
    sw.p = p;
    sw.field = field;
    sw.antiferro = true;
    sw.jr = ring_couplings(n, j0, p);
    sw.jq = coupling_fourier(sw.jr);

    const double jt = -sw.jq(n / 2);
    sw.staggered_edge = jt;
    sw.instability_field = jt;
    if (!(jt > 0.0))
        throw std::invalid_argument("antiferro_spin_wave: couplings are not antiferromagnetic");

    // Tilted staggered frame: with sin(theta) = B/Jt the linear boson terms
    // cancel, each boson costs 2 Jt, and the residual xx coupling
    // (B/Jt)^2 J_ij/2 enters the Bogoliubov dispersion with weight B^2/Jt^3.
    const double chi = field * field / (jt * jt * jt);
    const double sin_theta = field / jt;
    const double cos2_theta = std::max(0.0, 1.0 - sin_theta * sin_theta);
    const double displacement = field / (2.0 * jt);

    sw.omega.resize(n);
    for (int k = 0; k < n; ++k) {
        const int ks = (k + n / 2) % n; // momentum shifted by pi
        sw.omega(k) = std::sqrt(1.0 + chi * sw.jq(ks));
    }
    finish_solution(sw);
    // Rotating back to the lab frame scales the transverse correlator by
    // cos^2(theta); the staggered sign sits in the momentum shift already.
    sw.corr *= cos2_theta;
    // Count the tilt itself as depletion of the field-free staggered state.
    sw.boson_density += displacement * displacement;
    sw.mean_sigma_x = -sin_theta;
    sw.valid = field < jt && sw.omega.allFinite() &&
               sw.boson_density <= spin_wave_density_threshold;
    return sw;
}

// ===== Resummation identity =====

double spin_wave_identity_residual(const SpinWaveSolution& sw) {
    const int n = sw.n;
    if (n < 2 || sw.corr.size() != n || sw.a_kernel.size() != n)
        throw std::invalid_argument("spin_wave_identity_residual: incomplete solution");

    // corr(q) = prefactor * Omega^2(q) / Omega^3(q) expands, back in real
    // space, to corr = prefactor * (A + g * (K conv A)) with the
    // branch-specific kernel below.
    Eigen::VectorXd kernel(n);
    double g = 0.0;
    double prefactor = 1.0;
    if (sw.antiferro) {
        const double jt = sw.staggered_edge;
        g = sw.field * sw.field / (jt * jt * jt);
        prefactor = 1.0 - (sw.field / jt) * (sw.field / jt);
        for (int r = 0; r < n; ++r) kernel(r) = (r % 2 == 0 ? 1.0 : -1.0) * sw.jr(r);
    } else {
        g = 1.0 / sw.field;
        kernel = sw.jr;
    }

    double worst = 0.0;
    for (int r = 0; r < n; ++r) {
        double conv = 0.0;
        for (int l = 0; l < n; ++l) {
            conv += kernel(((r - l) % n + n) % n) * sw.a_kernel(l);
        }
        worst = std::max(worst,
                         std::abs(sw.corr(r) - prefactor * (sw.a_kernel(r) + g * conv)));
    }
    return worst;
}

} // namespace ionsim
