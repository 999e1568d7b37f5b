/**
 * @file decoherence.hpp
 * @brief Residual spin-phonon error budgets for the effective spin models.
 *
 * The canonical transformation that produces the spin couplings leaves a
 * residual entanglement between spins and phonons. To lowest order in the
 * Lamb-Dicke parameter eta, and treating the radial modes as localized
 * phonons, the resulting infidelity of an Ising run decomposes into
 * equal-time and two-time sigma-z fluctuation terms:
 *
 *   E = E[0,0] + E[t,t] - E[0,t] - E[t,0],
 *   E[t1,t2] = eta^2 sum_j (nbar e^{i w (t1-t2)} + (nbar+1) e^{-i w (t1-t2)})
 *              (<sz_j(t1) sz_j(t2)> - <sz_j(t1)><sz_j(t2)>).
 *
 * The spin averages are evaluated by exact real-time evolution, so the
 * budget is exact within the localized-phonon approximation. For a few-site
 * observable O the measured average shifts by the equal-time double
 * commutator budget
 *
 *   E_O = (eta^2/2)(2 nbar + 1) sum_j <[[O, sz_j], sz_j]>,
 *
 * which only the x/y factors of O survive, making E_O independent of the
 * number of ions. The XY model additionally requires distinct radial
 * frequencies; xy_interference_check reports the resonance condition and the
 * associated error scales.
 */
#pragma once

#include <Eigen/Dense>

#include <vector>

#include "ionsim/spin_model.hpp"

namespace ionsim {

// ===== Noise environment =====

/// Thermal phonon background and per-axis drive parameters.
struct NoiseEnvironment {
    double nbar = 0.0;    ///< mean radial phonon number
    double eta_x = 0.0;   ///< Lamb-Dicke parameter, x standing wave
    double eta_y = 0.0;   ///< Lamb-Dicke parameter, y standing wave
    double omega_x = 10.0; ///< radial frequency, x (units of the axial one)
    double omega_y = 11.0; ///< radial frequency, y

    /// @throws std::invalid_argument on negative nbar or eta
    void validate() const;
};

// ===== Real-time evolution =====

/// Result of a fixed-step evolution exp(-i H t) |psi0>.
struct EvolutionReport {
    Eigen::VectorXcd state;
    double energy_drift = 0.0; ///< |<H>(t) - <H>(0)| / max(1, |<H>(0)|)
    double norm_drift = 0.0;   ///< | ||psi(t)|| - ||psi0|| |
    int steps = 0;
    double dt = 0.0;
};

/// Classic fourth-order fixed-step integration of the Schroedinger equation.
/// The step is chosen from the Hamiltonian norm so the energy drift stays
/// below drift_tol, verified a posteriori and refined by halving if needed.
/// @throws std::invalid_argument on dimension mismatch or t < 0
/// @throws std::runtime_error if the drift target cannot be met
EvolutionReport evolve_dense(const SpinModel& model, const Eigen::VectorXcd& initial,
                             double t, double drift_tol = 1e-10);

// ===== Ising fidelity budget =====

/// Decomposed lowest-order infidelity of an Ising simulation run.
struct IsingErrorBudget {
    double total = 0.0;              ///< reported error (honors the neglect flag)
    double equal_time_initial = 0.0; ///< E[0,0]
    double equal_time_final = 0.0;   ///< E[t,t]
    double cross = 0.0;              ///< E[0,t] + E[t,0] (real by conjugation)
    double total_full = 0.0;         ///< all four terms
    double total_equal_time = 0.0;   ///< equal-time terms only
    bool two_time_neglected = false; ///< true when total == total_equal_time
    bool suspicious_negative = false; ///< total_full < -1e-12: formula misused
    double energy_drift = 0.0;       ///< worst drift across all evolutions
};

/// Error budget after evolving `initial` for time t under the Ising model.
/// The two-time terms are dropped from `total` when t exceeds 10 coupling
/// times (both variants are always reported); the second overload forces the
/// choice. Supported up to 10 sites: every two-time correlator needs one
/// extra exact evolution.
/// @throws std::invalid_argument for non-Ising models, n > 10, t < 0, or a
///         dimension mismatch
IsingErrorBudget ising_fidelity_error(const SpinModel& model,
                                      const Eigen::VectorXd& initial, double t,
                                      const NoiseEnvironment& env);
IsingErrorBudget ising_fidelity_error(const SpinModel& model,
                                      const Eigen::VectorXd& initial, double t,
                                      const NoiseEnvironment& env,
                                      bool neglect_two_time);

// ===== Observable measurement error =====

/// One Pauli factor of a few-site observable.
struct PauliTerm {
    int site = 0;
    char axis = 'z'; ///< 'x', 'y', or 'z'
};

/// A product of up to three single-site Pauli operators on distinct sites.
struct PauliString {
    std::vector<PauliTerm> terms;
};

/// Measurement error budget of one observable.
struct ObservableError {
    double value = 0.0;       ///< E_O
    double expectation = 0.0; ///< <O> on the supplied state
    int active_sites = 0;     ///< x/y factors in the string (sz factors drop out)
};

/// Equal-time double-commutator budget, evaluated by applying the operators
/// site by site (the sum runs over every ion, so the N-independence is a
/// measured outcome rather than an assumption).
/// @throws std::invalid_argument for more than three factors, duplicate
///         sites, an unknown axis, or a site outside the state
ObservableError observable_error(const PauliString& o, const Eigen::VectorXcd& state,
                                 const NoiseEnvironment& env);

// ===== XY interference condition =====

/// Outcome of the radial-frequency separation check for the XY model.
struct XyInterferenceReport {
    bool resonant = false;  ///< equal radial frequencies: simulation is ruined
    double detuning = 0.0;  ///< omega_x - omega_y
    double error_scale = 0.0;       ///< max over axes of (eta^2 w)^2 / |detuning|
    double error_to_coupling = 0.0; ///< error_scale / (eta^2 w): smallness ratio
    double ising_virtual_scale = 0.0; ///< J^2 eta^2 / w^2 at the J ~ eta^2 w scale
};

/// Evaluates the interference error scales for two radial standing waves.
/// @throws std::invalid_argument on non-positive frequencies or negative eta
XyInterferenceReport xy_interference_check(double omega_x, double omega_y,
                                           double eta_x, double eta_y,
                                           double rel_tol = 1e-9);

} // namespace ionsim
