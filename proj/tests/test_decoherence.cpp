/**
 * @file test_decoherence.cpp
 * @brief Error budgets: evolution accuracy, fidelity terms, observable shifts.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "ionsim/decoherence.hpp"
#include "ionsim/dense_solver.hpp"
#include "ionsim/spin_model.hpp"

using namespace ionsim;
using Cplx = std::complex<double>;

namespace {

NoiseEnvironment standard_env() {
    NoiseEnvironment env;
    env.nbar = 0.5;
    env.eta_x = 0.1;
    env.eta_y = 0.1;
    env.omega_x = 10.0;
    env.omega_y = 11.0;
    return env;
}

/// Dense Hamiltonian matrix, built column by column from the matrix-free action.
Eigen::MatrixXd dense_matrix(const SpinModel& model) {
    const DenseHamiltonian h(model);
    const int dim = h.dim();
    Eigen::MatrixXd m(dim, dim);
    Eigen::VectorXd col(dim);
    for (int s = 0; s < dim; ++s) {
        h.apply(Eigen::VectorXd::Unit(dim, s), col);
        m.col(s) = col;
    }
    return m;
}

/// Spectral-decomposition evolution, the oracle for the integrator.
Eigen::VectorXcd evolve_spectral(const SpinModel& model, const Eigen::VectorXcd& psi0,
                                 double t) {
    const Eigen::MatrixXd h = dense_matrix(model);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    Eigen::VectorXcd coeffs = es.eigenvectors().transpose().cast<Cplx>() * psi0;
    for (Eigen::Index k = 0; k < coeffs.size(); ++k)
        coeffs(k) *= std::exp(Cplx(0.0, -es.eigenvalues()(k) * t));
    return es.eigenvectors().cast<Cplx>() * coeffs;
}

/// Product state in the z basis from one polar angle per site (real spinors).
Eigen::VectorXcd product_state(const std::vector<double>& angles) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
    for (double th : angles) {
        Eigen::Vector2cd spinor(std::cos(0.5 * th), std::sin(0.5 * th));
        Eigen::VectorXcd next(psi.size() * 2);
        // Site index = position in `angles`; its bit toggles in blocks.
        for (Eigen::Index s = 0; s < psi.size(); ++s) {
            next(s) = psi(s) * spinor(0);
            next(s + psi.size()) = psi(s) * spinor(1);
        }
        psi = next;
    }
    return psi;
}

} // namespace

// ===== Real-time evolution =====

TEST_CASE("fixed-step evolution matches the spectral oracle") {
    const auto model = ising_power_law(5, 0.7, 3.0, 1.3);
    Eigen::VectorXcd psi0 = Eigen::VectorXd::LinSpaced(32, -1.0, 2.0).cast<Cplx>();
    psi0.normalize();

    const double t = 3.0;
    const auto rep = evolve_dense(model, psi0, t);
    const auto exact = evolve_spectral(model, psi0, t);
    CHECK((rep.state - exact).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(rep.energy_drift < 1e-10);
    CHECK(rep.norm_drift < 1e-10);
    CHECK(rep.steps > 0);

    const auto xy = xy_power_law(4, 1.0, 3.0, -0.5);
    Eigen::VectorXcd phi0 = Eigen::VectorXd::LinSpaced(16, 0.2, 1.7).cast<Cplx>();
    phi0.normalize();
    const auto repxy = evolve_dense(xy, phi0, 2.0);
    CHECK((repxy.state - evolve_spectral(xy, phi0, 2.0)).cwiseAbs().maxCoeff() < 1e-8);

    const auto id = evolve_dense(model, psi0, 0.0);
    CHECK((id.state - psi0).norm() == 0.0);

    CHECK_THROWS_AS(evolve_dense(model, psi0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(evolve_dense(model, Eigen::VectorXcd::Ones(7), 1.0),
                    std::invalid_argument);
}

// ===== Ising fidelity budget =====

TEST_CASE("fidelity error vanishes without coupling to the walls") {
    const auto model = ising_power_law(6, 1.0, 3.0, 1.0);
    const auto gs = solve_ground_dense(model);

    SUBCASE("eta = 0 gives exactly zero") {
        auto env = standard_env();
        env.eta_x = 0.0;
        const auto budget = ising_fidelity_error(model, gs.state, 5.0, env);
        CHECK(budget.total_full == 0.0);
        CHECK(budget.total_equal_time == 0.0);
    }

    SUBCASE("z product eigenstate at zero field has no fluctuations") {
        const auto frozen = ising_power_law(6, 1.0, 3.0, 0.0);
        const Eigen::VectorXd basis = Eigen::VectorXd::Unit(64, 21);
        const auto budget = ising_fidelity_error(frozen, basis, 5.0, standard_env(), false);
        CHECK(std::abs(budget.total_full) < 1e-12);
        CHECK(std::abs(budget.total_equal_time) < 1e-12);
        CHECK(!budget.suspicious_negative);
    }
}

TEST_CASE("fidelity error scales linearly in the ion number") {
    // Reference configuration: 1/r^3 couplings, B = J0, t = 5/J0, eta^2 = 0.01,
    // nbar = 0.5, ground-state initial condition.
    const auto env = standard_env();
    const double frozen[3] = {2.4776024105e-01, 2.9593739048e-01, 3.8119872302e-01};
    const int sizes[3] = {4, 6, 8};
    double per_site[3];
    for (int c = 0; c < 3; ++c) {
        const auto model = ising_power_law(sizes[c], 1.0, 3.0, 1.0);
        const auto gs = solve_ground_dense(model);
        const auto budget = ising_fidelity_error(model, gs.state, 5.0, env);
        CHECK(budget.total == doctest::Approx(frozen[c]).epsilon(1e-6));
        CHECK(budget.total_full == budget.total); // t J0 = 5: cross terms kept
        CHECK(!budget.two_time_neglected);
        CHECK(!budget.suspicious_negative);
        CHECK(budget.energy_drift < 1e-10);
        // The parity-pure ground state has <sz> = 0, so the equal-time part
        // is exactly 2 n eta^2 (2 nbar + 1).
        CHECK(budget.total_equal_time ==
              doctest::Approx(2.0 * sizes[c] * 0.01 * 2.0).epsilon(1e-9));
        per_site[c] = budget.total / sizes[c];
    }
    const double mean = (per_site[0] + per_site[1] + per_site[2]) / 3.0;
    for (double v : per_site) CHECK(std::abs(v - mean) / mean < 0.2);
}

TEST_CASE("equal-time budget is linear in 2 nbar + 1") {
    const auto model = ising_power_law(6, 1.0, 3.0, 1.0);
    const auto gs = solve_ground_dense(model);
    auto cold = standard_env();
    cold.nbar = 0.0;
    auto warm = standard_env();
    warm.nbar = 1.0;
    const auto b0 = ising_fidelity_error(model, gs.state, 5.0, cold, true);
    const auto b1 = ising_fidelity_error(model, gs.state, 5.0, warm, true);
    CHECK(b1.total_equal_time / b0.total_equal_time == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("two-time neglect flag: default threshold and override") {
    const auto model = ising_power_law(4, 1.0, 3.0, 1.0);
    const auto gs = solve_ground_dense(model);
    const auto env = standard_env();

    const auto kept = ising_fidelity_error(model, gs.state, 5.0, env);
    CHECK(!kept.two_time_neglected);
    CHECK(kept.total == doctest::Approx(kept.total_full).epsilon(1e-15));
    CHECK(kept.total_full ==
          doctest::Approx(kept.total_equal_time - kept.cross).epsilon(1e-12));

    const auto dropped = ising_fidelity_error(model, gs.state, 20.0, env);
    CHECK(dropped.two_time_neglected);
    CHECK(dropped.total == dropped.total_equal_time);

    const auto forced = ising_fidelity_error(model, gs.state, 20.0, env, false);
    CHECK(!forced.two_time_neglected);
    CHECK(forced.total == forced.total_full);
}

TEST_CASE("fidelity budget input validation") {
    const auto env = standard_env();
    const auto xy = xy_power_law(4, 1.0, 3.0, -0.5);
    const Eigen::VectorXd v16 = Eigen::VectorXd::Unit(16, 0);
    CHECK_THROWS_AS(ising_fidelity_error(xy, v16, 1.0, env), std::invalid_argument);

    const auto big = ising_power_law(11, 1.0, 3.0, 1.0);
    CHECK_THROWS_AS(ising_fidelity_error(big, Eigen::VectorXd::Unit(2048, 0), 1.0, env),
                    std::invalid_argument);

    const auto model = ising_power_law(4, 1.0, 3.0, 1.0);
    CHECK_THROWS_AS(ising_fidelity_error(model, v16, -1.0, env), std::invalid_argument);
    CHECK_THROWS_AS(ising_fidelity_error(model, Eigen::VectorXd::Unit(8, 0), 1.0, env),
                    std::invalid_argument);

    auto bad = standard_env();
    bad.nbar = -0.5;
    CHECK_THROWS_AS(ising_fidelity_error(model, v16, 1.0, bad), std::invalid_argument);
}

// ===== Observable measurement error =====

TEST_CASE("observable error: sz is immune, sx follows the closed form") {
    const auto model = ising_power_law(6, 1.0, 3.0, 0.9);
    const auto gs = solve_ground_dense(model);
    const Eigen::VectorXcd psi = gs.state.cast<Cplx>();
    const auto env = standard_env();

    const auto ez = observable_error({{{2, 'z'}}}, psi, env);
    CHECK(std::abs(ez.value) < 1e-14);
    CHECK(ez.active_sites == 0);

    const auto ex = observable_error({{{2, 'x'}}}, psi, env);
    CHECK(ex.active_sites == 1);
    CHECK(ex.expectation == doctest::Approx(dense_sigma_x(gs.state, 2)).epsilon(1e-12));
    const double closed = 2.0 * env.eta_x * env.eta_x * (2.0 * env.nbar + 1.0) *
                          ex.expectation;
    CHECK(ex.value == doctest::Approx(closed).epsilon(1e-12));

    // sy on a real state has zero expectation and zero shift.
    const auto ey = observable_error({{{2, 'y'}}}, psi, env);
    CHECK(std::abs(ey.expectation) < 1e-14);
    CHECK(std::abs(ey.value) < 1e-14);
}

TEST_CASE("observable error: two-site shift is independent of the ion number") {
    const auto env = standard_env();
    const PauliString oxx{{{1, 'x'}, {3, 'x'}}};

    double reference = 0.0;
    for (int n : {6, 8, 10}) {
        std::vector<double> angles(n);
        for (int j = 0; j < n; ++j) angles[j] = 0.1 * j + 0.05;
        angles[1] = 0.7; // shared local environment of the operator
        angles[3] = 0.3;
        const auto err = observable_error(oxx, product_state(angles), env);
        CHECK(err.active_sites == 2);
        if (n == 6) {
            reference = err.value;
            CHECK(std::abs(reference) > 1e-6);
            // Two active sites: shift = 4 eta^2 (2 nbar + 1) <O>.
            CHECK(err.value == doctest::Approx(4.0 * 0.01 * 2.0 * err.expectation)
                                   .epsilon(1e-12));
        } else {
            CHECK(std::abs(err.value - reference) / std::abs(reference) < 1e-10);
        }
    }
}

TEST_CASE("observable error: mixed string and complex states") {
    const auto model = ising_power_law(5, 1.0, 3.0, 1.1);
    const auto gs = solve_ground_dense(model);
    const auto moved = evolve_dense(model, gs.state.cast<Cplx>(), 1.7);
    const auto env = standard_env();

    // Three-factor string: the z factor contributes no active site.
    const auto e3 = observable_error({{{0, 'x'}, {2, 'z'}, {4, 'y'}}}, moved.state, env);
    CHECK(e3.active_sites == 2);
    CHECK(e3.value ==
          doctest::Approx(4.0 * 0.01 * 2.0 * e3.expectation).epsilon(1e-10));
}

TEST_CASE("observable error input validation") {
    const auto env = standard_env();
    const Eigen::VectorXcd psi = product_state({0.3, 0.8, 1.1});
    CHECK_THROWS_AS(
        observable_error({{{0, 'x'}, {1, 'x'}, {2, 'x'}, {0, 'z'}}}, psi, env),
        std::invalid_argument);
    CHECK_THROWS_AS(observable_error({{{0, 'x'}, {0, 'y'}}}, psi, env),
                    std::invalid_argument);
    CHECK_THROWS_AS(observable_error({{{0, 'q'}}}, psi, env), std::invalid_argument);
    CHECK_THROWS_AS(observable_error({{{7, 'x'}}}, psi, env), std::invalid_argument);
    CHECK_THROWS_AS(observable_error({{{0, 'x'}}}, Eigen::VectorXcd::Ones(6), env),
                    std::invalid_argument);
}

// ===== XY interference condition =====

TEST_CASE("xy interference: resonance flag and error scales") {
    const auto ruined = xy_interference_check(10.0, 10.0, 0.1, 0.1);
    CHECK(ruined.resonant);
    CHECK(std::isinf(ruined.error_scale));

    // Detuning of half the frequency: error = (eta^2 w)^2 / (w/2) = 2 eta^4 w,
    // a fraction 2 eta^2 of the coupling scale.
    const auto ok = xy_interference_check(10.0, 5.0, 0.1, 0.1);
    CHECK(!ok.resonant);
    CHECK(ok.detuning == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(ok.error_scale == doctest::Approx(2e-3).epsilon(1e-12));
    CHECK(ok.error_to_coupling == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(ok.ising_virtual_scale == doctest::Approx(1e-6).epsilon(1e-12));

    const auto quiet = xy_interference_check(10.0, 5.0, 0.0, 0.0);
    CHECK(quiet.error_scale == 0.0);
    CHECK(quiet.error_to_coupling == 0.0);
    CHECK(quiet.ising_virtual_scale == 0.0);

    CHECK_THROWS_AS(xy_interference_check(0.0, 5.0, 0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(xy_interference_check(10.0, -5.0, 0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(xy_interference_check(10.0, 5.0, -0.1, 0.1), std::invalid_argument);
}
