#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ionsim/dense_solver.hpp"
#include "ionsim/free_fermion.hpp"
#include "ionsim/spin_model.hpp"
#include "ionsim/units.hpp"

#include <cmath>

using namespace ionsim;

TEST_CASE("decoupled limits of the Ising chain") {
    // J = 0: independent spins, E = -nB, <sx> = -1.
    auto s0 = solve_tfim_nn(6, 0.0, 0.8);
    CHECK(s0.energy == doctest::Approx(-6 * 0.8).epsilon(1e-12));
    for (int i = 0; i < 6; ++i)
        CHECK(tfim_sigma_x(s0, i) == doctest::Approx(-1.0).epsilon(1e-12));

    // B = 0: n-1 satisfied antiferromagnetic bonds.
    auto s1 = solve_tfim_nn(6, 1.3, 0.0);
    CHECK(s1.energy == doctest::Approx(-5 * 1.3).epsilon(1e-12));
}

TEST_CASE("Ising chain matches dense diagonalization across the phase diagram") {
    const int n = 10;
    for (double b : {0.25, 0.5, 1.0, 1.5, 2.5}) {
        CAPTURE(b);
        auto ff = solve_tfim_nn(n, 1.0, b);
        auto ed = solve_ground_dense(ising_nearest_neighbor(n, 1.0, b));
        CHECK(ff.energy == doctest::Approx(ed.energy).epsilon(1e-12));

        for (int i : {0, 3, n / 2}) {
            CAPTURE(i);
            CHECK(tfim_sigma_x(ff, i) ==
                  doctest::Approx(dense_sigma_x(ed.state, i)).epsilon(1e-8));
        }
        for (int r : {1, 2, 4, 7}) {
            const int i = 1, j = 1 + r;
            CAPTURE(r);
            CHECK(tfim_corr_zz(ff, i, j) ==
                  doctest::Approx(dense_corr_zz(ed.state, i, j)).epsilon(1e-8));
            CHECK(tfim_corr_xx_connected(ff, i, j) ==
                  doctest::Approx(dense_corr_xx(ed.state, i, j) -
                                  dense_sigma_x(ed.state, i) *
                                  dense_sigma_x(ed.state, j)).epsilon(1e-7));
        }
    }
}

TEST_CASE("Ising chain gap closes at the critical point as 1/n") {
    auto crit = solve_tfim_nn(64, 1.0, 1.0);
    CHECK(crit.gap > 0.0);
    CHECK(crit.gap < 0.2);
    auto off = solve_tfim_nn(64, 1.0, 2.0);
    CHECK(off.gap > 1.0); // gapped phase stays open
}

TEST_CASE("XY chain matches dense diagonalization") {
    const int n = 10;
    for (double b : {-0.9, -0.35, 0.55, 1.7}) {
        CAPTURE(b);
        auto ff = solve_xx_nn(n, 1.0, b);
        auto ed = solve_ground_dense(xy_nearest_neighbor(n, 1.0, b));
        CHECK(ff.energy == doctest::Approx(ed.energy).epsilon(1e-12));
        for (int i : {0, 2, 5}) {
            CAPTURE(i);
            CHECK(xx_sigma_z(ff, i) ==
                  doctest::Approx(dense_sigma_z(ed.state, i)).epsilon(1e-8));
        }
        for (int r : {1, 3, 6}) {
            const int i = 1, j = 1 + r;
            CAPTURE(r);
            CHECK(xx_corr_zz_connected(ff, i, j) ==
                  doctest::Approx(dense_corr_zz(ed.state, i, j) -
                                  dense_sigma_z(ed.state, i) *
                                  dense_sigma_z(ed.state, j)).epsilon(1e-8));
            CHECK(xx_corr_xx(ff, i, j) ==
                  doctest::Approx(dense_corr_xx(ed.state, i, j)).epsilon(1e-8));
        }
    }
}

TEST_CASE("XY chain saturates above the band edge") {
    const int n = 12;
    const double bsat = xx_saturation_field(n, 1.0);
    CHECK(bsat == doctest::Approx(2.0 * std::cos(units::pi / 13.0)).epsilon(1e-14));

    auto above = solve_xx_nn(n, 1.0, -(bsat + 1e-6));
    CHECK(above.occupied == 0);
    CHECK(xx_magnetization(above) == doctest::Approx(1.0));
    CHECK(above.energy == doctest::Approx(-(bsat + 1e-6) * n).epsilon(1e-12));

    auto below = solve_xx_nn(n, 1.0, -(bsat - 1e-3));
    CHECK(below.occupied == 1);
    CHECK(xx_magnetization(below) == doctest::Approx(1.0 - 2.0 / n));
}

TEST_CASE("plateau onsets from sector energies match the mode spectrum") {
    const int n = 12;
    // Onset of the k-th magnetization step, measured down from saturation:
    // b_k = [E(k-1) - E(k)] / 2 equals half the k-th lowest mode energy.
    for (int k = 1; k <= 4; ++k) {
        const double onset =
            (xx_sector_energy(n, 1.0, k - 1) - xx_sector_energy(n, 1.0, k)) / 2.0;
        const double mode = 2.0 * std::cos(units::pi * k / (n + 1));
        CHECK(onset == doctest::Approx(mode).epsilon(1e-12));

        // Crossing the onset changes the occupation by exactly one.
        auto lo = solve_xx_nn(n, 1.0, -(onset - 1e-6));
        auto hi = solve_xx_nn(n, 1.0, -(onset + 1e-6));
        CHECK(lo.occupied == k);
        CHECK(hi.occupied == k - 1);
    }
}

TEST_CASE("magnetization steps are monotone in the field") {
    const int n = 10;
    double prev = -1.0;
    for (double b = 0.0; b < 2.2; b += 0.05) {
        const double m = xx_magnetization(solve_xx_nn(n, 1.0, -b));
        CHECK(m >= prev - 1e-12);
        prev = m;
    }
    CHECK(prev == doctest::Approx(1.0));
}
