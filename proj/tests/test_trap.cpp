#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ionsim/trap.hpp"
#include "ionsim/units.hpp"

#include <cmath>
#include <string>

using namespace ionsim;

TEST_CASE("two-ion equilibrium is analytic") {
    // Force balance d/2 = 1/d^2 gives d = 2^(1/3).
    auto chain = IonChain::equilibrium(2);
    const double d = std::cbrt(2.0);
    CHECK(chain.positions()(1) - chain.positions()(0) == doctest::Approx(d).epsilon(1e-12));
    CHECK(chain.positions()(0) == doctest::Approx(-d / 2).epsilon(1e-12));
    CHECK(chain.gradient_norm() < 1e-12);
}

TEST_CASE("three-ion spacing equals (5/4)^(1/3)") {
    auto chain = IonChain::equilibrium(3);
    const double a = std::cbrt(1.25); // 1.077217345015942
    CHECK(chain.positions()(0) == doctest::Approx(-a).epsilon(1e-12));
    CHECK(chain.positions()(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(chain.positions()(2) == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("equilibrium converges to tight gradient tolerance up to n=100") {
    for (int n : {5, 20, 60, 100}) {
        auto chain = IonChain::equilibrium(n);
        CAPTURE(n);
        CHECK(chain.gradient_norm() < 1e-12);
        // Ordered positions, symmetric about the origin.
        auto& z = chain.positions();
        for (int i = 0; i + 1 < n; ++i) CHECK(z(i) < z(i + 1));
        CHECK(std::abs(z.sum()) < 1e-10);
    }
}

TEST_CASE("chain spacings match reference values") {
    // Reference gaps from an independent quasi-Newton minimization.
    auto chain = IonChain::equilibrium(10);
    CHECK(chain.mean_gap() == doctest::Approx(0.637961).epsilon(5e-4));
    CHECK(chain.min_gap() == doctest::Approx(0.564207).epsilon(5e-4));
    // Gaps grow from the center outward.
    auto g = chain.gaps();
    for (int i = 0; i + 1 < g.size() / 2; ++i) CHECK(g(i) > g(i + 1));
}

TEST_CASE("single ion sits at the origin; bad inputs throw") {
    auto chain = IonChain::equilibrium(1);
    CHECK(chain.positions()(0) == 0.0);
    CHECK_THROWS_AS(IonChain::equilibrium(0), std::invalid_argument);
    CHECK_THROWS_AS(IonChain::equilibrium(5, TrapFrequencies{-1.0, 10.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(chain.mean_gap(), std::domain_error);
}

TEST_CASE("center-of-mass mode is exact on every branch") {
    TrapFrequencies w{7.0, 9.0, 1.0};
    auto chain = IonChain::equilibrium(12, w);
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
        auto m = chain.modes(a);
        const double w2 = w.along(a) * w.along(a);
        // Row sums of K are w_a^2 exactly, so the uniform vector must appear
        // as an eigenvector with that eigenvalue.
        int best = -1;
        double dist = 1e300;
        for (int k = 0; k < m.omega2.size(); ++k) {
            const double d = std::abs(m.omega2(k) - w2);
            if (d < dist) { dist = d; best = k; }
        }
        REQUIRE(best >= 0);
        CHECK(m.omega2(best) == doctest::Approx(w2).epsilon(1e-12));
        Eigen::VectorXd com = Eigen::VectorXd::Constant(12, 1.0 / std::sqrt(12.0));
        CHECK(std::abs(std::abs(com.dot(m.vectors.col(best))) - 1.0) < 1e-10);
    }
}

TEST_CASE("mode vectors are orthonormal and deterministically signed") {
    auto chain = IonChain::equilibrium(9, TrapFrequencies{11.0, 11.0, 1.0});
    auto m = chain.modes(Axis::X);
    Eigen::MatrixXd gram = m.vectors.transpose() * m.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-10);
    for (int k = 0; k < 9; ++k) {
        int imax = 0;
        m.vectors.col(k).cwiseAbs().maxCoeff(&imax);
        CHECK(m.vectors(imax, k) > 0.0);
    }
}

TEST_CASE("two-ion transverse branch softens by 2 beta") {
    TrapFrequencies w{6.0, 6.0, 1.0};
    auto chain = IonChain::equilibrium(2, w);
    auto m = chain.modes(Axis::X);
    const double wx2 = 36.0;
    const double beta = chain.beta(Axis::X);
    // Eigenvalues {wx^2 (1 - 2 beta), wx^2}: center-of-mass plus the rocking
    // mode pushed down by the Coulomb curvature.
    CHECK(m.omega2(1) == doctest::Approx(wx2).epsilon(1e-12));
    CHECK(m.omega2(0) == doctest::Approx(wx2 * (1.0 - 2.0 * beta)).epsilon(1e-12));
}

TEST_CASE("axial spectrum of small crystals is known in closed form") {
    // n=2: eigenvalues {1, 3}; n=3: {1, 3, 29/5} in units of wz^2.
    auto c2 = IonChain::equilibrium(2);
    auto m2 = c2.modes(Axis::Z);
    CHECK(m2.omega2(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m2.omega2(1) == doctest::Approx(3.0).epsilon(1e-12));

    auto c3 = IonChain::equilibrium(3);
    auto m3 = c3.modes(Axis::Z);
    CHECK(m3.omega2(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m3.omega2(1) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m3.omega2(2) == doctest::Approx(5.8).epsilon(1e-12));
}

TEST_CASE("zig-zag threshold for 20 ions") {
    // Frozen from an independent root find on the lowest transverse
    // eigenvalue: wx/wz = 8.404645947812 at the crossing.
    const double wc = critical_radial_frequency(20, 1e-10);
    CHECK(wc == doctest::Approx(8.404645947812).epsilon(1e-6));

    // Just above threshold the chain is stable, just below it is not.
    auto stable = IonChain::equilibrium(20, TrapFrequencies{wc * 1.001, wc * 1.001, 1.0});
    auto unstable = IonChain::equilibrium(20, TrapFrequencies{wc * 0.999, wc * 0.999, 1.0});
    CHECK(stable.stability().stable);
    CHECK_FALSE(unstable.stability().stable);

    // At threshold the local (smallest-gap) stiffness parameter sits within
    // 10% of the homogeneous-chain prediction 1/(3.5 zeta3) = 0.23773.
    auto at = IonChain::equilibrium(20, TrapFrequencies{wc, wc, 1.0});
    const double beta_local = at.beta_local(Axis::X);
    CHECK(beta_local == doctest::Approx(0.2495).epsilon(5e-3));
    CHECK(std::abs(beta_local / (1.0 / (3.5 * units::zeta3)) - 1.0) < 0.10);

    // The mean-gap parameter is far below 1 there: the coarse beta >= 1
    // flag is a necessary condition only and must not fire at threshold.
    CHECK(at.beta(Axis::X) == doctest::Approx(0.1497).epsilon(5e-3));
    CHECK_FALSE(at.stability().coarse_unstable);
}

TEST_CASE("stability report fields are consistent") {
    auto chain = IonChain::equilibrium(8, TrapFrequencies{20.0, 25.0, 1.0});
    auto r = chain.stability();
    CHECK(r.stable);
    CHECK(r.min_omega2_x > 0.0);
    CHECK(r.min_omega2_y > 0.0);
    CHECK(r.beta_local_x > r.beta_x);           // min gap is tighter than mean
    CHECK(r.beta_x > r.beta_y);                 // softer trap, larger beta
    CHECK(r.beta_local_threshold == doctest::Approx(1.0 / (3.5 * units::zeta3)));
    CHECK_FALSE(r.coarse_unstable);
}

TEST_CASE("beta estimate: formula values, warnings, order of magnitude") {
    // Axial branch: n^2 / (12 log(6n)).
    CHECK(beta_estimate(Axis::Z, 10) ==
          doctest::Approx(100.0 / (12.0 * std::log(60.0))).epsilon(1e-14));
    CHECK(beta_estimate(Axis::Z, 100) == doctest::Approx(130.2708).epsilon(1e-4));

    // Transverse branch scales down by 2 (wz/wx)^2 relative to axial.
    TrapFrequencies w{10.0, 10.0, 1.0};
    CHECK(beta_estimate(Axis::X, 40, w) ==
          doctest::Approx(beta_estimate(Axis::Z, 40) / 200.0).epsilon(1e-12));

    std::string warning;
    beta_estimate(Axis::Z, 1, {}, &warning);
    CHECK_FALSE(warning.empty());
    beta_estimate(Axis::Z, 3, {}, &warning);
    CHECK_FALSE(warning.empty());
    beta_estimate(Axis::Z, 50, {}, &warning);
    CHECK(warning.empty());

    // Order-of-magnitude contract against the measured chain.
    for (int n : {10, 50}) {
        auto chain = IonChain::equilibrium(n);
        const double ratio = chain.beta(Axis::Z) / beta_estimate(Axis::Z, n);
        CAPTURE(n);
        CHECK(ratio > 1.0 / 5.0);
        CHECK(ratio < 5.0);
    }
}
