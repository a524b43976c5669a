#include <doctest.h>

#include <random>

#include "threshold/critical_channel.hpp"

using namespace thr;

TEST_CASE("nu from mu and harmonic dimensions") {
    CHECK(std::abs(nu_of(0.0, 3) - 0.5) < 1e-15);
    CHECK(std::abs(nu_of(-0.25, 3)) < 1e-15);
    CHECK(std::abs(nu_of(-0.5, 3) - cdouble(0.0, -0.5)) < 1e-15);
    CHECK(std::abs(nu_of(0.0, 5) - 1.5) < 1e-15);
    CHECK(harmonic_dimension(0, 3) == 1);
    CHECK(harmonic_dimension(3, 3) == 7);
    CHECK(harmonic_dimension(2, 4) == 9);
    CHECK(harmonic_dimension(1, 5) == 5);
}

TEST_CASE("free angular spectra") {
    SUBCASE("n = 3: nu = l + 1/2, one critical direction") {
        const NuSpectrum s = angular_spectrum(AngularOperator::free(3, 1));
        CHECK(s.s_a == doctest::Approx(1.5));
        CHECK(s.d_a == 1);
        REQUIRE(s.sigma_plus.size() == 1);
        CHECK(s.sigma_plus[0] == doctest::Approx(0.5));
        REQUIRE(s.entries.size() >= 3);
        CHECK(s.entries[1].multiplicity == 3);
        CHECK(s.entries[2].nu.real() == doctest::Approx(2.5));
        CHECK(s.hardy_ok);
    }
    SUBCASE("n = 3, two channels doubles the multiplicities") {
        const NuSpectrum s = angular_spectrum(AngularOperator::free(3, 2));
        CHECK(s.d_a == 2);
        CHECK(s.entries[0].multiplicity == 2);
    }
    SUBCASE("n = 5: sigma_plus is empty") {
        const NuSpectrum s = angular_spectrum(AngularOperator::free(5, 1));
        CHECK(s.sigma_plus.empty());
        CHECK(s.d_a == 0);
        CHECK(s.s_a == doctest::Approx(2.5));
    }
}

TEST_CASE("constant q = 0.3 shifts nu0 to sqrt(0.55)") {
    MatC q(1, 1);
    q(0, 0) = 0.3;
    const NuSpectrum s = angular_spectrum(AngularOperator::constant(3, q));
    CHECK(s.nu0 == doctest::Approx(std::sqrt(0.55)).epsilon(1e-12));
    CHECK(s.s_a == doctest::Approx(1.0 + std::sqrt(0.55)).epsilon(1e-12));
    CHECK(s.d_a == 1);
    const ResonanceBound b = resonance_bound(s);
    CHECK(b.d_a == 1);
    CHECK(b.statement.find("d_a = 1") != std::string::npos);
}

TEST_CASE("constant q below the Hardy limit is flagged") {
    MatC q(1, 1);
    q(0, 0) = -0.5;
    const NuSpectrum s = angular_spectrum(AngularOperator::constant(3, q));
    CHECK_FALSE(s.hardy_ok);
    CHECK(resonance_bound(s).statement.find("Hardy") != std::string::npos);
}

TEST_CASE("random constant Hermitian q: d_a counts l = 0 eigenvalues with nu in (0, 1]") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 10; ++t) {
        MatC A(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) A(i, j) = cdouble(nd(rng), nd(rng));
        const MatC q = 0.3 * (A + A.adjoint());
        const VecR e = Eigen::SelfAdjointEigenSolver<MatC>(q).eigenvalues();
        if ((e.array() + 0.25).minCoeff() <= 1e-6) continue;
        int expect = 0;
        for (int l = 0; l < 4; ++l)
            for (int k = 0; k < 3; ++k) {
                const double nu = std::sqrt(l * (l + 1) + e[k] + 0.25);
                if (nu > 0.0 && nu <= 1.0) expect += 2 * l + 1;
            }
        const NuSpectrum s = angular_spectrum(AngularOperator::constant(3, q));
        CHECK(s.d_a == expect);
        CHECK(s.nu0 == doctest::Approx(std::sqrt(e.minCoeff() + 0.25)).epsilon(1e-10));
    }
}

TEST_CASE("dipole q: second-order shift of the lowest eigenvalue") {
    const double eps = 0.1;
    AngularOperator op;
    op.L = 1;
    op.coeffs.assign(4, MatC::Zero(1, 1));
    op.coeffs[2](0, 0) = eps;  // Y_10
    op.validate();
    const NuSpectrum s = angular_spectrum(op, 12);
    CHECK(s.entries[0].mu == doctest::Approx(-eps * eps / (8.0 * kPi)).epsilon(1e-2));
    CHECK(s.cutoff_complete);

    AngularOperator bad = op;
    bad.n = 4;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("Euler Green's function") {
    const EulerGreen g(cdouble(0.5, 0.0));
    CHECK(std::abs(g.phi(1.0)) < 1e-15);
    CHECK(std::abs(g.phi(3.0) - 2.0) < 1e-14);
    CHECK(std::abs(g.psi(7.0) - 1.0) < 1e-14);
    CHECK_THROWS_AS(EulerGreen(cdouble(-0.5, 0.0)), ValidationError);

    // -u'' = 6 r^{-4}, u(1) = 0, bounded: u = 1 - r^{-2}.
    double err[2];
    for (int k = 0; k < 2; ++k) {
        const RadialGrid grid = RadialGrid::uniform(k == 0 ? 381 : 761, 1.0, 20.0);
        VecC v(grid.size()), exact(grid.size());
        for (int i = 0; i < grid.size(); ++i) {
            const double r = grid.r()[i];
            v[i] = 6.0 / std::pow(r, 4);
            exact[i] = 1.0 - 1.0 / (r * r);
        }
        const EulerApply ap = euler_green_apply(g, grid, v, 4.0);
        CHECK_FALSE(ap.tail_divergent);
        err[k] = (ap.u - exact).cwiseAbs().maxCoeff();
        CHECK(euler_residual(g, grid, ap.u, v) < 1e-2);
    }
    CHECK(err[0] < 2e-3);
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK_THROWS_AS(euler_green_apply(g, RadialGrid::uniform(10, 0.5, 2.0), VecC::Zero(10)), ValidationError);
}

TEST_CASE("Im R_nu is positive semidefinite for nu on the negative imaginary axis") {
    const RadialGrid grid = RadialGrid::uniform(191, 1.0, 20.0);
    for (double t : {0.1, 0.4})
        CHECK(euler_im_min_eigenvalue(EulerGreen(cdouble(0.0, -t)), grid) >= -1e-12);
}

TEST_CASE("parametrix on the free n = 3 spectrum") {
    const NuSpectrum s = angular_spectrum(AngularOperator::free(3, 1));
    const Parametrix p = parametrix_assemble(s, 120, 0.5, 12.0, 3);
    CHECK(p.partition_residual < 1e-12);
    CHECK(p.min_im >= -1e-12);
    CHECK(p.sectors.size() == 3);
    CHECK(p.multiplicity[1] == 3);
    const MatC adj = parametrix_adjoint(p, 0);
    CHECK((adj - p.sectors[0].adjoint()).norm() == 0.0);
    CHECK_THROWS_AS(parametrix_adjoint(p, 9), ValidationError);
}
