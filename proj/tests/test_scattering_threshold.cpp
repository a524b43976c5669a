#include <doctest.h>

#include "threshold/scattering_threshold.hpp"

using namespace thr;

namespace {

RadialGrid well_grid() { return RadialGrid::panels({0.0, 1.0}, 30.0, 0.25, 1.3, 16); }

EffectiveOperator well(double V0) {
    return local_operator(well_grid(), [V0](double r) { return r < 1.0 ? -V0 : 0.0; });
}

}  // namespace

TEST_CASE("U = 0 has zero scattering length") {
    const ScatteringLength s = scattering_length(well(0.0));
    CHECK(std::abs(s.s) == 0.0);
    CHECK(s.sigma0 == 0.0);
    CHECK_FALSE(s.near_resonant);
}

TEST_CASE("Born limit: s -> (4 pi)^{-1} int U dx = -V0 a^3 / 3") {
    const double V0 = 1e-4;
    const ScatteringLength s = scattering_length(well(V0));
    CHECK(s.s.real() / (-V0 / 3.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(s.s.imag()) < 1e-14);
}

TEST_CASE("square well: operator, ODE and closed form agree") {
    for (double V0 : {1.0, 2.0, 4.0}) {
        const double closed = square_well_scattering_length(V0, 1.0);
        const ScatteringLength s = scattering_length(well(V0));
        CHECK(s.s.real() == doctest::Approx(closed).epsilon(1e-6));
        CHECK(s.sigma0 == doctest::Approx(4.0 * kPi * closed * closed).epsilon(1e-6));
        const double ode = ode_scattering_length([V0](double r) { return r < 1.0 ? -V0 : 0.0; }, 2.0, {1.0});
        CHECK(ode == doctest::Approx(closed).epsilon(1e-8));
    }
    CHECK(square_well_scattering_length(1e-8, 1.0) == doctest::Approx(-1e-8 / 3.0).epsilon(1e-6));
}

TEST_CASE("optical cross section is nonnegative and tends to 4 pi s^2") {
    const EffectiveOperator op = well(1.0);
    const double s0 = scattering_length(op).sigma0;
    for (double lambda : {1e-4, 1e-2, 0.5}) {
        const CrossSection cs = optical_cross_section(op, lambda);
        CHECK(cs.sigma >= 0.0);
        CHECK_FALSE(cs.nonconvergent);
        CHECK(cs.eps.size() == 4);
    }
    CHECK(optical_cross_section(op, 1e-6).sigma == doctest::Approx(s0).epsilon(0.05));
}

TEST_CASE("Levinson limit") {
    SUBCASE("single channel resonance: S Y0 = -Y0") {
        MatC c(1, 1);
        c(0, 0) = 1.0;
        const ThresholdSMatrix S = levinson_limit(c);
        CHECK(S.maximal);
        CHECK(std::abs(S.A(0, 0) + 1.0) == 0.0);
        CHECK(S.unitarity_defect == 0.0);
    }
    SUBCASE("two channels, one resonance") {
        const double th = 0.4;
        MatC c(2, 1);
        c << std::cos(th), std::sin(th);
        const ThresholdSMatrix S = levinson_limit(c);
        CHECK_FALSE(S.maximal);
        CHECK(S.weights[0] == doctest::Approx(std::cos(th) * std::cos(th)));
        CHECK(S.elastic[1] == doctest::Approx(1.0 - 2.0 * std::sin(th) * std::sin(th)));
        CHECK(S.unitarity_defect < 1e-15);
    }
    SUBCASE("no resonance is rejected") {
        CHECK_THROWS_AS(levinson_limit(ThresholdReport{}), ValidationError);
    }
}

TEST_CASE("channel mixing transmits unless the probes are adapted") {
    for (double th : {0.2, 0.9}) {
        const TransmissionReport t = transmission_diagnostic(two_channel_mixing(th));
        const double closed = std::pow(std::sin(2.0 * th), 2);
        CHECK(t.unitarity_error < 1e-14);
        CHECK(t.defects[0] == doctest::Approx(closed).epsilon(1e-12));
        CHECK(t.transmits[0]);
        const TransmissionReport a = transmission_diagnostic(two_channel_mixing(th, true));
        CHECK(std::abs(a.defects[0]) < 1e-12);
        CHECK_FALSE(a.transmits[1]);
    }
}

TEST_CASE("eikonal phase") {
    const double E = 0.7;
    auto free_w = [](double) { return 0.0; };
    CHECK(eikonal_phase(free_w, E, 2.0, 9.0) == doctest::Approx(std::sqrt(E) * 9.0).epsilon(1e-12));
    CHECK(eikonal_residual(free_w, E, 2.0, 9.0) < 1e-10);
    const double gamma = 0.5;
    auto coul = [gamma](double r) { return -gamma / r; };
    for (double r : {3.0, 10.0, 40.0}) CHECK(eikonal_residual(coul, E, 2.0, r) < 1e-8);
}

TEST_CASE("reduced flow") {
    VecR x(3), c(3);
    x << 1.0, 0.0, 0.0;
    SUBCASE("fixed point when cbar = 0") {
        c.setZero();
        const FlowResult f = reduced_flow(x, c, 0.3, 1.0, 5.0, 10);
        CHECK(f.fixed_point);
        CHECK(f.max_a_drift == 0.0);
        CHECK(f.samples.back().b == 0.3);
    }
    SUBCASE("conserved a and tanh profile for b") {
        c << 0.0, 0.5, 0.0;
        const FlowResult f = reduced_flow(x, c, -0.2, 0.5, 10.0, 50);
        CHECK(f.max_a_drift < 1e-8);
        CHECK(f.max_b_error < 1e-6);
        CHECK(f.samples.size() == 51);
        CHECK(f.samples.back().b == doctest::Approx(std::sqrt(f.samples.back().a)).epsilon(1e-3));
    }
    SUBCASE("invalid input") {
        c << 0.5, 0.0, 0.0;
        CHECK_THROWS_AS(reduced_flow(x, c, 0.0, 1.0, 1.0), ValidationError);
        c.setZero();
        CHECK_THROWS_AS(reduced_flow(x, c, 0.0, 2.5, 1.0), ValidationError);
    }
}
