#include <doctest.h>

#include <random>

#include "threshold/model_setup.hpp"
#include "threshold/radial_grid.hpp"

using namespace thr;

namespace {

ParticleSystem two_equal() {
    ParticleSystem s;
    s.masses = {1.0, 1.0};
    s.charges = {1.0, -1.0};
    return s;
}

int find_label(const ClusterLattice& L, const std::string& label) {
    for (std::size_t a = 0; a < L.decompositions.size(); ++a)
        if (L.decompositions[a].label() == label) return static_cast<int>(a);
    return -1;
}

BoundState hydrogenic(std::vector<int> particles, int n, int l, int m) {
    BoundState s;
    s.kind = BoundState::Kind::Hydrogenic;
    s.particles = std::move(particles);
    s.orbital = {OrbitalTerm{n, l, m, 1.0}};
    return s;
}

BoundState point(std::vector<int> particles) {
    BoundState s;
    s.particles = std::move(particles);
    return s;
}

}  // namespace

TEST_CASE("two equal masses: internal projection is the relative-coordinate split") {
    const ClusterLattice L = build_lattice(two_equal());
    CHECK(L.decompositions.size() == 2);
    const int a = find_label(L, "({1,2})");
    REQUIRE(a >= 0);
    VecR x(6);
    x << 1.0, 2.0, 3.0, -0.5, 0.25, 4.0;
    const auto [xa, xA] = project(L, x, a);
    const Eigen::Vector3d d = x.head(3) - x.tail(3);
    CHECK((xa.head(3) - 0.5 * d).norm() < 1e-14);
    CHECK((xa.tail(3) + 0.5 * d).norm() < 1e-14);
    CHECK(xA.norm() < 1e-14);
    CHECK(L.decompositions[a].sharp == 1);
    CHECK(L.decompositions[L.index_min].sharp == 2);
}

TEST_CASE("fixed-nuclei lattice: a_min has pi^a = 0 and #a_min = N + 1") {
    for (int N : {2, 3}) {
        ParticleSystem s;
        s.masses.assign(N, 1.0);
        s.charges.assign(N, -1.0);
        s.nuclei = std::vector<Nucleus>{Nucleus{Eigen::Vector3d::Zero(), 2.0}};
        const ClusterLattice L = build_lattice(s);
        REQUIRE(L.index_min >= 0);
        const auto& amin = L.decompositions[L.index_min];
        CHECK(amin.pi_upper.norm() == 0.0);
        CHECK(amin.sharp == N + 1);
        CHECK(L.decompositions[L.index_max].sharp == 1);
        const LatticeCheck c = check_lattice(L);
        CHECK(c.max_sum < 1e-12);
        CHECK(c.order_matches_inclusion);
        CHECK(c.rank_property);
    }
}

TEST_CASE("random four-particle system: projector identities for every decomposition") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    ParticleSystem s;
    for (int j = 0; j < 4; ++j) {
        s.masses.push_back(u(rng));
        s.charges.push_back(j % 2 ? -1.0 : 1.0);
    }
    const ClusterLattice L = build_lattice(s);
    CHECK(L.decompositions.size() == 15);
    const LatticeCheck c = check_lattice(L);
    CHECK(c.max_sum < 1e-10);
    CHECK(c.max_orth < 1e-10);
    CHECK(c.max_idempotent < 1e-10);
    CHECK(c.max_selfadjoint < 1e-10);
    CHECK(c.order_matches_inclusion);
    CHECK(c.rank_property);
    CHECK(L.two_cluster().size() == 7);

    std::normal_distribution<double> nd;
    VecR x(12);
    for (int i = 0; i < 12; ++i) x[i] = nd(rng);
    x = L.total * x;
    for (std::size_t a = 0; a < L.decompositions.size(); ++a) {
        const auto [xa, xA] = project(L, x, static_cast<int>(a));
        const double q = q_form(L, x);
        CHECK(std::abs(q_form(L, xa) + q_form(L, xA) - q) <= 1e-12 * q);
        // Pure components map to themselves.
        const auto [p1, p2] = project(L, xA, static_cast<int>(a));
        CHECK(p1.norm() < 1e-12 * xA.norm() + 1e-14);
        CHECK((p2 - xA).norm() < 1e-12 * xA.norm() + 1e-14);
        const auto [r1, r2] = project(L, xa, static_cast<int>(a));
        CHECK((r1 - xa).norm() < 1e-12 * xa.norm() + 1e-14);
        CHECK(r2.norm() < 1e-12 * xa.norm() + 1e-14);
    }
}

TEST_CASE("particle system validation") {
    ParticleSystem s;
    s.masses = {1.0};
    s.charges = {1.0};
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s.masses = {1.0, -1.0};
    s.charges = {1.0, 1.0};
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s.masses = {1.0, 1.0};
    s.charges = {1.0};
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("hydrogenic radial functions are normalized") {
    const RadialGrid g = RadialGrid::panels({0.0}, 80.0, 0.5, 1.2, 16);
    for (auto [n, l] : {std::pair{1, 0}, {2, 0}, {2, 1}, {3, 2}}) {
        double s = 0.0;
        for (int i = 0; i < g.size(); ++i) {
            const double r = g.r()[i], R = hydrogen_radial(n, l, r, 1.0);
            s += g.w()[i] * R * R * r * r;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK_THROWS_AS(hydrogen_radial(1, 1, 1.0, 1.0), ValidationError);
}

TEST_CASE("effective multipoles") {
    ParticleSystem s;
    s.masses = {1836.15, 1.0, 1.0};
    s.charges = {1.0, -1.0, -1.0};

    SUBCASE("neutral cluster in spherical state plus ion: no Coulomb, no dipole, class A3fd") {
        ChannelSpec ch;
        ch.cluster1 = {0, 1};
        ch.cluster2 = {2};
        ch.states1 = {hydrogenic({0, 1}, 1, 0, 0)};
        ch.states2 = {point({2})};
        const EffectiveMultipole em = effective_multipole(s, ch);
        CHECK(em.coulomb == 0.0);
        CHECK(em.dipole.norm() < 1e-12);
        CHECK(em.kase == MultipoleCase::Case3);
        CHECK(classify_channels(s, {ch}).labels[0] == ChannelClass::A3fd);
    }

    SUBCASE("degenerate 2s/2p manifold: dipole transitions match a 3D quadrature oracle") {
        const BoundState s2 = hydrogenic({0, 1}, 2, 0, 0), p0 = hydrogenic({0, 1}, 2, 1, 0);
        const Eigen::Vector3d d = dipole_moment(s, s2, p0, false);
        // Oracle: <2s| y |2p0> by direct 3D product quadrature of orbital values.
        VecR xr, wr, xt, wt;
        gauss_legendre(64, xr, wr);
        gauss_legendre(32, xt, wt);
        const int nphi = 16;
        Eigen::Vector3d q = Eigen::Vector3d::Zero();
        const double R = 60.0;
        for (int i = 0; i < xr.size(); ++i) {
            const double r = 0.5 * R * (xr[i] + 1.0), wrr = 0.5 * R * wr[i] * r * r;
            for (int j = 0; j < xt.size(); ++j) {
                const double ct = xt[j], st = std::sqrt(1.0 - ct * ct);
                for (int k = 0; k < nphi; ++k) {
                    const double ph = 2.0 * kPi * k / nphi;
                    const Eigen::Vector3d y(r * st * std::cos(ph), r * st * std::sin(ph), r * ct);
                    q += wrr * wt[j] * (2.0 * kPi / nphi) * orbital_value(s2, y) * orbital_value(p0, y) * y;
                }
            }
        }
        const double factor = (s.charges[0] * s.masses[1] - s.charges[1] * s.masses[0]) / (s.masses[0] + s.masses[1]);
        CHECK((d - factor * q).norm() < 1e-8);
        CHECK(std::abs(q.z()) == doctest::Approx(3.0).epsilon(1e-8));

        ChannelSpec ch;
        ch.cluster1 = {0, 1};
        ch.cluster2 = {2};
        ch.states1 = {s2, p0};
        ch.states2 = {point({2})};
        const EffectiveMultipole em = effective_multipole(s, ch);
        CHECK(em.kase == MultipoleCase::Case2);
        CHECK(classify_channels(s, {ch}).labels[0] == ChannelClass::A3cd);
    }

    SUBCASE("ion-ion channels by sign of the charge product") {
        ChannelSpec ch;
        ch.cluster1 = {1, 2};
        ch.cluster2 = {0};
        ch.states1 = {point({1, 2})};
        ch.states2 = {point({0})};
        const EffectiveMultipole em = effective_multipole(s, ch);
        CHECK(em.coulomb == doctest::Approx(-2.0));
        CHECK(em.kase == MultipoleCase::Case1);
        CHECK(classify_channels(s, {ch}).labels[0] == ChannelClass::A1);

        ParticleSystem rep;
        rep.masses = {1.0, 1.0, 1.0};
        rep.charges = {1.0, 1.0, 1.0};
        ChannelSpec c2;
        c2.cluster1 = {0, 1};
        c2.cluster2 = {2};
        c2.states1 = {point({0, 1})};
        c2.states2 = {point({2})};
        CHECK(classify_channels(rep, {c2}).labels[0] == ChannelClass::A2);
    }

    SUBCASE("atom with a permanent dipole plus ion: class A3cd") {
        BoundState m;
        m.kind = BoundState::Kind::Moments;
        m.particles = {0, 1};
        m.dipole = Eigen::Vector3d(0.0, 0.0, 0.7);
        ChannelSpec ch;
        ch.cluster1 = {0, 1};
        ch.cluster2 = {2};
        ch.states1 = {m};
        ch.states2 = {point({2})};
        const EffectiveMultipole em = effective_multipole(s, ch);
        CHECK(em.dipole.z() == doctest::Approx(0.7));
        CHECK(em.kase == MultipoleCase::Case2);
        CHECK(classify_channels(s, {ch}).labels[0] == ChannelClass::A3cd);
    }
}

TEST_CASE("tabulated states need grid extent") {
    BoundState t;
    t.kind = BoundState::Kind::Tabulated;
    t.particles = {0, 1};
    t.orbital = {OrbitalTerm{1, 0, 0, 1.0}};
    for (int i = 0; i <= 20; ++i) {
        t.table_r.push_back(0.1 * i);
    }
    t.table_R = {std::vector<double>(t.table_r.size(), 1.0)};
    ParticleSystem s = two_equal();
    CHECK_THROWS_WITH_AS(dipole_moment(s, t, t, false), doctest::Contains("insufficient grid extent"), ValidationError);
}
