#include <doctest.h>

#include <random>

#include "threshold/grushin_core.hpp"

using namespace thr;

namespace {

MatC random_hermitian(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    MatC A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cdouble(nd(rng), nd(rng));
    return 0.5 * (A + A.adjoint());
}

MatC random_matrix(int r, int c, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    MatC A(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) A(i, j) = cdouble(nd(rng), nd(rng));
    return A;
}

double rel_identity(const ReductionSetup& s, cdouble z) {
    const int n = s.dimG();
    const MatC direct = (s.H - z * MatC::Identity(n, n)).inverse();
    const GrushinResolvent g = resolvent_via_grushin(build_blocks(s, z));
    return (g.R - direct).norm() / direct.norm();
}

}  // namespace

TEST_CASE("diagonal H with S selecting one coordinate: E_H(z) = z - H11") {
    MatC H = MatC::Zero(4, 4);
    H.diagonal() << 1.5, -0.5, 2.0, 3.0;
    MatC S = MatC::Zero(4, 1);
    S(0, 0) = 1.0;
    const ReductionSetup s = make_setup(H, S);
    const cdouble z(0.0, 1.0);
    const GrushinBlocks b = build_blocks(s, z);
    CHECK(std::abs(b.EH(0, 0) - (z - 1.5)) < 1e-14);
}

TEST_CASE("random 20-dim model: Grushin identity and Herglotz inequality") {
    std::mt19937_64 rng(7);
    const MatC H = random_hermitian(20, rng);
    const MatC S = random_matrix(20, 3, rng);
    const ReductionSetup s = make_setup(H, S);
    const cdouble z(0.3, 0.1);
    CHECK(rel_identity(s, z) <= 1e-11);
    const GrushinBlocks b = build_blocks(s, z);
    CHECK(herglotz_margin(s, b) >= -1e-12);
    CHECK(check_nilpotent_B(s, z) <= 1e-12);
    // Projector algebra.
    CHECK((s.Pi * s.Pi - s.Pi).norm() < 1e-12);
    CHECK((s.Pi * s.PiPrime).norm() < 1e-12);
    CHECK((s.Pi * s.T() - s.T()).norm() < 1e-12);
}

TEST_CASE("range of S an eigenspace of H: nilpotent structure collapses") {
    std::mt19937_64 rng(3);
    const MatC H = random_hermitian(12, rng);
    Eigen::SelfAdjointEigenSolver<MatC> es(H);
    const MatC S = es.eigenvectors().leftCols(2);
    const ReductionSetup s = make_setup(H, S);
    double normB = -1.0;
    CHECK(check_nilpotent_B(s, cdouble(0.2, 0.7), &normB) < 1e-12);
    CHECK(normB < 1e-12);
}

TEST_CASE("50 random setups: ||B^3|| below 1e-12") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> dim(4, 30);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const int n = dim(rng), r = 1 + t % 4;
        const ReductionSetup s = make_setup(random_hermitian(n, rng), random_matrix(n, r, rng));
        worst = std::max(worst, check_nilpotent_B(s, cdouble(0.1 * t - 2.0, 0.5)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("eigentransform on planted spectra") {
    std::mt19937_64 rng(5);
    const int n = 16;
    Eigen::HouseholderQR<MatC> qr(random_matrix(n, n, rng));
    const MatC Q = qr.householderQ();
    VecR ev(n);
    for (int i = 0; i < n; ++i) ev[i] = -3.0 + 0.4 * i;
    const double lambda = 0.37;

    SUBCASE("no eigenvalue at lambda: E_H(lambda) injective") {
        const MatC H = Q * ev.cast<cdouble>().asDiagonal() * Q.adjoint();
        const Eigentransform e = eigentransform(make_setup(H, random_matrix(n, 3, rng)), lambda);
        CHECK(e.dim_ker_H == 0);
        CHECK(e.dim_ker_EH == 0);
        CHECK(e.min_singular_EH > 1e-8);
    }
    SUBCASE("planted simple eigenvalue: round trip") {
        VecR e2 = ev;
        e2[5] = lambda;
        const MatC H = Q * e2.cast<cdouble>().asDiagonal() * Q.adjoint();
        const Eigentransform e = eigentransform(make_setup(H, random_matrix(n, 3, rng)), lambda);
        CHECK(e.dim_ker_H == 1);
        CHECK(e.dim_ker_EH == 1);
        CHECK(e.max_roundtrip <= 1e-10);
        CHECK(e.max_EH_residual <= 1e-10);
    }
    SUBCASE("planted double eigenvalue: dim ker E_H = 2") {
        VecR e2 = ev;
        e2[5] = lambda;
        e2[9] = lambda;
        const MatC H = Q * e2.cast<cdouble>().asDiagonal() * Q.adjoint();
        const Eigentransform e = eigentransform(make_setup(H, random_matrix(n, 4, rng)), lambda);
        CHECK(e.dim_ker_H == 2);
        CHECK(e.dim_ker_EH == 2);
        CHECK(e.max_roundtrip <= 1e-10);
    }
}

TEST_CASE("multiple-cluster setup") {
    std::mt19937_64 rng(9);
    const int n = 10;
    const MatC H = random_hermitian(n, rng);

    SUBCASE("orthogonal ranges: S*S = 1 and Pi = S1 S1* + S2 S2*") {
        const MatC I = MatC::Identity(n, n);
        const MatC S1 = I.leftCols(2), S2 = I.middleCols(2, 3);
        const ReductionSetup s = multiple_cluster_setup(H, S1, S2);
        CHECK(s.dim_kernel_StS == 0);
        CHECK((s.S.adjoint() * s.S - MatC::Identity(5, 5)).norm() < 1e-14);
        CHECK((s.Pi - (S1 * S1.adjoint() + S2 * S2.adjoint())).norm() < 1e-14);
    }
    SUBCASE("tensor example: overlapping ranges give a one-dimensional ker S*S") {
        // G = C^3 (x) C^3; F1 = phi1 (x) C^3, F2 = C^3 (x) phi2, F1 and F2 meet in phi1 (x) phi2.
        const int d = 3;
        VecC phi1 = VecC::Zero(d), phi2 = VecC::Zero(d);
        phi1 << 1.0, 1.0, 0.0;
        phi2 << 0.0, 1.0, -1.0;
        phi1.normalize();
        phi2.normalize();
        MatC S1(d * d, d), S2(d * d, d);
        const MatC I = MatC::Identity(d, d);
        S1.setZero();
        S2.setZero();
        for (int k = 0; k < d; ++k)
            for (int a = 0; a < d; ++a) {
                S1(a * d + k, k) = phi1[a];
                S2(k * d + a, k) = phi2[a];
            }
        const ReductionSetup s = multiple_cluster_setup(random_hermitian(d * d, rng), S1, S2);
        CHECK(s.dim_kernel_StS == 1);
        CHECK(s.dimAux() == 2 * d - 1);
        CHECK((s.Pi * s.Pi - s.Pi).norm() < 1e-10);
        CHECK(rel_identity(s, cdouble(0.1, 0.4)) < 1e-10);
    }
    SUBCASE("nearly parallel ranges: Pi stays idempotent") {
        const MatC A = random_matrix(n, 2, rng);
        const MatC S1 = MatC(Eigen::HouseholderQR<MatC>(A).householderQ()).leftCols(2);
        const MatC B = A + 1e-6 * random_matrix(n, 2, rng);
        const MatC S2 = MatC(Eigen::HouseholderQR<MatC>(B).householderQ()).leftCols(2);
        const ReductionSetup s = multiple_cluster_setup(H, S1, S2);
        CHECK((s.Pi * s.Pi - s.Pi).norm() <= 1e-10);
    }
}

TEST_CASE("positivity of 1 - U1 for two-channel setups") {
    std::mt19937_64 rng(13);
    const int n = 12;
    const MatC H = random_hermitian(n, rng);
    const MatC S = random_matrix(n, 3, rng);
    ReductionSetup s = make_setup(H, S);
    const VecR spec = s.reduced_spectrum();
    // Real lambda0 in a gap of sigma(H').
    double lambda0 = spec[0] - 1.0;
    for (int i = 0; i + 1 < spec.size(); ++i)
        if (spec[i + 1] - spec[i] > 0.2) {
            lambda0 = 0.5 * (spec[i] + spec[i + 1]);
            break;
        }
    const PositivityCertificate c = positivity_1_minus_U1(s, lambda0, 7);
    CHECK(c.identity_residual <= 1e-10);
    CHECK(c.contour_residual <= 1e-8);
    CHECK(c.min_eigenvalue > 0.0);

    SUBCASE("orthogonal coordinate channels with H' decoupled: 1 - U1 = 1") {
        MatC Hd = MatC::Zero(n, n);
        Hd.diagonal() = VecR::LinSpaced(n, -1.0, 2.0).cast<cdouble>();
        const MatC Sd = MatC::Identity(n, n).leftCols(2);
        const PositivityCertificate e = positivity_1_minus_U1(make_setup(Hd, Sd), 0.5);
        CHECK((e.one_minus_U1 - MatC::Identity(2, 2)).norm() < 1e-12);
    }
    SUBCASE("near-parallel channels: smallest eigenvalue small but positive") {
        const MatC S1 = random_matrix(n, 1, rng);
        MatC S2(n, 2);
        S2 << S1, S1 + 1e-3 * random_matrix(n, 1, rng);
        const PositivityCertificate e = positivity_1_minus_U1(make_setup(H, S2), lambda0);
        CHECK(e.min_eigenvalue > 0.0);
        CHECK(e.min_eigenvalue < 1e-2 * e.one_minus_U1.norm());
    }
}

TEST_CASE("suite report and input validation") {
    const GrushinSuiteReport r = grushin_suite(7, 10, 20, 3);
    CHECK(r.trials == 10);
    CHECK(r.max_identity <= 1e-10);
    CHECK(r.min_herglotz >= -1e-12);
    CHECK(r.kernel_dims_match);
    const GrushinSuiteReport r2 = grushin_suite(7, 10, 20, 3);
    CHECK(r2.max_identity == r.max_identity);

    MatC H = MatC::Identity(3, 3);
    H(0, 1) = 1.0;
    CHECK_THROWS_AS(make_setup(H, MatC::Identity(3, 1)), ValidationError);
    CHECK_THROWS_AS(make_setup(MatC::Identity(3, 3), MatC::Zero(3, 1)), ValidationError);
}
