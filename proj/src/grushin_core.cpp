#include "threshold/grushin_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace thr {

namespace {

double opnorm(const MatC& A) {
    if (A.size() == 0) return 0.0;
    Eigen::BDCSVD<MatC> svd(A);
    return svd.singularValues()(0);
}

MatC random_complex(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    MatC A(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) A(i, j) = cdouble(nd(rng), nd(rng));
    return A;
}

MatC random_hermitian(int d, std::mt19937_64& rng) {
    MatC A = random_complex(d, d, rng);
    return (A + A.adjoint()) / (2.0 * std::sqrt(static_cast<double>(d)));
}

MatC random_unitary(int d, std::mt19937_64& rng) {
    Eigen::HouseholderQR<MatC> qr(random_complex(d, d, rng));
    return qr.householderQ() * MatC::Identity(d, d);
}

}  // namespace

VecR ReductionSetup::reduced_spectrum() const {
    if (Qc.cols() == 0) return VecR();
    MatC h = Qc.adjoint() * H * Qc;
    Eigen::SelfAdjointEigenSolver<MatC> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

ReductionSetup make_setup(const MatC& H, const MatC& S) {
    const int d = static_cast<int>(H.rows());
    if (H.cols() != d) throw ValidationError("H must be square");
    if (d > kMaxModelDim) throw ValidationError("model dimension exceeds 512");
    if (S.rows() != d || S.cols() < 1 || S.cols() > d)
        throw ValidationError("S must map into G with 1 <= rank <= dim G");
    const double hn = std::max(1.0, H.norm());
    if ((H - H.adjoint()).norm() > 1e-12 * hn) throw ValidationError("H is not Hermitian");

    Eigen::JacobiSVD<MatC> svd(S, Eigen::ComputeFullU);
    const VecR& sv = svd.singularValues();
    const int r = static_cast<int>(S.cols());
    if (sv(r - 1) <= kPinvCutoff * sv(0))
        throw ValidationError("S is not injective (use multiple_cluster_setup)");

    ReductionSetup s;
    s.H = H;
    s.S = S;
    MatC StS = S.adjoint() * S;
    s.StS_inv = StS.llt().solve(MatC::Identity(r, r));
    s.StS_inv = 0.5 * (s.StS_inv + s.StS_inv.adjoint());
    const MatC U = svd.matrixU();
    s.Pi = U.leftCols(r) * U.leftCols(r).adjoint();
    s.PiPrime = MatC::Identity(d, d) - s.Pi;
    s.Qc = U.rightCols(d - r);
    s.Hprime = s.PiPrime * H * s.PiPrime;
    return s;
}

MatC reduced_resolvent(const ReductionSetup& setup, cdouble z) {
    const int k = static_cast<int>(setup.Qc.cols());
    const int d = setup.dimG();
    if (k == 0) return MatC::Zero(d, d);
    MatC h = setup.Qc.adjoint() * setup.H * setup.Qc;
    if (z.imag() == 0.0) {
        VecR ev = setup.reduced_spectrum();
        double dist = (ev.array() - z.real()).abs().minCoeff();
        if (dist <= 1e-8)
            throw NumericalError("z lies in the spectrum of H' (reduced resolvent singular)");
    }
    MatC A = h - z * MatC::Identity(k, k);
    MatC inv = A.partialPivLu().solve(MatC::Identity(k, k));
    return setup.Qc * inv * setup.Qc.adjoint();
}

GrushinBlocks build_blocks(const ReductionSetup& setup, cdouble z) {
    GrushinBlocks b;
    b.z = z;
    b.Rp = reduced_resolvent(setup, z);
    const MatC& H = setup.H;
    const MatC& S = setup.S;
    const int d = setup.dimG();
    b.E = b.Rp;
    MatC HS = H * S;
    b.Eplus = S - b.Rp * HS;
    b.Eminus = S.adjoint() - S.adjoint() * H * b.Rp;
    MatC inner = z * MatC::Identity(d, d) - H + H * b.Rp * H;
    b.EH = S.adjoint() * inner * S;
    return b;
}

GrushinResolvent resolvent_via_grushin(const GrushinBlocks& blocks) {
    GrushinResolvent out;
    Eigen::JacobiSVD<MatC> svd(blocks.EH);
    const VecR& sv = svd.singularValues();
    out.condition_EH = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    out.ill_conditioned = out.condition_EH > 1e12;
    MatC X = blocks.EH.partialPivLu().solve(blocks.Eminus);
    out.R = blocks.E - blocks.Eplus * X;
    return out;
}

double check_nilpotent_B(const ReductionSetup& setup, cdouble z, double* normB) {
    const int d = setup.dimG(), k = setup.dimAux();
    MatC Rp = reduced_resolvent(setup, z);
    MatC B = MatC::Zero(d + k, d + k);
    B.topLeftCorner(d, d) = setup.Pi * setup.H * Rp;
    B.topRightCorner(d, k) = setup.PiPrime * setup.H * setup.T();
    if (normB) *normB = opnorm(B);
    return opnorm(B * B * B);
}

double herglotz_margin(const ReductionSetup& setup, const GrushinBlocks& blocks) {
    if (blocks.z.imag() == 0.0) throw ValidationError("Herglotz test needs Im z != 0");
    MatC ImEH = (blocks.EH - blocks.EH.adjoint()) / (2.0 * kI);
    MatC M = ImEH / blocks.z.imag() - setup.S.adjoint() * setup.S;
    M = 0.5 * (M + M.adjoint());
    Eigen::SelfAdjointEigenSolver<MatC> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Eigentransform eigentransform(const ReductionSetup& setup, double lambda, double tol) {
    Eigentransform et;
    VecR ev = setup.reduced_spectrum();
    if (ev.size() > 0 && (ev.array() - lambda).abs().minCoeff() <= 1e-8)
        throw ValidationError("eigentransform: lambda lies in the spectrum of H'");
    Eigen::SelfAdjointEigenSolver<MatC> es(setup.H);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<int> idx;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i) - lambda) <= tol * scale) idx.push_back(i);
    et.dim_ker_H = static_cast<int>(idx.size());
    et.phis.resize(setup.dimG(), et.dim_ker_H);
    for (int c = 0; c < et.dim_ker_H; ++c) et.phis.col(c) = es.eigenvectors().col(idx[c]);

    GrushinBlocks b = build_blocks(setup, cdouble(lambda, 0.0));
    Eigen::JacobiSVD<MatC> svd(b.EH);
    const VecR& sv = svd.singularValues();
    et.min_singular_EH = sv(sv.size() - 1);
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) <= 1e-10 * std::max(sv(0), 1.0)) ++et.dim_ker_EH;

    et.fs = setup.T().adjoint() * et.phis;
    for (int c = 0; c < et.dim_ker_H; ++c) {
        et.max_roundtrip = std::max(et.max_roundtrip, (b.Eplus * et.fs.col(c) - et.phis.col(c)).norm());
        et.max_EH_residual = std::max(et.max_EH_residual, (b.EH * et.fs.col(c)).norm());
    }
    return et;
}

ReductionSetup multiple_cluster_setup(const MatC& H, const MatC& S1, const MatC& S2) {
    if (S1.rows() != H.rows() || S2.rows() != H.rows())
        throw ValidationError("S1, S2 must map into G");
    for (const MatC* Sj : {&S1, &S2}) {
        MatC G = Sj->adjoint() * (*Sj);
        if ((G - MatC::Identity(G.rows(), G.cols())).norm() > 1e-10)
            throw ValidationError("multiple_cluster_setup: columns of S_j must be orthonormal");
    }
    MatC S(H.rows(), S1.cols() + S2.cols());
    S << S1, S2;
    Eigen::SelfAdjointEigenSolver<MatC> es(S.adjoint() * S);
    const VecR& ev = es.eigenvalues();
    const double emax = ev.maxCoeff();
    std::vector<int> keep;
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) > kPinvCutoff * emax) keep.push_back(i);
    const int dropped = static_cast<int>(ev.size()) - static_cast<int>(keep.size());
    if (dropped == 0) return make_setup(H, S);
    MatC V(S.cols(), keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c) V.col(c) = es.eigenvectors().col(keep[c]);
    ReductionSetup s = make_setup(H, S * V);
    s.dim_kernel_StS = dropped;
    return s;
}

PositivityCertificate positivity_1_minus_U1(const ReductionSetup& setup, double lambda0,
                                            std::uint64_t seed, int probes) {
    PositivityCertificate c;
    const cdouble z0(lambda0, 0.0);
    MatC Rp = reduced_resolvent(setup, z0);
    MatC RHS = Rp * setup.H * setup.S;
    c.one_minus_U1 = setup.S.adjoint() * setup.S + RHS.adjoint() * RHS;
    c.one_minus_U1 = 0.5 * (c.one_minus_U1 + c.one_minus_U1.adjoint());
    Eigen::SelfAdjointEigenSolver<MatC> es(c.one_minus_U1, Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();

    std::mt19937_64 rng(seed);
    for (int p = 0; p < probes; ++p) {
        VecC f = random_complex(setup.dimAux(), 1, rng).col(0);
        const double lhs = (f.adjoint() * c.one_minus_U1 * f)(0).real();
        const double rhs = (setup.S * f).squaredNorm() + (RHS * f).squaredNorm();
        c.identity_residual = std::max(c.identity_residual, std::abs(lhs - rhs) / std::max(rhs, 1e-300));
    }

    // Cauchy integral for dE_H/dz on a circle avoiding sigma(H').
    VecR ev = setup.reduced_spectrum();
    double dist = ev.size() ? (ev.array() - lambda0).abs().minCoeff() : 1.0;
    const double rho = 0.5 * dist;
    const int M = 128;
    MatC D = MatC::Zero(setup.dimAux(), setup.dimAux());
    for (int k = 0; k < M; ++k) {
        const cdouble e = std::exp(2.0 * kPi * kI * (static_cast<double>(k) / M));
        GrushinBlocks b = build_blocks(setup, z0 + rho * e);
        D += b.EH / (rho * e) / static_cast<double>(M);
    }
    c.contour_residual = (D - c.one_minus_U1).norm() / c.one_minus_U1.norm();
    return c;
}

GrushinSuiteReport grushin_suite(std::uint64_t seed, int trials, int max_dim, int max_rank) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    GrushinSuiteReport rep;
    rep.trials = trials;
    rep.min_herglotz = INFINITY;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> rank_dist(1, max_rank);
    std::uniform_real_distribution<double> re_dist(-2.0, 2.0), im_dist(0.05, 1.0), sgn(0.0, 1.0);

    for (int t = 0; t < trials; ++t) {
        const int r = rank_dist(rng);
        std::uniform_int_distribution<int> dim_dist(std::max(r + 2, 8), max_dim);
        const int d = dim_dist(rng);
        MatC H = random_hermitian(d, rng);
        MatC S = random_complex(d, r, rng);
        ReductionSetup setup = make_setup(H, S);

        MatC SSt = S * S.adjoint();
        Eigen::SelfAdjointEigenSolver<MatC> es(SSt);
        const VecR& ev = es.eigenvalues();
        MatC pinv = MatC::Zero(d, d);
        for (int i = 0; i < d; ++i)
            if (ev(i) > kPinvCutoff * ev.maxCoeff())
                pinv += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint() / ev(i);
        rep.max_T_identity = std::max(rep.max_T_identity, (pinv * S - setup.T()).norm());
        rep.max_projection = std::max(rep.max_projection,
                                      (S * setup.StS_inv * S.adjoint() - setup.Pi).norm());
        rep.max_projection = std::max(
            rep.max_projection, (S.adjoint() * pinv * S - MatC::Identity(r, r)).norm());

        for (int k = 0; k < 5; ++k) {
            const double im = im_dist(rng) * (sgn(rng) < 0.5 ? -1.0 : 1.0);
            const cdouble z(re_dist(rng), im);
            GrushinBlocks b = build_blocks(setup, z);
            GrushinResolvent g = resolvent_via_grushin(b);
            MatC direct = (H - z * MatC::Identity(d, d)).partialPivLu().solve(MatC::Identity(d, d));
            rep.max_identity = std::max(rep.max_identity, opnorm(direct - g.R) / opnorm(direct));
            rep.min_herglotz = std::min(rep.min_herglotz, herglotz_margin(setup, b));
            rep.max_nilpotent = std::max(rep.max_nilpotent, check_nilpotent_B(setup, z));
            GrushinBlocks bc = build_blocks(setup, std::conj(z));
            rep.max_adjoint = std::max(rep.max_adjoint, (b.EH.adjoint() - bc.EH).norm());
        }

        // Planted eigenvalue with multiplicity 1 or 2 (requires rank S >= multiplicity).
        const int mult = (r >= 2 && t % 2 == 1) ? 2 : 1;
        const double lambda = 0.37;
        VecR spec(d);
        std::uniform_real_distribution<double> ev_dist(-3.0, 3.0);
        for (int i = 0; i < d; ++i) {
            double v;
            do v = ev_dist(rng);
            while (std::abs(v - lambda) < 0.2);
            spec(i) = v;
        }
        for (int i = 0; i < mult; ++i) spec(i) = lambda;
        MatC V = random_unitary(d, rng);
        MatC Hp = V * spec.cast<cdouble>().asDiagonal() * V.adjoint();
        Hp = 0.5 * (Hp + Hp.adjoint());
        ReductionSetup sp = make_setup(Hp, random_complex(d, r, rng));
        VecR red = sp.reduced_spectrum();
        if ((red.array() - lambda).abs().minCoeff() < 1e-3) continue;
        Eigentransform et = eigentransform(sp, lambda);
        rep.max_roundtrip = std::max(rep.max_roundtrip, et.max_roundtrip);
        if (et.dim_ker_H != mult || et.dim_ker_EH != mult) rep.kernel_dims_match = false;
    }
    rep.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return rep;
}

}  // namespace thr
