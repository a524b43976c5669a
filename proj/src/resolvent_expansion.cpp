#include "threshold/resolvent_expansion.hpp"

#include <cmath>

#include "threshold/free_resolvent.hpp"

namespace thr {

namespace {

MatC u_of_z(const EffectiveOperator& op, cdouble z) {
    MatC U = op.U();
    if (op.has_U1()) U += z * op.U1_matrix();
    return U;
}

double wnorm(const EffectiveOperator& op, const VecC& f) { return std::sqrt(op.inner(f, f).real()); }

// Phi Gamma^{-1/2} for the Hermitian positive Gram Gamma.
MatC lowdin(const MatC& Phi, const MatC& Gamma, double& min_eig) {
    Eigen::SelfAdjointEigenSolver<MatC> es(0.5 * (Gamma + Gamma.adjoint()));
    min_eig = es.eigenvalues()(0);
    if (!(min_eig > 0.0))
        throw NumericalError("inner_grushin: <-U phi, phi> is not positive definite on the K-space");
    return Phi * es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().adjoint();
}

}  // namespace

WOperator w_operator(const EffectiveOperator& op, cdouble z) {
    WOperator w;
    w.z = z;
    const int N = op.dim();
    const MatC I = MatC::Identity(N, N);
    const MatC U = op.U();
    const MatC G0 = expansion_coefficient(0, op.grid, op.m).block();
    w.W0 = I + G0 * U;
    w.W1 = expansion_coefficient(1, op.grid, op.m).block() * U;
    w.W2 = expansion_coefficient(2, op.grid, op.m).block() * U;
    if (op.has_U1()) w.W2 += G0 * op.U1_matrix();
    w.W = I + exact_free_resolvent(z, op.grid, op.m).block() * u_of_z(op, z);
    return w;
}

InnerGrushin inner_grushin(const EffectiveOperator& op, const ThresholdReport& report) {
    if (report.mu < 1) throw ValidationError("inner_grushin: requires a nontrivial K-space (mu >= 1)");
    InnerGrushin g;
    const MatC U = op.U();
    const VecR w = op.weights();
    auto gram = [&](const MatC& A) { return MatC(-(U * A).adjoint() * w.asDiagonal() * A); };
    g.kappa = report.kappa;
    const int N = op.dim();
    g.S.resize(N, report.mu);
    double me = std::numeric_limits<double>::infinity(), e;
    if (report.kappa > 0) {
        g.S.leftCols(report.kappa) = lowdin(report.resonant, gram(report.resonant), e);
        me = std::min(me, e);
    }
    if (report.mu > report.kappa) {
        g.S.rightCols(report.mu - report.kappa) = lowdin(report.eigen, gram(report.eigen), e);
        me = std::min(me, e);
    }
    g.gram_min_eigenvalue = me;
    g.Sstar = -(U * g.S).adjoint() * w.asDiagonal();
    g.Q = g.S * g.Sstar;
    g.orthonormality = (g.Sstar * g.S - MatC::Identity(report.mu, report.mu)).norm();
    g.idempotency = (g.Q * g.Q - g.Q).norm();
    const MatC I = MatC::Identity(N, N);
    const MatC Qp = I - g.Q;
    const MatC W0 = I + partial_wave_G0(0, op.grid, op.m).block() * U;
    g.D0 = (Qp * W0 * Qp + g.Q).partialPivLu().solve(Qp);
    return g;
}

LeadingMatrices leading_e_minus_plus(const EffectiveOperator& op, const InnerGrushin& inner) {
    LeadingMatrices L;
    const MatC U = op.U();
    const MatC US = U * inner.S;
    const MatC G1 = expansion_coefficient(1, op.grid, op.m).block();
    const MatC G2 = expansion_coefficient(2, op.grid, op.m).block();
    L.E1 = -inner.Sstar * G1 * US;
    L.E2 = -inner.Sstar * G2 * US;
    if (op.has_U1()) L.E2 += -inner.Sstar * partial_wave_G0(0, op.grid, op.m).block() * op.U1_matrix() * inner.S;
    const int k = inner.kappa, mu = static_cast<int>(inner.S.cols());
    for (int i = 0; i < mu; ++i)
        for (int j = 0; j < mu; ++j)
            if (i >= k || j >= k) L.off_corner = std::max(L.off_corner, std::abs(L.E1(i, j)));
    if (k > 0) {
        L.B0 = -kI * L.E1.topLeftCorner(k, k);
        Eigen::SelfAdjointEigenSolver<MatC> es(0.5 * (L.B0 + L.B0.adjoint()), Eigen::EigenvaluesOnly);
        L.B0_min_eigenvalue = es.eigenvalues()(0);
        if (!(L.B0_min_eigenvalue > 0.0)) L.positivity_violation = true;
    }
    if (mu > k) {
        L.E2_eigen = L.E2.bottomRightCorner(mu - k, mu - k);
        Eigen::SelfAdjointEigenSolver<MatC> es(0.5 * (L.E2_eigen + L.E2_eigen.adjoint()), Eigen::EigenvaluesOnly);
        L.E2_min_eigenvalue = es.eigenvalues()(0);
        if (!(L.E2_min_eigenvalue > 0.0)) L.positivity_violation = true;
    }
    return L;
}

VecC LeadingTerm::apply(cdouble z, const VecC& f) const {
    const VecC g = coefficient * f;
    if (power == 0.0) return g;
    if (power == -0.5) return (-kI / sqrt_upper(z)) * g;
    return g / z;
}

LeadingTerm leading_resolvent(const EffectiveOperator& op, const ThresholdReport& report) {
    LeadingTerm t;
    t.kase = report.kase;
    const int N = op.dim();
    const VecR w = op.weights();
    switch (report.kase) {
        case ThresholdCase::Regular: {
            const MatC G0 = partial_wave_G0(0, op.grid, op.m).block();
            const MatC W0 = MatC::Identity(N, N) + G0 * op.U();
            t.power = 0.0;
            t.coefficient = -W0.partialPivLu().solve(G0);
            break;
        }
        case ThresholdCase::Exceptional1:
            t.power = -0.5;
            t.coefficient = report.normalized * report.normalized.adjoint() * w.asDiagonal();
            break;
        default: {
            if (!op.eigen_decay_t)
                throw ValidationError(
                    "leading_resolvent: eigenvalue case needs eigen_decay_t metadata (threshold eigenstates in L^2_t, "
                    "t > 3/2)");
            if (!(*op.eigen_decay_t > 1.5))
                throw ValidationError("leading_resolvent: eigen_decay_t must exceed 3/2");
            const MatC& P = report.eigen;
            MatC one_minus_U1 = MatC::Identity(N, N);
            if (op.has_U1()) one_minus_U1 -= op.U1_matrix();
            const MatC M = P.adjoint() * w.asDiagonal() * one_minus_U1 * P;
            t.power = -1.0;
            t.coefficient = P * M.partialPivLu().solve(P.adjoint() * w.asDiagonal());
            break;
        }
    }
    return t;
}

MatC eh_inverse(const EffectiveOperator& op, cdouble z, int route) {
    const int N = op.dim();
    const MatC I = MatC::Identity(N, N);
    const MatC r0 = exact_free_resolvent(z, op.grid, op.m).block();
    const MatC U = u_of_z(op, z);
    if (route == 1) return -(I + r0 * U).partialPivLu().solve(r0);
    return -(r0 - r0 * (I + U * r0).partialPivLu().solve(U * r0));
}

VecC eh_inverse_apply(const EffectiveOperator& op, cdouble z, const VecC& f, int route) {
    const int N = op.dim();
    const MatC I = MatC::Identity(N, N);
    const MatC r0 = exact_free_resolvent(z, op.grid, op.m).block();
    const MatC U = u_of_z(op, z);
    const VecC r0f = r0 * f;
    if (route == 1) return -(I + r0 * U).partialPivLu().solve(r0f);
    return -(r0f - r0 * (I + U * r0).partialPivLu().solve(U * r0f));
}

PowerFit fit_power(const EffectiveOperator& op, const VecC& f, double tmin, double tmax, int samples) {
    PowerFit fit;
    const cdouble dir = std::polar(1.0, 0.75 * kPi);
    std::vector<double> lx, ly;
    for (int k = 0; k < samples; ++k) {
        const double t = std::exp(std::log(tmin) + (std::log(tmax) - std::log(tmin)) * k / (samples - 1));
        const double nrm = wnorm(op, eh_inverse_apply(op, t * dir, f));
        fit.abs_z.push_back(t);
        fit.norms.push_back(nrm);
        lx.push_back(std::log(t));
        ly.push_back(std::log(nrm));
    }
    fit_line(lx, ly, fit.power, fit.intercept);
    return fit;
}

double leading_error(const EffectiveOperator& op, const LeadingTerm& lead, cdouble z, const VecC& f) {
    const VecC exact = eh_inverse_apply(op, z, f);
    return wnorm(op, lead.apply(z, f) - exact) / wnorm(op, exact);
}

GevreyReport gevrey_probe(const RadialGrid& grid, double strength, double a, int N_max, double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw ValidationError("gevrey_probe: mu must lie in (0, 1)");
    if (!(strength > 0.0)) throw ValidationError("gevrey_probe: repulsive strength must be > 0");
    if (N_max < 2 || N_max > 10) throw ValidationError("gevrey_probe: N_max must lie in [2, 10]");
    GevreyReport rep;
    rep.a = a;
    rep.mu = mu;
    rep.gamma_theory = 2.0 * mu / (1.0 - mu);
    const int n = grid.size();
    const MatC G0 = partial_wave_G0(0, grid).A;
    VecR wv(n), e(n);
    for (int i = 0; i < n; ++i) {
        const double r = grid.r()[i];
        wv[i] = strength * std::pow(japanese(r), -2.0 * mu);
        e[i] = std::exp(-a * std::pow(japanese(r), 1.0 - mu));
    }
    const MatC R = (MatC::Identity(n, n) + G0 * wv.asDiagonal()).partialPivLu().solve(G0);
    const VecR sw = grid.w().cwiseSqrt();
    MatC P = MatC::Identity(n, n);
    std::vector<double> X1, X2, Y;
    for (int N = 1; N <= N_max; ++N) {
        P = R * P;
        const MatC B = sw.cwiseProduct(e).asDiagonal() * P * sw.cwiseInverse().asDiagonal();
        Eigen::BDCSVD<MatC> svd(B);
        const double aN = svd.singularValues()(0);
        if (!std::isfinite(aN) || aN > 1e300 || aN <= 0.0) {
            rep.conditioning_failure = true;
            break;
        }
        rep.a_N.push_back(aN);
        X1.push_back(N + 1.0);
        X2.push_back(N * std::log(static_cast<double>(N)));
        Y.push_back(std::log(aN));
    }
    if (Y.size() >= 2) {
        Eigen::MatrixXd A(Y.size(), 2);
        VecR y(Y.size());
        for (std::size_t i = 0; i < Y.size(); ++i) {
            A(i, 0) = X1[i];
            A(i, 1) = X2[i];
            y[i] = Y[i];
        }
        const VecR c = A.colPivHouseholderQr().solve(y);
        rep.logC_fit = c[0];
        rep.gamma_fit = c[1];
    }
    return rep;
}

}  // namespace thr
