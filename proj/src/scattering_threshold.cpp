#include "threshold/scattering_threshold.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "threshold/free_resolvent.hpp"

namespace thr {

ScatteringLength scattering_length(const EffectiveOperator& op, int channel) {
    op.validate();
    if (channel < 0 || channel >= op.m) throw ValidationError("scattering_length: channel out of range");
    const int n = op.n(), N = op.dim();
    const MatC U = op.U();
    const MatC G0 = partial_wave_G0(0, op.grid, op.m).block();
    VecC rvec = VecC::Zero(N);
    for (int i = 0; i < n; ++i) rvec[channel * n + i] = op.grid.r()[i];
    const MatC M = MatC::Identity(N, N) + U * G0;
    Eigen::PartialPivLU<MatC> lu(M);
    const VecC h = lu.solve(U * rvec);
    ScatteringLength out;
    out.s = 0.0;
    for (int i = 0; i < n; ++i) out.s += op.grid.w()[i] * op.grid.r()[i] * h[channel * n + i];
    out.sigma0 = 4.0 * kPi * std::norm(out.s);
    out.condition = 1.0 / lu.rcond();
    out.near_resonant = out.condition > 1e8;
    return out;
}

double ode_scattering_length(const std::function<double(double)>& W, double r_end,
                             const std::vector<double>& breaks) {
    const ZeroEnergySolution s = shoot_zero_energy(W, r_end, breaks);
    if (s.du == 0.0) throw NumericalError("ode_scattering_length: zero slope (threshold resonance)");
    return r_end - s.u / s.du;
}

double square_well_scattering_length(double V0, double a) {
    const double k0 = std::sqrt(V0);
    return a * (1.0 - std::tan(k0 * a) / (k0 * a));
}

CrossSection optical_cross_section(const EffectiveOperator& op, double lambda, int channel) {
    op.validate();
    if (!(lambda > 0.0)) throw ValidationError("optical_cross_section: needs lambda > lambda0");
    if (channel < 0 || channel >= op.m) throw ValidationError("optical_cross_section: channel out of range");
    const int n = op.n(), N = op.dim();
    const double k = std::sqrt(lambda);
    VecC ut = VecC::Zero(N);
    for (int i = 0; i < n; ++i) ut[channel * n + i] = std::sin(k * op.grid.r()[i]) / k;
    const MatC I = MatC::Identity(N, N);
    const VecC Uu = op.U() * ut;
    CrossSection cs;
    cs.lambda = lambda;
    for (int j = 4; j <= 7; ++j) {
        const double eps = lambda * std::pow(10.0, -j);
        const cdouble z(lambda, eps);
        const MatC r0 = exact_free_resolvent(z, op.grid, op.m).block();
        MatC U = op.U();
        if (op.has_U1()) U += z * op.U1_matrix();
        // R(z) = (P(z) - z)^{-1} = (1 + r0 U)^{-1} r0
        const VecC Rf = (I + r0 * U).partialPivLu().solve(r0 * Uu);
        cs.eps.push_back(eps);
        cs.F_eps.push_back(op.inner(Uu, Rf));
    }
    std::vector<cdouble> ex;
    for (std::size_t j = 0; j + 1 < cs.F_eps.size(); ++j) ex.push_back((10.0 * cs.F_eps[j + 1] - cs.F_eps[j]) / 9.0);
    cs.F = ex.back();
    const cdouble prev = ex[ex.size() - 2];
    cs.extrapolation_change = std::abs(cs.F.imag() - prev.imag()) / std::max(std::abs(cs.F.imag()), 1e-300);
    cs.nonconvergent = cs.extrapolation_change > 1e-3;
    cs.sigma = 4.0 * kPi / k * cs.F.imag();
    return cs;
}

ThresholdSMatrix levinson_limit(const MatC& c) {
    ThresholdSMatrix S;
    S.m = static_cast<int>(c.rows());
    S.kappa = static_cast<int>(c.cols());
    S.maximal = S.kappa == S.m;
    const MatC I = MatC::Identity(S.m, S.m);
    // Normalization makes P = C C^* the identity in the maximal case.
    const MatC P = S.maximal ? I : MatC(c * c.adjoint());
    S.A = I - 2.0 * P;
    for (int i = 0; i < S.m; ++i) {
        const double w = P(i, i).real();
        S.weights.push_back(w);
        S.elastic.push_back(1.0 - 2.0 * w);
        S.elastic_defect.push_back(1.0 - (1.0 - 2.0 * w) * (1.0 - 2.0 * w));
    }
    const MatC D = I - S.A.adjoint() * S.A;
    S.unitarity_defect = D.cwiseAbs().maxCoeff() == 0.0 ? 0.0 : Eigen::JacobiSVD<MatC>(D).singularValues()(0);
    return S;
}

ThresholdSMatrix levinson_limit(const ThresholdReport& report) {
    if (report.kappa < 1) throw ValidationError("levinson_limit: needs a threshold resonance (kappa >= 1)");
    return levinson_limit(report.normalized_c);
}

ChannelMixing two_channel_mixing(double theta, bool adapted) {
    ChannelMixing mix;
    mix.c.resize(2, 1);
    mix.c << std::cos(theta), std::sin(theta);
    mix.M = MatC::Identity(2, 2);
    if (adapted) mix.M << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return mix;
}

TransmissionReport transmission_diagnostic(const ChannelMixing& mix) {
    TransmissionReport rep;
    const int m = static_cast<int>(mix.M.rows());
    if (mix.M.cols() != m || mix.c.rows() != m) throw ValidationError("transmission_diagnostic: shape mismatch");
    rep.unitarity_error = (mix.M.adjoint() * mix.M - MatC::Identity(m, m)).norm();
    if (rep.unitarity_error > 1e-12) throw ValidationError("transmission_diagnostic: mixing matrix is not unitary");
    const ThresholdSMatrix S = levinson_limit(mix.c);
    for (int j = 0; j < m; ++j) {
        const cdouble amp = mix.M.col(j).dot(S.A * mix.M.col(j));
        const double d = 1.0 - std::norm(amp);
        rep.defects.push_back(d);
        rep.transmits.push_back(d > 1e-12);
    }
    return rep;
}

namespace {

double eikonal_integral(const std::function<double(double)>& w, double E, double a, double b) {
    auto f = [&](double s) {
        const double v = E - w(s);
        if (v < 0.0) throw NumericalError("eikonal_phase: classically forbidden region at r = " + std::to_string(s));
        return std::sqrt(v);
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-14);
}

}  // namespace

double eikonal_phase(const std::function<double(double)>& w, double E, double R0, double r) {
    if (!(E >= 0.0)) throw ValidationError("eikonal_phase: needs lambda >= lambda0");
    if (!(r >= R0) || !(R0 > 0.0)) throw ValidationError("eikonal_phase: needs 0 < R0 <= r");
    return eikonal_integral(w, E, R0, r) + std::sqrt(E) * R0;
}

double eikonal_residual(const std::function<double(double)>& w, double E, double R0, double r) {
    const double h = 1e-2 * r;
    if (r - h < R0) throw ValidationError("eikonal_residual: r too close to R0");
    auto D = [&](double hh) { return eikonal_integral(w, E, r - hh, r + hh) / (2.0 * hh); };
    const double d = (4.0 * D(0.5 * h) - D(h)) / 3.0;
    return std::abs(d * d + w(r) - E);
}

FlowResult reduced_flow(const VecR& xhat0, const VecR& cbar0, double b0, double rho, double tau_end, int samples) {
    if (!(rho > 0.0 && rho < 2.0)) throw ValidationError("reduced_flow: rho must lie in (0, 2)");
    if (xhat0.size() != cbar0.size() || xhat0.size() < 2) throw ValidationError("reduced_flow: bad dimensions");
    if (std::abs(xhat0.norm() - 1.0) > 1e-12) throw ValidationError("reduced_flow: xhat must be a unit vector");
    if (std::abs(xhat0.dot(cbar0)) > 1e-12) throw ValidationError("reduced_flow: cbar must be orthogonal to xhat");
    const int d = static_cast<int>(xhat0.size());
    const double k = 1.0 - 0.5 * rho;
    using State = std::vector<double>;
    State x(2 * d + 1);
    for (int i = 0; i < d; ++i) {
        x[i] = xhat0[i];
        x[d + i] = cbar0[i];
    }
    x[2 * d] = b0;
    const double a0 = b0 * b0 + cbar0.squaredNorm();
    FlowResult out;
    out.fixed_point = cbar0.norm() == 0.0;
    const double sa = std::sqrt(a0);
    const double tau0 = (out.fixed_point || sa == 0.0) ? 0.0 : -std::atanh(b0 / sa) / (sa * k);
    auto rhs = [&](const State& s, State& ds, double) {
        double c2 = 0.0;
        for (int i = 0; i < d; ++i) c2 += s[d + i] * s[d + i];
        for (int i = 0; i < d; ++i) {
            ds[i] = s[d + i];
            ds[d + i] = -k * s[2 * d] * s[d + i] - c2 * s[i];
        }
        ds[2 * d] = k * c2;
    };
    auto record = [&](double tau) {
        FlowSample fs;
        fs.tau = tau;
        fs.xhat = Eigen::Map<const VecR>(x.data(), d);
        fs.cbar = Eigen::Map<const VecR>(x.data() + d, d);
        fs.b = x[2 * d];
        fs.a = fs.b * fs.b + fs.cbar.squaredNorm();
        out.max_a_drift = std::max(out.max_a_drift, std::abs(fs.a - a0));
        const double closed = out.fixed_point ? b0 : sa * std::tanh(sa * k * (tau - tau0));
        out.max_b_error = std::max(out.max_b_error, std::abs(fs.b - closed));
        out.samples.push_back(std::move(fs));
    };
    record(0.0);
    namespace ode = boost::numeric::odeint;
    const double dt = tau_end / samples;
    for (int s = 0; s < samples; ++s) {
        const double t0 = s * dt;
        if (!out.fixed_point) {
            try {
                ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-12, 1e-12), rhs, x,
                                        t0, t0 + dt, 1e-3 * dt);
            } catch (const std::exception& e) {
                throw NumericalError(std::string("reduced_flow: step-size failure: ") + e.what());
            }
            // Re-project onto the constraint set |xhat| = 1, cbar . xhat = 0.
            Eigen::Map<VecR> xh(x.data(), d), cb(x.data() + d, d);
            xh.normalize();
            cb -= cb.dot(xh) * xh;
        }
        record(t0 + dt);
    }
    return out;
}

}  // namespace thr
