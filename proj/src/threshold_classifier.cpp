#include "threshold/threshold_classifier.hpp"

#include <algorithm>
#include <cmath>

#include <boost/numeric/odeint.hpp>

namespace thr {

std::string to_string(DecayClass d) {
    switch (d) {
        case DecayClass::Fast: return "fast";
        case DecayClass::CoulombAttractive: return "coulomb_attractive";
        case DecayClass::CoulombRepulsive: return "coulomb_repulsive";
        default: return "critical";
    }
}

std::string to_string(ThresholdCase c) {
    switch (c) {
        case ThresholdCase::Regular: return "Regular";
        case ThresholdCase::Exceptional1: return "Exceptional1";
        case ThresholdCase::Exceptional2: return "Exceptional2";
        default: return "Exceptional3";
    }
}

VecR EffectiveOperator::weights() const {
    VecR w(dim());
    for (int k = 0; k < m; ++k) w.segment(k * n(), n()) = grid.w();
    return w;
}

MatC EffectiveOperator::U() const {
    const int nn = n(), N = dim();
    MatC u = MatC::Zero(N, N);
    if (!W.empty())
        for (int i = 0; i < nn; ++i)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) u(k * nn + i, l * nn + i) = W[i](k, l);
    if (profiles.cols() > 0) {
        const VecR w = weights();
        u += profiles * coupling * (profiles.adjoint() * w.asDiagonal());
    }
    return u;
}

MatC EffectiveOperator::U1_matrix() const {
    const int nn = n(), N = dim();
    MatC u = MatC::Zero(N, N);
    for (int i = 0; i < static_cast<int>(U1.size()); ++i)
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l) u(k * nn + i, l * nn + i) = U1[i](k, l);
    return u;
}

cdouble EffectiveOperator::inner(const VecC& f, const VecC& g) const {
    const VecR w = weights();
    cdouble s = 0.0;
    for (int i = 0; i < dim(); ++i) s += w[i] * std::conj(f[i]) * g[i];
    return s;
}

void EffectiveOperator::validate() const {
    if (m < 1) throw ValidationError("operator: channel count m must be >= 1");
    if (!W.empty()) {
        if (static_cast<int>(W.size()) != n()) throw ValidationError("operator: W needs one matrix per node");
        for (const auto& Wi : W) {
            if (Wi.rows() != m || Wi.cols() != m) throw ValidationError("operator: W blocks must be m x m");
            if ((Wi - Wi.transpose()).norm() > 1e-12 * std::max(1.0, Wi.norm()))
                throw ValidationError("operator: local potential must be symmetric");
        }
    }
    if (!U1.empty() && static_cast<int>(U1.size()) != n())
        throw ValidationError("operator: U1 needs one matrix per node");
    if (profiles.cols() > 0) {
        if (profiles.rows() != dim()) throw ValidationError("operator: profiles must have n*m rows");
        if (coupling.rows() != profiles.cols() || coupling.cols() != profiles.cols())
            throw ValidationError("operator: coupling must be p x p");
        if ((coupling - coupling.adjoint()).norm() > 1e-10 * std::max(1.0, coupling.norm()))
            throw ValidationError("operator: coupling must be Hermitian");
    }
    if (decay == DecayClass::Fast && !(rho0 > 2.0)) throw ValidationError("operator: fast decay needs rho0 > 2");
}

EffectiveOperator local_operator(const RadialGrid& grid, const std::function<double(double)>& profile,
                                 const MatR& channel_matrix) {
    EffectiveOperator op;
    op.grid = grid;
    op.m = static_cast<int>(channel_matrix.rows());
    op.W.resize(grid.size());
    for (int i = 0; i < grid.size(); ++i) op.W[i] = profile(grid.r()[i]) * channel_matrix;
    return op;
}

EffectiveOperator separable_operator(const RadialGrid& grid, const MatC& profiles, int m) {
    EffectiveOperator op;
    op.grid = grid;
    op.m = m;
    op.profiles = profiles;
    const VecR w = op.weights();
    const MatC G0 = partial_wave_G0(0, grid, m).block();
    MatC Gamma = profiles.adjoint() * w.asDiagonal() * G0 * profiles;
    Gamma = 0.5 * (Gamma + Gamma.adjoint()).eval();
    op.coupling = -Gamma.inverse();
    op.coupling = 0.5 * (op.coupling + op.coupling.adjoint()).eval();
    return op;
}

VecC orthogonalize_to_r(const RadialGrid& grid, const VecC& g, const VecC& helper) {
    const int n = grid.size();
    cdouble pg = 0.0, ph = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const int j = i % n;
        pg += grid.w()[j] * grid.r()[j] * g[i];
        ph += grid.w()[j] * grid.r()[j] * helper[i];
    }
    if (std::abs(ph) == 0.0) throw ValidationError("orthogonalize_to_r: helper has zero pairing with r");
    return g - (pg / ph) * helper;
}

namespace {

double potential_tail(const EffectiveOperator& op) {
    const int n = op.n();
    const double R = op.grid.rmax();
    double tail = 0.0;
    if (!op.W.empty()) tail = op.W[n - 1].cwiseAbs().maxCoeff();
    for (int c = 0; c < op.profiles.cols(); ++c)
        for (int k = 0; k < op.m; ++k) tail = std::max(tail, std::abs(op.profiles(k * n + n - 1, c)));
    return tail * R * R / (op.rho0 - 2.0);
}

VecR weighted_similarity(const EffectiveOperator& op) {
    const int n = op.n();
    VecR d(op.dim());
    for (int k = 0; k < op.m; ++k)
        for (int i = 0; i < n; ++i)
            d[k * n + i] = std::sqrt(op.grid.w()[i]) * std::pow(japanese(op.grid.r()[i]), -op.grid.weight_s);
    return d;
}

void align_phase(MatC& states) {
    for (int c = 0; c < states.cols(); ++c) {
        Eigen::Index idx;
        states.col(c).cwiseAbs().maxCoeff(&idx);
        const cdouble p = states(idx, c);
        if (std::abs(p) > 0.0) states.col(c) *= std::abs(p) / p;
    }
}

// Columns of `support` where the operator U acts (nonzero columns).
std::vector<int> support_of(const MatC& U) {
    std::vector<int> idx;
    for (int j = 0; j < U.cols(); ++j)
        if (U.col(j).cwiseAbs().maxCoeff() > 0.0) idx.push_back(j);
    return idx;
}

}  // namespace

LippmannSchwinger lippmann_schwinger(const EffectiveOperator& op) {
    op.validate();
    if (op.decay != DecayClass::Fast)
        throw ValidationError("lippmann_schwinger: only the fast decay class is supported (got " +
                              to_string(op.decay) + ")");
    LippmannSchwinger ls;
    ls.weight_s = op.grid.weight_s;
    ls.tail_estimate = potential_tail(op);
    if (ls.tail_estimate > 1e-6)
        throw NumericalError("lippmann_schwinger: grid extent insufficient, tail estimate " +
                             std::to_string(ls.tail_estimate));
    KernelOperator G0 = partial_wave_G0(0, op.grid, op.m);
    ls.K = G0;
    ls.K.A = G0.block() * op.U();
    ls.K.label = "G0 U";
    return ls;
}

NullSpace null_space(const EffectiveOperator& op) {
    LippmannSchwinger ls = lippmann_schwinger(op);
    const int N = op.dim();
    const VecR d = weighted_similarity(op);
    MatC B = MatC::Identity(N, N) + ls.K.A;
    B = d.asDiagonal() * B * d.cwiseInverse().asDiagonal();
    Eigen::BDCSVD<MatC> svd(B, Eigen::ComputeFullV);
    const VecR sv = svd.singularValues();  // descending
    NullSpace ns;
    ns.singular_values = sv.reverse();
    ns.cutoff = 1e-6 * sv(0);
    std::vector<int> cols;
    for (int i = N - 1; i >= 0; --i) {
        if (sv(i) < ns.cutoff)
            cols.push_back(i);
        else if (sv(i) < 1e-5 * sv(0))
            ns.near_threshold = true;
    }
    ns.mu = static_cast<int>(cols.size());
    ns.states.resize(N, ns.mu);
    for (int c = 0; c < ns.mu; ++c) ns.states.col(c) = d.cwiseInverse().asDiagonal() * svd.matrixV().col(cols[c]);
    align_phase(ns.states);
    return ns;
}

VecC c_vector(const EffectiveOperator& op, const VecC& v) {
    const VecC Uv = op.U() * v;
    const int n = op.n();
    VecC c = VecC::Zero(op.m);
    for (int k = 0; k < op.m; ++k)
        for (int i = 0; i < n; ++i) c[k] += op.grid.w()[i] * op.grid.r()[i] * Uv[k * n + i];
    return c;
}

VecR c_vector_abs(const EffectiveOperator& op, const VecC& v) {
    const VecC Uv = op.U() * v;
    const int n = op.n();
    VecR c = VecR::Zero(op.m);
    for (int k = 0; k < op.m; ++k)
        for (int i = 0; i < n; ++i) c[k] += op.grid.w()[i] * op.grid.r()[i] * std::abs(Uv[k * n + i]);
    return c;
}

NormalizedResonances normalize_resonances(const EffectiveOperator& op, const MatC& states) {
    NormalizedResonances out;
    const int kappa = static_cast<int>(states.cols());
    if (kappa < 1) throw ValidationError("normalize_resonances: needs at least one resonance state");
    MatC C(op.m, kappa);
    for (int j = 0; j < kappa; ++j) C.col(j) = c_vector(op, states.col(j));
    MatC CC = C.adjoint() * C;
    CC = 0.5 * (CC + CC.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<MatC> es(CC);
    const VecR ev = es.eigenvalues();
    if (!(ev(0) > 0.0)) throw NumericalError("normalize_resonances: c-vectors are linearly dependent");
    out.condition = ev(kappa - 1) / ev(0);
    out.ill_conditioned = out.condition > 1e10;
    out.M0 = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
    out.psi = states * out.M0;
    out.c = C * out.M0;
    if (kappa == 1) {
        // Fix the phase so that c(psi) is real and positive.
        Eigen::Index idx;
        out.c.col(0).cwiseAbs().maxCoeff(&idx);
        const cdouble ph = std::abs(out.c(idx, 0)) / out.c(idx, 0);
        out.psi *= ph;
        out.c *= ph;
        out.M0 *= ph;
    }
    return out;
}

std::vector<double> tail_coefficient(const EffectiveOperator& op, const VecC& v) {
    const VecC c = c_vector(op, v);
    std::vector<double> t(op.m);
    for (int k = 0; k < op.m; ++k) t[k] = -c[k].real() / std::sqrt(4.0 * kPi);
    return t;
}

TailFit verify_tail(const EffectiveOperator& op, const VecC& v) {
    TailFit fit;
    const int n = op.n();
    const int start = (2 * n) / 3;
    fit.predicted = tail_coefficient(op, v);
    double scale = 0.0;
    for (int i = 0; i < v.size(); ++i) scale = std::max(scale, std::abs(v[i]) / std::sqrt(4.0 * kPi));
    scale = std::max(scale, 1e-300);
    for (int k = 0; k < op.m; ++k) {
        // Least squares y = a + b / r with y = u / sqrt(4 pi) = r v_3D.
        Eigen::MatrixXd A(n - start, 2);
        VecR y(n - start);
        for (int i = start; i < n; ++i) {
            A(i - start, 0) = 1.0;
            A(i - start, 1) = 1.0 / op.grid.r()[i];
            y[i - start] = v[k * n + i].real() / std::sqrt(4.0 * kPi);
        }
        VecR coef = A.colPivHouseholderQr().solve(y);
        const double mean = y.mean();
        const double sst = (y.array() - mean).square().sum();
        const double ssr = (A * coef - y).squaredNorm();
        double r2 = 1.0;
        if (sst > 1e-20 * std::max(mean * mean, scale * scale) * (n - start)) r2 = 1.0 - ssr / sst;
        fit.r2 = std::min(fit.r2, r2);
        fit.fitted.push_back(coef[0]);
        const double err = std::abs(coef[0] - fit.predicted[k]) / std::max(std::abs(fit.predicted[k]), scale);
        fit.max_rel_error = std::max(fit.max_rel_error, err);
    }
    fit.poor_fit = fit.r2 < 0.99;
    return fit;
}

ThresholdReport classify(const EffectiveOperator& op) {
    ThresholdReport rep;
    rep.m = op.m;
    NullSpace ns = null_space(op);
    rep.tail_estimate = potential_tail(op);
    rep.mu = ns.mu;
    rep.states = ns.states;
    rep.near_threshold = ns.near_threshold;
    const int N = op.dim();
    if (rep.mu == 0) {
        rep.kase = ThresholdCase::Regular;
        rep.resonant.resize(N, 0);
        rep.eigen.resize(N, 0);
        return rep;
    }
    rep.c_matrix.resize(op.m, rep.mu);
    double cscale = 0.0;
    for (int j = 0; j < rep.mu; ++j) {
        rep.c_matrix.col(j) = c_vector(op, ns.states.col(j));
        cscale = std::max(cscale, c_vector_abs(op, ns.states.col(j)).maxCoeff());
    }
    Eigen::JacobiSVD<MatC> svd(rep.c_matrix, Eigen::ComputeFullV);
    const VecR sv = svd.singularValues();
    rep.kappa = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-6 * cscale) ++rep.kappa;
    const MatC V = svd.matrixV();
    rep.resonant = ns.states * V.leftCols(rep.kappa);
    rep.eigen = ns.states * V.rightCols(rep.mu - rep.kappa);

    const MatC U = op.U();
    const VecR w = op.weights();
    if (rep.eigen.cols() > 0) {
        // Orthonormal in L^2, then make the resonant part <-U., .>-orthogonal to it.
        MatC G = rep.eigen.adjoint() * w.asDiagonal() * rep.eigen;
        G = 0.5 * (G + G.adjoint()).eval();
        Eigen::LLT<MatC> llt(G);
        rep.eigen = llt.matrixU().solve<Eigen::OnTheRight>(rep.eigen);
        align_phase(rep.eigen);
        if (rep.kappa > 0) {
            MatC Gee = -(U * rep.eigen).adjoint() * w.asDiagonal() * rep.eigen;
            MatC Ger = -(U * rep.eigen).adjoint() * w.asDiagonal() * rep.resonant;
            rep.resonant -= rep.eigen * Gee.lu().solve(Ger);
        }
    }
    if (rep.kappa == rep.mu)
        rep.kase = ThresholdCase::Exceptional1;
    else if (rep.kappa == 0)
        rep.kase = ThresholdCase::Exceptional2;
    else
        rep.kase = ThresholdCase::Exceptional3;

    if (rep.kappa > 0) {
        NormalizedResonances nr = normalize_resonances(op, rep.resonant);
        rep.normalized = nr.psi;
        rep.normalized_c = nr.c;
        rep.ill_conditioned_c = nr.ill_conditioned;
    }
    for (int j = 0; j < rep.normalized.cols(); ++j)
        rep.tail_coefficients.push_back(tail_coefficient(op, rep.normalized.col(j)));
    for (int j = 0; j < rep.eigen.cols(); ++j)
        rep.tail_coefficients.push_back(tail_coefficient(op, rep.eigen.col(j)));
    return rep;
}

VecC birman_schwinger_spectrum(const EffectiveOperator& op) {
    op.validate();
    const MatC U = op.U();
    const std::vector<int> sup = support_of(U);
    const int s = static_cast<int>(sup.size());
    if (s == 0) return VecC();
    const MatC G0 = partial_wave_G0(0, op.grid, op.m).block();
    MatC Ks(s, s);
    const MatC GU = G0 * U;
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) Ks(a, b) = GU(sup[a], sup[b]);
    if (Ks.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::EigenSolver<MatR> es(Ks.real(), false);
        return es.eigenvalues();
    }
    Eigen::ComplexEigenSolver<MatC> es(Ks, false);
    return es.eigenvalues();
}

int bound_state_count(const EffectiveOperator& op) {
    const VecC ev = birman_schwinger_spectrum(op);
    int c = 0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i].real() < -1.0 && std::abs(ev[i].imag()) < 1e-8 * std::abs(ev[i])) ++c;
    return c;
}

double critical_coupling(const EffectiveOperator& op) {
    const VecC ev = birman_schwinger_spectrum(op);
    double lo = 0.0;
    for (int i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i].imag()) < 1e-8 * std::abs(ev[i])) lo = std::min(lo, ev[i].real());
    if (!(lo < 0.0)) throw NumericalError("critical_coupling: no negative Birman-Schwinger eigenvalue");
    return -1.0 / lo;
}

EffectiveOperator scaled(const EffectiveOperator& op, double factor) {
    EffectiveOperator out = op;
    for (auto& Wi : out.W) Wi *= factor;
    out.coupling *= factor;
    return out;
}

double critical_depth_bisection(const RadialGrid& grid, const std::function<double(double)>& profile,
                                double lo, double hi, double tol) {
    auto count = [&](double V0) {
        return bound_state_count(local_operator(grid, [&](double r) { return -V0 * profile(r); }));
    };
    if (count(lo) != 0 || count(hi) < 1)
        throw ValidationError("critical_depth_bisection: bracket does not contain the first threshold");
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (count(mid) == 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ZeroEnergySolution shoot_zero_energy(const std::function<double(double)>& W, double r_end,
                                     const std::vector<double>& breaks) {
    using State = std::array<double, 2>;
    namespace ode = boost::numeric::odeint;
    State x{0.0, 1.0};
    auto rhs = [&](const State& s, State& ds, double r) {
        ds[0] = s[1];
        ds[1] = W(r) * s[0];
    };
    std::vector<double> pts{0.0};
    for (double b : breaks)
        if (b > 0.0 && b < r_end) pts.push_back(b);
    pts.push_back(r_end);
    std::sort(pts.begin(), pts.end());
    for (std::size_t k = 1; k < pts.size(); ++k) {
        // Evaluate the right-hand side strictly inside each piece.
        const double a = pts[k - 1], b = pts[k];
        auto piece = [&](const State& s, State& ds, double r) {
            rhs(s, ds, std::clamp(r, a + 1e-14 * (b - a), b - 1e-14 * (b - a)));
        };
        ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-13, 1e-13), piece, x,
                                a, b, 1e-3 * (b - a));
    }
    return {x[0], x[1]};
}

double shooting_critical_depth(const std::function<double(double)>& profile, double r_end, double lo,
                               double hi, const std::vector<double>& breaks) {
    auto slope = [&](double V0) {
        return shoot_zero_energy([&](double r) { return -V0 * profile(r); }, r_end, breaks).du;
    };
    if (!(slope(lo) > 0.0) || !(slope(hi) < 0.0))
        throw ValidationError("shooting_critical_depth: bracket does not contain the first threshold");
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace thr
