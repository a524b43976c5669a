#include "threshold/critical_channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "threshold/parallel.hpp"

namespace thr {

namespace {

double binom(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Harmonic coefficients for n = 3, or the constant value for other n.
MatC constant_value(const AngularOperator& op) {
    if (op.n == 3) return op.coeffs[0] / std::sqrt(4.0 * kPi);
    return op.coeffs[0];
}

std::vector<NuEntry> group(const std::vector<double>& mus, int n, const std::vector<int>& mult) {
    std::vector<std::size_t> order(mus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mus[a] < mus[b]; });
    std::vector<NuEntry> out;
    for (std::size_t k : order) {
        const double mu = mus[k];
        if (!out.empty() && std::abs(out.back().mu - mu) <= 1e-8 * std::max(1.0, std::abs(mu))) {
            out.back().multiplicity += mult[k];
            continue;
        }
        out.push_back({mu, nu_of(mu, n), mult[k]});
    }
    return out;
}

void finish(NuSpectrum& s) {
    s.nu0 = std::numeric_limits<double>::infinity();
    double min_mu = std::numeric_limits<double>::infinity();
    for (const auto& e : s.entries) {
        s.nu0 = std::min(s.nu0, e.nu.real());
        min_mu = std::min(min_mu, e.mu);
        const bool real_nu = e.nu.imag() == 0.0;
        if (real_nu && e.nu.real() > 0.0 && e.nu.real() <= 1.0 + 1e-12) {
            s.sigma_plus.push_back(e.nu.real());
            s.d_a += e.multiplicity;
        }
    }
    s.s_a = 1.0 + s.nu0;
    s.hardy_ok = min_mu > -0.25;
    s.borderline = std::abs(s.nu0) < 1e-12;
}

// Real spherical harmonics up to degree Lb sampled on a product rule exact for
// polynomial degree 2 Lb + L.
struct SphereRule {
    MatR Y;    // points x basis
    VecR w;
    MatR Yq;   // points x (L+1)^2
};

SphereRule sphere_rule(int Lb, int L) {
    const int deg = 2 * Lb + L;
    VecR x, wx;
    gauss_legendre(deg / 2 + 2, x, wx);
    const int nphi = deg + 2;
    const int P = static_cast<int>(x.size()) * nphi;
    const int nb = (Lb + 1) * (Lb + 1), nq = (L + 1) * (L + 1);
    SphereRule s;
    s.Y.resize(P, nb);
    s.Yq.resize(P, nq);
    s.w.resize(P);
    parallel_for(static_cast<std::size_t>(x.size()), [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        const double th = std::acos(x[i]);
        for (int k = 0; k < nphi; ++k) {
            const int p = i * nphi + k;
            const double ph = 2.0 * kPi * k / nphi;
            s.w[p] = wx[i] * 2.0 * kPi / nphi;
            for (int l = 0; l <= std::max(Lb, L); ++l)
                for (int mm = -l; mm <= l; ++mm) {
                    const int c = l * l + l + mm;
                    const double y = real_spherical_harmonic(l, mm, th, ph);
                    if (l <= Lb) s.Y(p, c) = y;
                    if (l <= L) s.Yq(p, c) = y;
                }
        }
    });
    return s;
}

MatC galerkin(const AngularOperator& op, int Lb) {
    const int nb = (Lb + 1) * (Lb + 1), m = op.m;
    SphereRule s = sphere_rule(Lb, op.L);
    MatC A = MatC::Zero(nb * m, nb * m);
    for (int l = 0; l <= Lb; ++l)
        for (int mm = -l; mm <= l; ++mm) {
            const int c = l * l + l + mm;
            for (int a = 0; a < m; ++a) A(c * m + a, c * m + a) = l * (l + 1.0);
        }
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            VecC qab = VecC::Zero(s.w.size());
            for (int c = 0; c < static_cast<int>(op.coeffs.size()); ++c)
                if (op.coeffs[c](a, b) != cdouble(0.0)) qab += op.coeffs[c](a, b) * s.Yq.col(c).cast<cdouble>();
            if (qab.cwiseAbs().maxCoeff() == 0.0) continue;
            const MatC block = s.Y.transpose().cast<cdouble>() * (s.w.cast<cdouble>().cwiseProduct(qab)).asDiagonal() *
                               s.Y.cast<cdouble>();
            for (int i = 0; i < nb; ++i)
                for (int j = 0; j < nb; ++j) A(i * m + a, j * m + b) += block(i, j);
        }
    return 0.5 * (A + A.adjoint());
}

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

}  // namespace

int harmonic_dimension(int l, int n) {
    if (n < 2 || l < 0) throw ValidationError("harmonic_dimension: needs n >= 2, l >= 0");
    return static_cast<int>(std::lround(binom(l + n - 1, n - 1) - binom(l + n - 3, n - 1)));
}

AngularOperator AngularOperator::constant(int n, const MatC& q) {
    AngularOperator op;
    op.n = n;
    op.m = static_cast<int>(q.rows());
    op.L = 0;
    op.coeffs = {n == 3 ? MatC(q * std::sqrt(4.0 * kPi)) : q};
    return op;
}

AngularOperator AngularOperator::free(int n, int m) { return constant(n, MatC::Zero(m, m)); }

void AngularOperator::validate() const {
    if (n < 2) throw ValidationError("angular operator: n must be >= 2");
    if (m < 1) throw ValidationError("angular operator: m must be >= 1");
    if (L < 0) throw ValidationError("angular operator: L must be >= 0");
    if (static_cast<int>(coeffs.size()) != (L + 1) * (L + 1))
        throw ValidationError("angular operator: expected (L+1)^2 coefficient matrices");
    for (const auto& c : coeffs) {
        if (c.rows() != m || c.cols() != m) throw ValidationError("angular operator: coefficients must be m x m");
        if ((c - c.adjoint()).norm() > 1e-12 * std::max(1.0, c.norm()))
            throw ValidationError("angular operator: q must be Hermitian-valued");
    }
    if (n != 3 && !is_constant()) throw ValidationError("angular operator: non-constant q requires n = 3");
}

bool AngularOperator::is_constant() const {
    for (std::size_t c = 1; c < coeffs.size(); ++c)
        if (coeffs[c].norm() != 0.0) return false;
    return true;
}

cdouble nu_of(double mu, int n) {
    const double nu2 = mu + (n - 2) * (n - 2) / 4.0;
    if (nu2 >= 0.0) return std::sqrt(nu2);
    return cdouble(0.0, -std::sqrt(-nu2));
}

NuSpectrum angular_spectrum(const AngularOperator& op, int max_degree) {
    op.validate();
    NuSpectrum s;
    s.n = op.n;
    s.m = op.m;
    const double limit = (op.n - 2) * (op.n - 2) / 4.0 + 1.0;
    if (op.is_constant()) {
        MatC Q = constant_value(op);
        Eigen::SelfAdjointEigenSolver<MatC> es(0.5 * (Q + Q.adjoint()));
        const VecR e = es.eigenvalues();
        std::vector<double> mus;
        std::vector<int> mult;
        int l = 0;
        for (;; ++l) {
            const double base = l * (l + op.n - 2.0);
            for (int k = 0; k < e.size(); ++k) {
                mus.push_back(base + e[k]);
                mult.push_back(harmonic_dimension(l, op.n));
            }
            if (l >= 3 && base + e.minCoeff() > limit + 1.0) break;
        }
        s.basis_degree = l;
        s.entries = group(mus, op.n, mult);
        finish(s);
        return s;
    }
    // Galerkin in real harmonics; grow the cutoff until the bottom ten
    // eigenvalues move by less than 1e-8.
    VecR prev;
    int Lb = std::max(op.L + 2, 4);
    for (;; Lb += 2) {
        if (Lb > max_degree) throw NumericalError("angular_spectrum: harmonic cutoff did not converge");
        Eigen::SelfAdjointEigenSolver<MatC> es(galerkin(op, Lb));
        const VecR ev = es.eigenvalues();
        const int k = std::min<int>(10, static_cast<int>(ev.size()));
        const bool settled = prev.size() >= k && (ev.head(k) - prev.head(k)).cwiseAbs().maxCoeff() < 1e-8;
        prev = ev;
        if (settled) {
            s.eigenvalues = ev;
            s.eigenvectors = es.eigenvectors();
            break;
        }
    }
    s.basis_degree = Lb;
    s.cutoff_complete = s.eigenvalues(s.eigenvalues.size() - 1) > limit;
    if (!s.cutoff_complete) throw NumericalError("angular_spectrum: cutoff-completeness test failed");
    // Keep eigenvalues well inside the retained shells.
    const double keep = (Lb - 2.0) * (Lb - 1.0);
    std::vector<double> mus;
    std::vector<int> mult;
    for (int i = 0; i < s.eigenvalues.size(); ++i)
        if (s.eigenvalues[i] < keep) {
            mus.push_back(s.eigenvalues[i]);
            mult.push_back(1);
        }
    s.entries = group(mus, op.n, mult);
    finish(s);
    return s;
}

EulerGreen::EulerGreen(cdouble nu_) : nu(nu_) {
    if (nu.real() < 0.0 || (nu.real() == 0.0 && nu.imag() > 0.0))
        throw ValidationError("EulerGreen: need Re nu >= 0 or i nu > 0");
}

cdouble EulerGreen::phi(double r) const {
    if (r < 1.0) return 0.0;
    const double lr = std::log(r);
    if (std::abs(nu) < 1e-12) return std::sqrt(r) * lr;
    return std::sqrt(r) * (std::exp(nu * lr) - std::exp(-nu * lr)) / (2.0 * nu);
}

cdouble EulerGreen::psi(double r) const { return std::sqrt(r) * std::exp(-nu * std::log(r)); }

std::string EulerGreen::label() const {
    std::ostringstream os;
    os << "R_nu[" << nu.real() << (nu.imag() < 0 ? "-" : "+") << std::abs(nu.imag()) << "i]";
    return os.str();
}

EulerApply euler_green_apply(const EulerGreen& g, const RadialGrid& grid, const VecC& v, double tail_power) {
    if (grid.rmin_edge() < 1.0 - 1e-14) throw ValidationError("euler_green_apply: grid must start at r >= 1");
    if (v.size() != grid.size()) throw ValidationError("euler_green_apply: data length differs from grid");
    EulerApply out;
    out.u = assemble(grid, g).A * v;
    if (tail_power > 0.0) {
        const double R = grid.r()[grid.size() - 1];
        const cdouble e = tail_power - 1.5 + g.nu;
        if (e.real() <= 0.0) {
            out.tail_divergent = true;
            return out;
        }
        const cdouble tail = v[grid.size() - 1] * std::pow(R, tail_power) *
                             std::exp((1.5 - tail_power) * std::log(R) - g.nu * std::log(R)) / e;
        for (int i = 0; i < grid.size(); ++i) out.u[i] += g.phi(grid.r()[i]) * tail;
    }
    return out;
}

double euler_residual(const EulerGreen& g, const RadialGrid& grid, const VecC& u, const VecC& v, double margin) {
    const int n = grid.size();
    const double h = grid.r()[1] - grid.r()[0];
    const cdouble c = g.nu * g.nu - 0.25;
    double s = 0.0;
    // Fourth-order stencil: its truncation is subdominant to the O(h^2) quadrature error in u.
    for (int i = 2; i < n - 2; ++i) {
        const double r = grid.r()[i];
        if (r - grid.r()[0] < margin || grid.r()[n - 1] - r < margin) continue;
        const cdouble d2 = (-u[i + 2] + 16.0 * u[i + 1] - 30.0 * u[i] + 16.0 * u[i - 1] - u[i - 2]) / (12.0 * h * h);
        const cdouble res = -d2 + c * u[i] / (r * r) - v[i];
        s += h * std::norm(res);
    }
    return std::sqrt(s);
}

double euler_im_min_eigenvalue(const EulerGreen& g, const RadialGrid& grid) {
    const KernelOperator K = assemble(grid, g);
    const VecR sw = grid.w().cwiseSqrt();
    MatR S = sw.asDiagonal() * K.kernel().imag() * sw.asDiagonal();
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatR> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

Parametrix parametrix_assemble(const NuSpectrum& spectrum, int nodes, double r_in, double r_max, int max_sectors) {
    if (!(r_in < 1.0) || !(r_max > 2.0)) throw ValidationError("parametrix: need r_in < 1 and r_max > 2");
    Parametrix p;
    p.grid = RadialGrid::uniform(nodes, r_in, r_max);
    const int n = nodes;
    const VecR& r = p.grid.r();
    const double h = r[1] - r[0];
    p.chi1.resize(n);
    p.chi2.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = smoothstep(r[i] - 1.0);
        p.chi1[i] = std::cos(0.5 * kPi * t);
        p.chi2[i] = std::sin(0.5 * kPi * t);
        p.partition_residual = std::max(p.partition_residual, std::abs(p.chi1[i] * p.chi1[i] + p.chi2[i] * p.chi2[i] - 1.0));
    }
    const int total = static_cast<int>(spectrum.entries.size());
    const int used = std::min(total, max_sectors);
    p.min_im = std::numeric_limits<double>::infinity();
    p.min_im_exterior = std::numeric_limits<double>::infinity();
    auto sector = [&](const NuEntry& e, MatC& inner) {
        // Interior: Dirichlet finite differences for -d^2/dr^2 + (nu^2 - 1/4) r^{-2}.
        MatC T = MatC::Zero(n, n);
        const cdouble c = e.nu * e.nu - 0.25;
        for (int i = 0; i < n; ++i) {
            T(i, i) = 2.0 / (h * h) + c / (r[i] * r[i]);
            if (i > 0) T(i, i - 1) = -1.0 / (h * h);
            if (i + 1 < n) T(i, i + 1) = -1.0 / (h * h);
        }
        MatC Ri = (T - kI * MatC::Identity(n, n)).lu().inverse();
        inner = p.chi1.asDiagonal() * Ri * p.chi1.asDiagonal();
        EulerGreen g(e.nu);
        MatC G = inner;
        for (int i = 0; i < n; ++i) {
            if (p.chi2[i] == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                if (p.chi2[j] == 0.0) continue;
                G(i, j) += p.chi2[i] * g.value(r[i], r[j]) * h * p.chi2[j];
            }
        }
        return G;
    };
    for (int k = 0; k < used; ++k) {
        const NuEntry& e = spectrum.entries[k];
        MatC inner;
        MatC G = sector(e, inner);
        auto min_eig = [](const MatC& A) {
            MatR S = A.imag();
            S = 0.5 * (S + S.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<MatR> es(S, Eigen::EigenvaluesOnly);
            return es.eigenvalues()(0);
        };
        p.min_im = std::min(p.min_im, min_eig(G));
        p.min_im_exterior = std::min(p.min_im_exterior, min_eig(G - inner));
        p.sectors.push_back(G);
        p.interior.push_back(inner);
        p.nus.push_back(e.nu);
        p.multiplicity.push_back(e.multiplicity);
    }
    if (used < total) {
        MatC inner;
        const MatC G = sector(spectrum.entries[used], inner);
        VecR d(n);
        for (int i = 0; i < n; ++i) d[i] = std::pow(japanese(r[i]), -1.0);
        MatC B = d.asDiagonal() * G * d.asDiagonal();
        Eigen::JacobiSVD<MatC> svd(B);
        p.omitted_sector_norm = svd.singularValues()(0);
    }
    return p;
}

MatC parametrix_adjoint(const Parametrix& p, int sector) {
    if (sector < 0 || sector >= static_cast<int>(p.sectors.size()))
        throw ValidationError("parametrix_adjoint: sector out of range");
    return p.sectors[sector].adjoint();
}

ResonanceBound resonance_bound(const NuSpectrum& spectrum) {
    ResonanceBound b;
    b.s_a = spectrum.s_a;
    b.d_a = spectrum.d_a;
    std::ostringstream os;
    os << "resonance space dimension <= d_a = " << b.d_a << "; resonance states lie in L^2_{-s} for s > "
       << (b.s_a - 1.0) << " with s_a = " << b.s_a;
    if (!spectrum.hardy_ok) os << "; below the Hardy limit (oscillatory regime, bound not asserted)";
    if (spectrum.borderline) os << "; borderline s_a = 1";
    b.statement = os.str();
    return b;
}

AngularOperator angular_from_multipole(const EffectiveMultipole& em, double factor) {
    AngularOperator op;
    op.n = 3;
    op.m = static_cast<int>(em.dipole_matrix.size());
    if (op.m == 0) throw ValidationError("angular_from_multipole: empty dipole matrix");
    op.L = 1;
    op.coeffs.assign(4, MatC::Zero(op.m, op.m));
    const double s = factor * std::sqrt(4.0 * kPi / 3.0);
    for (int k = 0; k < op.m; ++k)
        for (int l = 0; l < op.m; ++l) {
            const Eigen::Vector3d& d = em.dipole_matrix[k][l];
            op.coeffs[1](k, l) = s * d.y();
            op.coeffs[2](k, l) = s * d.z();
            op.coeffs[3](k, l) = s * d.x();
        }
    return op;
}

}  // namespace thr
