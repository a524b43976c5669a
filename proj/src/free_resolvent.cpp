#include "threshold/free_resolvent.hpp"

#include <cmath>

#include "threshold/kernels.hpp"
#include "threshold/parallel.hpp"

namespace thr {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// Growth exponents beyond this are assembled from pointwise values.
constexpr double kSafeExponent = 600.0;

}  // namespace

cdouble RadialKernel::value(double r, double rp) const {
    const double lo = std::min(r, rp), hi = std::max(r, rp);
    cdouble s = 0.0;
    for (int t = 0; t < terms(); ++t) s += a(t, lo) * b(t, hi);
    return s;
}

PartialWaveG0::PartialWaveG0(int ell_) : ell(ell_) {
    if (ell < 0) throw ValidationError("partial wave index must be >= 0");
}
cdouble PartialWaveG0::a(int, double r) const { return std::pow(r, ell + 1) / (2.0 * ell + 1.0); }
cdouble PartialWaveG0::b(int, double r) const { return std::pow(r, -ell); }
std::string PartialWaveG0::label() const { return "G0[l=" + std::to_string(ell) + "]"; }

ExpansionKernelL0::ExpansionKernelL0(int j_) : j(j_) {
    if (j < 0) throw ValidationError("expansion index must be >= 0");
    for (int n = 0; 2 * n <= j; ++n) {
        const int p = j - 2 * n;
        an_.push_back(2 * n + 1);
        bp_.push_back(p);
        coef_.push_back(((n % 2) ? -1.0 : 1.0) / (factorial(2 * n + 1) * factorial(p)));
    }
}
cdouble ExpansionKernelL0::a(int t, double r) const { return coef_[t] * std::pow(r, an_[t]); }
cdouble ExpansionKernelL0::b(int t, double r) const {
    return std::pow(kI * r, bp_[t]);
}
std::string ExpansionKernelL0::label() const { return "G" + std::to_string(j) + "[l=0]"; }

FreeResolventL0::FreeResolventL0(cdouble z_) : z(z_), k(sqrt_upper(z_)) {
    if (std::abs(z.imag()) == 0.0 && z.real() > 0.0)
        throw ValidationError("free resolvent: z on the positive half-line");
}
cdouble FreeResolventL0::a(int, double r) const {
    if (k == cdouble(0.0)) return r;
    return std::sin(k * r) / k;
}
cdouble FreeResolventL0::b(int, double r) const { return std::exp(kI * k * r); }
cdouble FreeResolventL0::a_scaled(int, double r, double c) const {
    if (k == cdouble(0.0)) return r;
    const double kap = k.imag();
    return (std::exp(kI * k * r - kap * c) - std::exp(-kI * k * r - kap * c)) / (2.0 * kI * k);
}
cdouble FreeResolventL0::b_scaled(int, double r, double c) const {
    return std::exp(kI * k * r + k.imag() * c);
}
cdouble FreeResolventL0::value(double r, double rp) const {
    const double lo = std::min(r, rp), hi = std::max(r, rp);
    if (k == cdouble(0.0)) return lo;
    if (k.imag() * hi < kSafeExponent) return a(0, lo) * b(0, hi);
    return (std::exp(kI * k * (lo + hi)) - std::exp(kI * k * (hi - lo))) / (2.0 * kI * k);
}
std::string FreeResolventL0::label() const { return "r0[l=0]"; }

MatC KernelOperator::kernel() const { return A * w.cwiseInverse().asDiagonal(); }

MatC KernelOperator::block() const {
    if (m == 1) return A;
    const int nn = n();
    MatC B = MatC::Zero(nn * m, nn * m);
    for (int c = 0; c < m; ++c) B.block(c * nn, c * nn, nn, nn) = A;
    return B;
}

KernelOperator assemble(const RadialGrid& grid, const RadialKernel& kernel, int m) {
    const int n = grid.size();
    const int T = kernel.terms();
    const VecR& r = grid.r();
    const VecR& w = grid.w();
    const bool safe = kernel.growth_rate() * grid.rmax() < kSafeExponent;

    std::vector<VecC> av(T), bv(T);
    if (safe) {
        for (int t = 0; t < T; ++t) {
            av[t].resize(n);
            bv[t].resize(n);
            for (int i = 0; i < n; ++i) {
                av[t][i] = kernel.a(t, r[i]);
                bv[t][i] = kernel.b(t, r[i]);
            }
        }
    }

    // Row-major scratch so each row is contiguous for the SIMD kernels.
    std::vector<VecC> rows(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        std::vector<double> lower(n), upper(n);
        grid.lower_row(i, lower.data());
        for (int j = 0; j < n; ++j) upper[j] = w[j] - lower[j];
        VecC row = VecC::Zero(n);
        if (safe) {
            for (int t = 0; t < T; ++t)
                kernels::separable_row(av[t][i], bv[t][i], av[t].data(), bv[t].data(), lower.data(),
                                       upper.data(), row.data(), static_cast<std::size_t>(n));
        } else {
            const int blk = grid.block_of(i);
            const double c = r[i];
            for (int j = 0; j < n; ++j) {
                if (grid.block_of(j) != blk) {
                    row[j] = kernel.value(r[i], r[j]) * w[j];
                    continue;
                }
                cdouble s = 0.0;
                for (int t = 0; t < T; ++t)
                    s += kernel.b_scaled(t, r[i], c) * lower[j] * kernel.a_scaled(t, r[j], c) +
                         kernel.a_scaled(t, r[i], c) * upper[j] * kernel.b_scaled(t, r[j], c);
                row[j] = s;
            }
        }
        rows[ii] = std::move(row);
    });

    KernelOperator op;
    op.w = w;
    op.m = m;
    op.label = kernel.label();
    op.A.resize(n, n);
    for (int i = 0; i < n; ++i) op.A.row(i) = rows[i].transpose();
    // Symmetrize in the quadrature inner product: M = (A + W^{-1} A^T W) / 2.
    MatC S = op.A;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) S(i, j) = 0.5 * (op.A(i, j) + op.A(j, i) * w[j] / w[i]);
    op.A = std::move(S);
    return op;
}

cdouble green_kernel(int j, const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
    if (j < 0) throw ValidationError("green_kernel: j must be >= 0");
    const double d = (x - y).norm();
    if (j == 0 && d == 0.0)
        throw ValidationError("green_kernel: j = 0 kernel is singular at x = y");
    return std::pow(kI, j) * std::pow(d, j - 1) / (4.0 * kPi * factorial(j));
}

KernelOperator partial_wave_G0(int ell, const RadialGrid& grid, int m) {
    return assemble(grid, PartialWaveG0(ell), m);
}

KernelOperator expansion_coefficient(int j, const RadialGrid& grid, int m) {
    return assemble(grid, ExpansionKernelL0(j), m);
}

KernelOperator exact_free_resolvent(cdouble z, const RadialGrid& grid, int m) {
    return assemble(grid, FreeResolventL0(z), m);
}

double weighted_norm(const MatC& A, const RadialGrid& grid, double s) {
    const int n = grid.size();
    VecR left(n), right(n);
    for (int i = 0; i < n; ++i) {
        const double d = std::pow(japanese(grid.r()[i]), -s);
        left[i] = std::sqrt(grid.w()[i]) * d;
        right[i] = d / std::sqrt(grid.w()[i]);
    }
    MatC B = left.asDiagonal() * A * right.asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatC> es(B.adjoint() * B, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double expansion_residual(cdouble z, int N, double s, const RadialGrid& grid) {
    if (N < 0) throw ValidationError("expansion order must be >= 0");
    if (!(s > N + 0.5)) throw ValidationError("expansion residual requires s > N + 1/2");
    const cdouble k = sqrt_upper(z);
    MatC R = exact_free_resolvent(z, grid).A;
    for (int j = 0; j <= N; ++j) R -= std::pow(k, j) * expansion_coefficient(j, grid).A;
    return weighted_norm(R, grid, s);
}

void fit_line(const std::vector<double>& x, const std::vector<double>& y, double& slope,
              double& intercept, double* r2) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw ValidationError("fit_line needs >= 2 matching points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    slope = sxy / sxx;
    intercept = my - slope * mx;
    if (r2) *r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
}

SlopeFit expansion_slope(int N, double s, const RadialGrid& grid, int kmin, int kmax) {
    SlopeFit fit;
    std::vector<double> lx, ly;
    const int count = kmax - kmin + 1;
    fit.abs_z.resize(count);
    fit.residual.resize(count);
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t idx) {
        const double az = std::pow(10.0, -(kmin + static_cast<int>(idx)));
        fit.abs_z[idx] = az;
        fit.residual[idx] = expansion_residual(cdouble(-az, 0.0), N, s, grid);
    });
    for (int i = 0; i < count; ++i) {
        lx.push_back(std::log(fit.abs_z[i]));
        ly.push_back(std::log(fit.residual[i]));
    }
    fit_line(lx, ly, fit.slope, fit.intercept);
    return fit;
}

}  // namespace thr
