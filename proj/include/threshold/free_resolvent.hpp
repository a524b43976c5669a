#pragma once

#include <memory>
#include <string>
#include <vector>

#include "threshold/common.hpp"
#include "threshold/radial_grid.hpp"

namespace thr {

// Radial kernel of the form k(r, r') = sum_t a_t(r_<) b_t(r_>).
class RadialKernel {
public:
    virtual ~RadialKernel() = default;
    virtual int terms() const = 0;
    virtual cdouble a(int t, double r) const = 0;
    virtual cdouble b(int t, double r) const = 0;
    // Factors rescaled about a centre c (product a*b unchanged); kernels whose
    // factors grow exponentially override this to stay in range.
    virtual cdouble a_scaled(int t, double r, double c) const { (void)c; return a(t, r); }
    virtual cdouble b_scaled(int t, double r, double c) const { (void)c; return b(t, r); }
    // Pointwise value, numerically stable for all r, r'.
    virtual cdouble value(double r, double rp) const;
    // Exponential growth rate of |a_t|; large rates switch assembly to value().
    virtual double growth_rate() const { return 0.0; }
    virtual std::string label() const = 0;
};

// Reduced partial-wave kernel of G0: r_<^{l+1} r_>^{-l} / (2l+1).
class PartialWaveG0 : public RadialKernel {
public:
    explicit PartialWaveG0(int ell);
    int terms() const override { return 1; }
    cdouble a(int, double r) const override;
    cdouble b(int, double r) const override;
    std::string label() const override;
    int ell;
};

// Reduced l = 0 kernel of G_j: coefficient of k^j in sin(k r_<) e^{i k r_>} / k.
class ExpansionKernelL0 : public RadialKernel {
public:
    explicit ExpansionKernelL0(int j);
    int terms() const override { return static_cast<int>(an_.size()); }
    cdouble a(int t, double r) const override;
    cdouble b(int t, double r) const override;
    std::string label() const override;
    int j;

private:
    std::vector<int> an_, bp_;
    std::vector<double> coef_;
};

// Reduced l = 0 free resolvent sin(k r_<) e^{i k r_>} / k, k = sqrt(z), Im k >= 0.
class FreeResolventL0 : public RadialKernel {
public:
    explicit FreeResolventL0(cdouble z);
    int terms() const override { return 1; }
    cdouble a(int, double r) const override;
    cdouble b(int, double r) const override;
    cdouble a_scaled(int, double r, double c) const override;
    cdouble b_scaled(int, double r, double c) const override;
    cdouble value(double r, double rp) const override;
    double growth_rate() const override { return k.imag(); }
    std::string label() const override;
    cdouble z, k;
};

// Dense discretization acting on nodal values (quadrature weights included).
struct KernelOperator {
    MatC A;     // n x n, (K f)_i = sum_j A_ij f_j
    VecR w;     // quadrature weights
    int m = 1;  // channel copies, channel-major block layout
    std::string label;

    int n() const { return static_cast<int>(w.size()); }
    // Kernel samples A W^{-1}; exactly (complex-)symmetric.
    MatC kernel() const;
    // Block-diagonal operator on m channels.
    MatC block() const;
};

// Product-integrated, symmetrized discretization of a semi-separable kernel.
KernelOperator assemble(const RadialGrid& grid, const RadialKernel& kernel, int m = 1);

// Scalar 3D kernel i^j |x-y|^{j-1} / (4 pi j!).
cdouble green_kernel(int j, const Eigen::Vector3d& x, const Eigen::Vector3d& y);

KernelOperator partial_wave_G0(int ell, const RadialGrid& grid, int m = 1);
KernelOperator expansion_coefficient(int j, const RadialGrid& grid, int m = 1);
KernelOperator exact_free_resolvent(cdouble z, const RadialGrid& grid, int m = 1);

// Operator norm of <r>^{-s} K <r>^{-s} on reduced L^2.
double weighted_norm(const MatC& A, const RadialGrid& grid, double s);

// Weighted norm of r0(z) - sum_{j<=N} z^{j/2} G_j.
double expansion_residual(cdouble z, int N, double s, const RadialGrid& grid);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> abs_z, residual;
};

// Log-log slope of expansion_residual along z = -10^{-k}, k = kmin..kmax.
SlopeFit expansion_slope(int N, double s, const RadialGrid& grid, int kmin = 3, int kmax = 7);

// Least-squares line y = slope * x + intercept.
void fit_line(const std::vector<double>& x, const std::vector<double>& y, double& slope,
              double& intercept, double* r2 = nullptr);

}  // namespace thr
