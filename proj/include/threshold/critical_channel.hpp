#pragma once

#include <string>
#include <vector>

#include "threshold/common.hpp"
#include "threshold/free_resolvent.hpp"
#include "threshold/model_setup.hpp"
#include "threshold/radial_grid.hpp"

namespace thr {

// -Laplace_theta + q on S^{n-1} with m channels. q(theta) = sum_c q_c Y_c(theta)
// in real spherical harmonics, c = l^2 + l + mm (n = 3). For n != 3 only the
// constant term is accepted.
struct AngularOperator {
    int n = 3;
    int m = 1;
    int L = 0;                    // degree of q
    std::vector<MatC> coeffs;     // (L+1)^2 entries, each m x m Hermitian

    static AngularOperator constant(int n, const MatC& q);
    static AngularOperator free(int n, int m);
    void validate() const;
    bool is_constant() const;
};

struct NuEntry {
    double mu = 0.0;
    cdouble nu;
    int multiplicity = 0;
};

struct NuSpectrum {
    int n = 3, m = 1;
    std::vector<NuEntry> entries;   // ascending mu, grouped to 1e-8
    double nu0 = 0.0;               // min Re nu
    double s_a = 1.0;               // 1 + nu0
    std::vector<double> sigma_plus; // distinct nu in (0, 1]
    int d_a = 0;                    // sum of multiplicities over sigma_plus
    bool hardy_ok = true;           // min mu > -1/4
    bool borderline = false;        // nu0 = 0 (s_a = 1)
    int basis_degree = 0;           // harmonic cutoff used
    bool cutoff_complete = true;
    MatC eigenvectors;              // Galerkin eigenvectors (n = 3 general q)
    VecR eigenvalues;
};

// nu^2 = mu + (n-2)^2/4; nu >= 0, or nu = -i sqrt(-nu^2) below the limit.
cdouble nu_of(double mu, int n);

NuSpectrum angular_spectrum(const AngularOperator& op, int max_degree = 40);

// Euler Green's function R_nu(r, r') = phi(r_<) psi(r_>) on [1, inf).
class EulerGreen : public RadialKernel {
public:
    explicit EulerGreen(cdouble nu);
    int terms() const override { return 1; }
    cdouble a(int, double r) const override { return phi(r); }
    cdouble b(int, double r) const override { return psi(r); }
    std::string label() const override;
    cdouble phi(double r) const;
    cdouble psi(double r) const;
    cdouble nu;
};

// u = R_nu v on the grid (first edge >= 1). With tail_power p > 0 the data is
// continued as v(R) (R / r)^p beyond the grid and its contribution integrated
// analytically.
struct EulerApply {
    VecC u;
    bool tail_divergent = false;
};
EulerApply euler_green_apply(const EulerGreen& g, const RadialGrid& grid, const VecC& v,
                             double tail_power = 0.0);

// L^2 norm of -u'' + (nu^2 - 1/4) r^{-2} u - v on a uniform grid (five-point second
// difference), over nodes at least `margin` from either end to skip the boundary layer.
double euler_residual(const EulerGreen& g, const RadialGrid& grid, const VecC& u, const VecC& v,
                      double margin = 0.5);

// Smallest eigenvalue of Im R_nu in the quadrature inner product.
double euler_im_min_eigenvalue(const EulerGreen& g, const RadialGrid& grid);

struct Parametrix {
    RadialGrid grid;                // uniform grid on [r_in, R_max]
    std::vector<MatC> sectors;      // per distinct nu: G_+ restricted to the sector
    std::vector<MatC> interior;     // chi1 (h - i)^{-1} chi1 part per sector
    std::vector<cdouble> nus;
    std::vector<int> multiplicity;
    VecR chi1, chi2;
    double partition_residual = 0.0;   // max |chi1^2 + chi2^2 - 1|
    double min_im = 0.0;               // smallest eigenvalue of Im G_+
    double min_im_exterior = 0.0;      // smallest eigenvalue of Im G_+ - Im(interior)
    double omitted_sector_norm = 0.0;  // weighted norm of the first dropped sector
};

// Exterior cutoff ramps from 0 at r = 1 to 1 at r = 2.
Parametrix parametrix_assemble(const NuSpectrum& spectrum, int nodes = 200, double r_in = 0.5,
                               double r_max = 20.0, int max_sectors = 8);

// Adjoint kernel G_+^* of a sector.
MatC parametrix_adjoint(const Parametrix& p, int sector);

struct ResonanceBound {
    double s_a = 0.0;
    int d_a = 0;
    std::string statement;
};
ResonanceBound resonance_bound(const NuSpectrum& spectrum);

// r^{-2} coefficient from a dipole-type effective potential: q(R^) = factor R^ . d_kl.
AngularOperator angular_from_multipole(const EffectiveMultipole& em, double factor);

// Dimension of degree-l spherical harmonics on S^{n-1}.
int harmonic_dimension(int l, int n);

}  // namespace thr
