#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "threshold/common.hpp"
#include "threshold/free_resolvent.hpp"
#include "threshold/radial_grid.hpp"

namespace thr {

enum class DecayClass { Fast, CoulombAttractive, CoulombRepulsive, Critical };
std::string to_string(DecayClass d);

// P = P0 + U on the l = 0 sector in reduced radial coordinates u = r f,
// with m channels. Vectors are channel-major: v[k * n + i].
struct EffectiveOperator {
    RadialGrid grid = RadialGrid::default_grid();
    int m = 1;
    std::vector<MatR> W;          // local m x m potential per node (real symmetric)
    MatC profiles;                // separable part: (n m) x p nodal profiles g
    MatC coupling;                // p x p Hermitian; U_nl = g coupling <g, .>
    std::vector<MatR> U1;         // first z-coefficient of U(z), local; empty = 0
    DecayClass decay = DecayClass::Fast;
    double rho0 = 3.0;            // decay exponent of W
    // Decay exponent t of the threshold eigenstates, when known (t > 3/2 required
    // for the eigenvalue leading terms).
    std::optional<double> eigen_decay_t;

    int n() const { return grid.size(); }
    int dim() const { return n() * m; }
    // Quadrature weights repeated per channel.
    VecR weights() const;
    // Matrices acting on nodal values.
    MatC U() const;
    MatC U1_matrix() const;
    bool has_U1() const { return !U1.empty(); }
    // Sum_i w_i conj(f_i) g_i over all channels.
    cdouble inner(const VecC& f, const VecC& g) const;
    void validate() const;
};

// Local potential from a radial profile times a constant channel matrix.
EffectiveOperator local_operator(const RadialGrid& grid, const std::function<double(double)>& profile,
                                 const MatR& channel_matrix = MatR::Identity(1, 1));

// Separable fixture U = -sum g_a (Gamma^{-1})_{ab} <g_b, .>, Gamma = <g, G0 g>; its
// null space is exactly span{G0 g_a}.
EffectiveOperator separable_operator(const RadialGrid& grid, const MatC& profiles, int m = 1);

// Remove the component of g along r (discrete pairing), so <r, g> = 0.
VecC orthogonalize_to_r(const RadialGrid& grid, const VecC& g, const VecC& helper);

// Lippmann-Schwinger operator K = G0 U.
struct LippmannSchwinger {
    KernelOperator K;
    double weight_s = 1.0;
    double tail_estimate = 0.0;
};
LippmannSchwinger lippmann_schwinger(const EffectiveOperator& op);

struct NullSpace {
    int mu = 0;
    MatC states;             // nm x mu, normalized in the weighted norm
    VecR singular_values;    // of the weighted 1 + K, ascending
    double cutoff = 0.0;
    bool near_threshold = false;
};
NullSpace null_space(const EffectiveOperator& op);

// c_i(v) = int r (U v)_i dr (the 3D pairing (2 sqrt(pi))^{-1} <1, (U v)_i>).
VecC c_vector(const EffectiveOperator& op, const VecC& v);
// Same with |U v| (scale for zero tests).
VecR c_vector_abs(const EffectiveOperator& op, const VecC& v);

enum class ThresholdCase { Regular, Exceptional1, Exceptional2, Exceptional3 };
std::string to_string(ThresholdCase c);

struct ThresholdReport {
    ThresholdCase kase = ThresholdCase::Regular;
    int mu = 0, kappa = 0, m = 1;
    MatC states;           // K-space basis
    MatC c_matrix;         // m x mu, columns c(states_j)
    MatC resonant;         // states spanning the complement of ker C
    MatC eigen;            // L^2 eigenstates (ker C)
    MatC normalized;       // resonance basis with Gram(c) = I
    MatC normalized_c;     // m x kappa
    bool near_threshold = false;
    bool ill_conditioned_c = false;
    double tail_estimate = 0.0;
    std::vector<std::vector<double>> tail_coefficients;  // per normalized/eigen state, per channel
};

ThresholdReport classify(const EffectiveOperator& op);

struct NormalizedResonances {
    MatC psi;    // nm x kappa
    MatC c;      // m x kappa, c^* c = I
    MatC M0;
    double condition = 0.0;
    bool ill_conditioned = false;  // condition of C^*C > 1e10
};
NormalizedResonances normalize_resonances(const EffectiveOperator& op, const MatC& states);

// -<1, (U v)_k>/(4 pi) in 3D terms, per channel.
std::vector<double> tail_coefficient(const EffectiveOperator& op, const VecC& v);

struct TailFit {
    std::vector<double> fitted, predicted;  // per channel
    double r2 = 1.0;
    double max_rel_error = 0.0;
    bool poor_fit = false;
};
// Fits v_k(r) r (3D) over the outer third of the grid against a + b / r.
TailFit verify_tail(const EffectiveOperator& op, const VecC& v);

// Eigenvalues of K = G0 U.
VecC birman_schwinger_spectrum(const EffectiveOperator& op);
// Number of eigenvalues of K below -1 (bound states of an attractive local U).
int bound_state_count(const EffectiveOperator& op);
// Factor g such that g U has a threshold null vector through the most negative
// eigenvalue of K.
double critical_coupling(const EffectiveOperator& op);
EffectiveOperator scaled(const EffectiveOperator& op, double factor);

// Depth V0 of -V0 profile(r) where the bound-state count first exceeds zero,
// bisected to relative tolerance tol.
double critical_depth_bisection(const RadialGrid& grid, const std::function<double(double)>& profile,
                                double lo, double hi, double tol = 1e-6);

// Zero-energy s-wave ODE u'' = W(r) u, u(0) = 0, u'(0) = 1, integrated to r_end.
struct ZeroEnergySolution {
    double u = 0.0, du = 0.0;
};
ZeroEnergySolution shoot_zero_energy(const std::function<double(double)>& W, double r_end,
                                     const std::vector<double>& breaks = {});
// Depth where u'(r_end) of -V0 profile changes sign (first critical depth).
double shooting_critical_depth(const std::function<double(double)>& profile, double r_end,
                               double lo, double hi, const std::vector<double>& breaks = {});

}  // namespace thr
