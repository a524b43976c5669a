#pragma once

#include <cstdint>
#include <vector>

#include "threshold/common.hpp"

namespace thr {

inline constexpr int kMaxModelDim = 512;
inline constexpr double kPinvCutoff = 1e-12;

// Finite-dimensional reduction data: H on G, S : H_aux -> G injective.
struct ReductionSetup {
    MatC H;         // Hermitian, dim G <= kMaxModelDim
    MatC S;         // dim G x dim H_aux
    MatC StS_inv;   // (S*S)^{-1}
    MatC Pi;        // S (S*S)^{-1} S*
    MatC PiPrime;   // 1 - Pi
    MatC Qc;        // orthonormal basis of ran Pi'
    MatC Hprime;    // Pi' H Pi'
    int dim_kernel_StS = 0;  // directions removed by multiple_cluster_setup

    int dimG() const { return static_cast<int>(H.rows()); }
    int dimAux() const { return static_cast<int>(S.cols()); }
    // T = S (S*S)^{-1}, the bounded form of (S S*)^{-1} S.
    MatC T() const { return S * StS_inv; }
    // Eigenvalues of H' restricted to ran Pi'.
    VecR reduced_spectrum() const;
};

ReductionSetup make_setup(const MatC& H, const MatC& S);

struct GrushinBlocks {
    cdouble z;
    MatC Rp;      // R'(z) = (H' - z)^{-1} Pi'
    MatC E;       // R'(z)
    MatC Eplus;   // S - R' H S
    MatC Eminus;  // S* - S* H R'
    MatC EH;      // S* (z - H + H R' H) S
};

GrushinBlocks build_blocks(const ReductionSetup& setup, cdouble z);

// Reduced resolvent (H' - z)^{-1} Pi' computed on an orthonormal basis of ran Pi'.
MatC reduced_resolvent(const ReductionSetup& setup, cdouble z);

struct GrushinResolvent {
    MatC R;
    double condition_EH = 0.0;
    bool ill_conditioned = false;  // condition > 1e12
};

// E - E+ E_H^{-1} E-.
GrushinResolvent resolvent_via_grushin(const GrushinBlocks& blocks);

// B(z) = [[Pi H R', Pi' H T], [0, 0]] on G + H_aux, returns ||B^3||.
double check_nilpotent_B(const ReductionSetup& setup, cdouble z, double* normB = nullptr);

// Smallest eigenvalue of Im E_H(z) / Im z - S*S.
double herglotz_margin(const ReductionSetup& setup, const GrushinBlocks& blocks);

struct Eigentransform {
    int dim_ker_H = 0;   // dim ker(H - lambda)
    int dim_ker_EH = 0;  // numerical rank deficiency of E_H(lambda)
    double max_roundtrip = 0.0;      // max ||E+(lambda) T* phi - phi||
    double max_EH_residual = 0.0;    // max ||E_H(lambda) T* phi||
    double min_singular_EH = 0.0;
    MatC phis;  // orthonormal basis of ker(H - lambda)
    MatC fs;    // T* phis
};

Eigentransform eigentransform(const ReductionSetup& setup, double lambda, double tol = 1e-8);

// S = (S1, S2); when F1 and F2 intersect the auxiliary space is restricted
// to the orthogonal complement of ker(S*S).
ReductionSetup multiple_cluster_setup(const MatC& H, const MatC& S1, const MatC& S2);

// 1 - U1 = dE_H/dz at a real lambda0 (outside sigma(H')) for a two-channel setup,
// together with the identity <(1-U1)f, f> = ||S f||^2 + ||R'(lambda0) H S f||^2.
struct PositivityCertificate {
    MatC one_minus_U1;
    double min_eigenvalue = 0.0;
    double identity_residual = 0.0;   // max over probe vectors, relative
    double contour_residual = 0.0;    // vs Cauchy-integral derivative of E_H
};

PositivityCertificate positivity_1_minus_U1(const ReductionSetup& setup, double lambda0,
                                            std::uint64_t seed = 1, int probes = 8);

struct GrushinSuiteReport {
    int trials = 0;
    double max_identity = 0.0;
    double min_herglotz = 0.0;
    double max_nilpotent = 0.0;
    double max_adjoint = 0.0;
    double max_T_identity = 0.0;
    double max_projection = 0.0;
    double max_roundtrip = 0.0;
    bool kernel_dims_match = true;
    double seconds = 0.0;
};

// Randomized models (dim <= max_dim, rank S <= max_rank, 5 nonreal z each) plus
// planted-eigenvalue eigentransform checks.
GrushinSuiteReport grushin_suite(std::uint64_t seed, int trials, int max_dim = 40,
                                 int max_rank = 5);

}  // namespace thr
