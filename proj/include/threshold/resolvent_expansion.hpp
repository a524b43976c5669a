#pragma once

#include <string>
#include <vector>

#include "threshold/common.hpp"
#include "threshold/threshold_classifier.hpp"

namespace thr {

// W(z) = 1 + r0(z) U(z) with U(z) = U + z U1, and its expansion coefficients.
struct WOperator {
    cdouble z;
    MatC W;     // W(z)
    MatC W0;    // 1 + G0 U
    MatC W1;    // G1 U
    MatC W2;    // G2 U + G0 U1
};
WOperator w_operator(const EffectiveOperator& op, cdouble z);

struct InnerGrushin {
    MatC S;       // nm x mu, basis with <-U phi_i, phi_j> = delta_ij
    MatC Sstar;   // mu x nm, rows <-U phi_j, .>
    MatC Q;       // S Sstar
    MatC D0;      // (Q' W0 Q' + Q)^{-1} Q'
    int kappa = 0;                 // resonant directions come first in S
    double gram_min_eigenvalue = 0.0;
    double orthonormality = 0.0;   // ||Sstar S - I||
    double idempotency = 0.0;      // ||Q^2 - Q||
};
InnerGrushin inner_grushin(const EffectiveOperator& op, const ThresholdReport& report);

struct LeadingMatrices {
    MatC E1;      // vE_{-+,1} = -Sstar W1 S
    MatC E2;      // vE_{-+,2} = -Sstar W2 S
    MatC B0;      // -i E1 on the resonant corner (kappa x kappa)
    MatC E2_eigen;  // E2 on the eigen block
    double B0_min_eigenvalue = 0.0;
    double E2_min_eigenvalue = 0.0;
    double off_corner = 0.0;   // largest |E1| entry outside the kappa x kappa corner
    bool positivity_violation = false;
};
LeadingMatrices leading_e_minus_plus(const EffectiveOperator& op, const InnerGrushin& inner);

struct LeadingTerm {
    ThresholdCase kase = ThresholdCase::Regular;
    double power = 0.0;   // 0, -1/2 or -1
    MatC coefficient;     // nm x nm acting on nodal values
    // Leading approximation of E_H(lambda0 + z)^{-1} applied to f.
    VecC apply(cdouble z, const VecC& f) const;
};
LeadingTerm leading_resolvent(const EffectiveOperator& op, const ThresholdReport& report);

// E_H(lambda0 + z)^{-1} = -(P(z) - z)^{-1}, two independent routes:
//   route 1: -(1 + r0 U(z))^{-1} r0
//   route 2: -(r0 - r0 (1 + U(z) r0)^{-1} U(z) r0)
MatC eh_inverse(const EffectiveOperator& op, cdouble z, int route = 1);
VecC eh_inverse_apply(const EffectiveOperator& op, cdouble z, const VecC& f, int route = 1);

struct PowerFit {
    double power = 0.0;
    double intercept = 0.0;
    std::vector<double> abs_z, norms;
};
// Slope of log ||E_H(lambda0 + z)^{-1} f|| on z = t e^{i 3 pi / 4}, t in [tmin, tmax].
PowerFit fit_power(const EffectiveOperator& op, const VecC& f, double tmin = 1e-10, double tmax = 1e-6,
                   int samples = 5);

// Relative error of the leading term against direct inversion at z.
double leading_error(const EffectiveOperator& op, const LeadingTerm& lead, cdouble z, const VecC& f);

struct GevreyReport {
    double a = 0.0, mu = 0.5, gamma_theory = 0.0;
    std::vector<double> a_N;
    double gamma_fit = 0.0, logC_fit = 0.0;
    bool conditioning_failure = false;
};
// a_N = ||e^{-a <r>^{1-mu}} R0(0)^N|| with R0(0) = (-d^2/dr^2 + w)^{-1}, w = strength <r>^{-2 mu}.
GevreyReport gevrey_probe(const RadialGrid& grid, double strength, double a, int N_max, double mu = 0.5);

}  // namespace thr
