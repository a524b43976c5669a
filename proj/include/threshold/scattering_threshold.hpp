#pragma once

#include <functional>
#include <string>
#include <vector>

#include "threshold/common.hpp"
#include "threshold/threshold_classifier.hpp"

namespace thr {

struct ScatteringLength {
    cdouble s;             // length units
    double sigma0 = 0.0;   // 4 pi |s|^2
    double condition = 0.0;
    bool near_resonant = false;   // condition of 1 + U G0 above 1e8
};
// s = (4 pi)^{-1} int (1 + U G0)^{-1} U 1 dx in the incoming channel.
ScatteringLength scattering_length(const EffectiveOperator& op, int channel = 0);

// Zero-energy ODE scattering length a_s = r - u/u' beyond the support of W.
double ode_scattering_length(const std::function<double(double)>& W, double r_end,
                             const std::vector<double>& breaks = {});
// a (1 - tan(k0 a) / (k0 a)), k0 = sqrt(V0).
double square_well_scattering_length(double V0, double a);

struct CrossSection {
    double lambda = 0.0;   // lambda - lambda0
    double sigma = 0.0;
    cdouble F;             // extrapolated boundary value
    std::vector<double> eps;
    std::vector<cdouble> F_eps;
    double extrapolation_change = 0.0;   // relative change between the last two extrapolants
    bool nonconvergent = false;
};
// sigma = (4 pi / k) Im <U u_k, R(lambda + i0) U u_k>, u_k = sin(k r)/k, k = sqrt(lambda);
// boundary value by eps = lambda * 10^{-j}, j = 4..7, with Richardson extrapolation.
CrossSection optical_cross_section(const EffectiveOperator& op, double lambda, int channel = 0);

// Threshold S-matrix on span{Y0} (x) C^m; identity on the complement.
struct ThresholdSMatrix {
    int m = 1, kappa = 0;
    bool maximal = false;
    MatC A;                        // m x m block on the constant mode
    std::vector<double> weights;   // sum_j |c_i(psi_j)|^2
    std::vector<double> elastic;   // 1 - 2 weights
    std::vector<double> elastic_defect;  // 1 - |elastic|^2
    double unitarity_defect = 0.0;       // ||1 - A^* A||
};
ThresholdSMatrix levinson_limit(const MatC& normalized_c);
ThresholdSMatrix levinson_limit(const ThresholdReport& report);

struct ChannelMixing {
    MatC c;   // m x kappa normalized c-vectors
    MatC M;   // m x m unitary, columns are the channel mixtures probed
};
// Two channels, one resonance with c = (cos theta, sin theta); pure channels probed.
ChannelMixing two_channel_mixing(double theta, bool adapted = false);

struct TransmissionReport {
    double unitarity_error = 0.0;        // ||M^* M - 1||
    std::vector<double> defects;         // per column of M
    std::vector<bool> transmits;         // defect > 1e-12
};
TransmissionReport transmission_diagnostic(const ChannelMixing& mix);

// int_{R0}^{r} sqrt(E - w(s)) ds + sqrt(E) R0, E = lambda - lambda0.
double eikonal_phase(const std::function<double(double)>& w, double E, double R0, double r);
// |(d phi / dr)^2 + w(r) - E| by Richardson-extrapolated central differences.
double eikonal_residual(const std::function<double(double)>& w, double E, double R0, double r);

struct FlowSample {
    double tau = 0.0;
    VecR xhat, cbar;
    double b = 0.0, a = 0.0;
};
struct FlowResult {
    std::vector<FlowSample> samples;
    double max_a_drift = 0.0;
    double max_b_error = 0.0;   // vs sqrt(a) tanh(sqrt(a)(1 - rho/2)(tau - tau0))
    bool fixed_point = false;
};
// Reduced flow dx/dt = c, dc/dt = -(1 - rho/2) b c - |c|^2 x, db/dt = (1 - rho/2)|c|^2.
FlowResult reduced_flow(const VecR& xhat0, const VecR& cbar0, double b0, double rho, double tau_end,
                        int samples = 200);

}  // namespace thr
