#pragma once

#include <optional>
#include <string>
#include <vector>

#include "threshold/common.hpp"

namespace thr {

struct Nucleus {
    Eigen::VectorXd position;
    double charge = 0.0;
};

struct ParticleSystem {
    std::vector<double> masses;
    std::vector<double> charges;
    int dim = 3;
    // Present: infinite-mass nuclei model (no centre-of-mass removal).
    std::optional<std::vector<Nucleus>> nuclei;

    int N() const { return static_cast<int>(masses.size()); }
    void validate() const;
};

// Cluster decomposition with projectors in full coordinates R^{nN}. The
// projectors are orthogonal for q(x) = sum 2 m_j |x_j|^2.
struct ClusterDecomposition {
    std::vector<std::vector<int>> clusters;  // free clusters (size >= 2)
    std::vector<int> nuclear;                // nuclear cluster (fixed-nuclei model)
    MatR pi_upper;                           // pi^a (internal)
    MatR pi_lower;                           // pi_a (inter-cluster)
    int rank = 0;                            // dim X^a
    int sharp = 0;                           // #a
    std::string label() const;
};

struct ClusterLattice {
    ParticleSystem system;
    std::vector<ClusterDecomposition> decompositions;
    std::vector<std::vector<bool>> contained;  // contained[a][b]: a subset of b
    MatR metric;                               // diag(2 m_j) expanded to R^{nN}
    MatR total;                                // projector onto the configuration space X
    int index_max = -1, index_min = -1;
    std::vector<int> two_cluster() const;
};

ClusterLattice build_lattice(const ParticleSystem& system);

// x in R^{nN}; returns (x^a, x_a) with x - (centre of mass part) = x^a + x_a.
std::pair<VecR, VecR> project(const ClusterLattice& lattice, const VecR& x, int a);

double q_form(const ClusterLattice& lattice, const VecR& x);

// Residuals of the projector identities for every decomposition.
struct LatticeCheck {
    double max_sum = 0.0;        // ||pi^a + pi_a - 1_X||
    double max_orth = 0.0;       // ||pi^a pi_a||
    double max_idempotent = 0.0; // ||pi^2 - pi||
    double max_selfadjoint = 0.0;
    bool order_matches_inclusion = true;
    bool rank_property = true;   // #a = 2 vs atoms b not in a
};
LatticeCheck check_lattice(const ClusterLattice& lattice);

// Cluster bound-state descriptors.
struct OrbitalTerm {
    int n = 1, l = 0, m = 0;  // hydrogenic quantum numbers, real harmonic index m
    double coefficient = 1.0;
};

struct BoundState {
    enum class Kind { Point, Hydrogenic, Tabulated, Moments } kind = Kind::Point;
    std::vector<int> particles;       // cluster members
    // Hydrogenic / tabulated orbital of the relative (or nucleus-centred) coordinate.
    std::vector<OrbitalTerm> orbital;
    double bohr_radius = 1.0;
    std::vector<double> table_r;                  // Tabulated: radial nodes
    std::vector<std::vector<double>> table_R;     // radial values per orbital term
    Eigen::Vector3d dipole = Eigen::Vector3d::Zero();  // Moments: <Q~>
};

struct ChannelSpec {
    std::vector<int> cluster1, cluster2;  // dynamical model: the two clusters
    // Fixed-nuclei model: cluster1 = electrons bound to the nuclei, cluster2 = {escaping particle}.
    std::vector<BoundState> states1, states2;  // orthonormal bases of the threshold manifolds
    double lambda0 = -1.0;
    int multiplicity() const { return static_cast<int>(states1.size() * states2.size()); }
};

enum class MultipoleCase { Case1, Case2, Case3 };
std::string to_string(MultipoleCase c);

struct EffectiveMultipole {
    double coulomb = 0.0;
    Eigen::Vector3d dipole = Eigen::Vector3d::Zero();
    // Dipole transition vectors d_kl with Q_kl(R^) = R^ . d_kl over the channel manifold.
    std::vector<std::vector<Eigen::Vector3d>> dipole_matrix;
    int remainder_order = 3;
    MultipoleCase kase = MultipoleCase::Case3;
};

// <phi_k, Q~ phi_l> for two bound states of the same cluster.
Eigen::Vector3d dipole_moment(const ParticleSystem& sys, const BoundState& a, const BoundState& b,
                              bool fixed_nuclei);

EffectiveMultipole effective_multipole(const ParticleSystem& sys, const ChannelSpec& ch);

enum class ChannelClass { A1, A2, A3cd, A3fd };
std::string to_string(ChannelClass c);

struct ChannelClassification {
    std::vector<ChannelClass> labels;
    std::vector<int> A1, A2, A3cd, A3fd;
};

ChannelClassification classify_channels(const ParticleSystem& sys,
                                        const std::vector<ChannelSpec>& channels);

// Hydrogenic radial function R_nl(r) for a given Bohr radius (normalized).
double hydrogen_radial(int n, int l, double r, double a0);
// Real spherical harmonic Y_lm(theta, phi) (m < 0: sine type).
double real_spherical_harmonic(int l, int m, double theta, double phi);

// Orbital value at a Cartesian point (oracle for moment quadrature).
double orbital_value(const BoundState& s, const Eigen::Vector3d& y);

}  // namespace thr
