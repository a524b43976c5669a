#include "threshold/model_setup.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/laguerre.hpp>
#include <boost/math/special_functions/spherical_harmonic.hpp>

#include "threshold/radial_grid.hpp"

namespace thr {

namespace {

constexpr double kZeroTol = 1e-10;

// All set partitions of items, as lists of blocks.
void partitions(const std::vector<int>& items, std::size_t pos, std::vector<std::vector<int>>& cur,
                std::vector<std::vector<std::vector<int>>>& out) {
    if (pos == items.size()) {
        out.push_back(cur);
        return;
    }
    for (std::size_t b = 0; b < cur.size(); ++b) {
        cur[b].push_back(items[pos]);
        partitions(items, pos + 1, cur, out);
        cur[b].pop_back();
    }
    cur.push_back({items[pos]});
    partitions(items, pos + 1, cur, out);
    cur.pop_back();
}

// Projector x -> (cluster centre of mass) for the given blocks, identity on `keep`,
// zero on particles in no block.
MatR cm_projector(const ParticleSystem& sys, const std::vector<std::vector<int>>& blocks) {
    const int n = sys.dim, D = n * sys.N();
    MatR P = MatR::Zero(D, D);
    for (const auto& blk : blocks) {
        double M = 0.0;
        for (int j : blk) M += sys.masses[j];
        for (int i : blk)
            for (int k : blk)
                for (int d = 0; d < n; ++d) P(i * n + d, k * n + d) = sys.masses[k] / M;
    }
    return P;
}

bool subset(const std::vector<int>& a, const std::vector<int>& b) {
    return std::all_of(a.begin(), a.end(),
                       [&](int x) { return std::find(b.begin(), b.end(), x) != b.end(); });
}

int numeric_rank(const MatR& A, double tol = 1e-10) {
    if (A.size() == 0) return 0;
    Eigen::JacobiSVD<MatR> svd(A);
    const VecR& s = svd.singularValues();
    const double smax = std::max(s(0), 1.0);
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > tol * smax) ++r;
    return r;
}

// Combinatorial refinement used to cross-check subspace inclusion.
bool refines(const ClusterDecomposition& a, const ClusterDecomposition& b, bool fixed) {
    if (fixed && !subset(a.nuclear, b.nuclear)) return false;
    for (const auto& blk : a.clusters) {
        if (blk.size() < 2) continue;
        bool ok = fixed && subset(blk, b.nuclear);
        for (const auto& c : b.clusters)
            if (subset(blk, c)) ok = true;
        if (!ok) return false;
    }
    return true;
}

double scale_of(const MatR& A) { return std::max(1.0, A.norm()); }

}  // namespace

void ParticleSystem::validate() const {
    if (N() < 2) throw ValidationError("particle system needs N >= 2");
    if (static_cast<int>(charges.size()) != N())
        throw ValidationError("charges[] and masses[] differ in length");
    if (dim < 1) throw ValidationError("dim must be >= 1");
    for (double m : masses)
        if (!(m > 0.0)) throw ValidationError("masses must be > 0");
    if (nuclei)
        for (const auto& nuc : *nuclei)
            if (nuc.position.size() != dim)
                throw ValidationError("nucleus position dimension differs from dim");
}

std::string ClusterDecomposition::label() const {
    std::string s = "(";
    bool first = true;
    auto put = [&](const std::vector<int>& blk, const char* open, const char* close) {
        if (!first) s += ' ';
        first = false;
        s += open;
        for (std::size_t k = 0; k < blk.size(); ++k) s += (k ? "," : "") + std::to_string(blk[k] + 1);
        s += close;
    };
    if (!nuclear.empty()) put(nuclear, "N{", "}");
    for (const auto& blk : clusters) put(blk, "{", "}");
    return s + ")";
}

std::vector<int> ClusterLattice::two_cluster() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < decompositions.size(); ++i)
        if (decompositions[i].sharp == 2) out.push_back(static_cast<int>(i));
    return out;
}

ClusterLattice build_lattice(const ParticleSystem& system) {
    system.validate();
    ClusterLattice L;
    L.system = system;
    const int N = system.N(), n = system.dim, D = n * N;
    const bool fixed = system.nuclei.has_value();
    L.metric = MatR::Zero(D, D);
    for (int j = 0; j < N; ++j)
        for (int d = 0; d < n; ++d) L.metric(j * n + d, j * n + d) = 2.0 * system.masses[j];

    std::vector<int> all(N);
    std::iota(all.begin(), all.end(), 0);
    const MatR I = MatR::Identity(D, D);
    const MatR Pcm = fixed ? MatR::Zero(D, D) : cm_projector(system, {all});
    L.total = I - Pcm;

    auto add = [&](std::vector<int> nuclear, std::vector<std::vector<int>> blocks) {
        ClusterDecomposition a;
        a.nuclear = nuclear;
        a.clusters = blocks;
        MatR C = cm_projector(system, blocks);
        if (fixed) {
            // Internal space: nuclear members free, free clusters about their CM.
            MatR up = MatR::Zero(D, D);
            for (int j : nuclear)
                for (int d = 0; d < n; ++d) up(j * n + d, j * n + d) = 1.0;
            for (const auto& blk : blocks) {
                if (blk.size() < 2) continue;
                MatR sel = MatR::Zero(D, D);
                for (int j : blk)
                    for (int d = 0; d < n; ++d) sel(j * n + d, j * n + d) = 1.0;
                up += sel - cm_projector(system, {blk});
            }
            a.pi_upper = up;
        } else {
            a.pi_upper = I - C;
        }
        a.pi_lower = L.total - a.pi_upper;
        a.rank = static_cast<int>(std::lround(a.pi_upper.trace()));
        L.decompositions.push_back(std::move(a));
    };

    if (!fixed) {
        std::vector<std::vector<std::vector<int>>> parts;
        std::vector<std::vector<int>> cur;
        partitions(all, 0, cur, parts);
        for (auto& p : parts) add({}, p);
    } else {
        for (int mask = 0; mask < (1 << N); ++mask) {
            std::vector<int> nuc, rest;
            for (int j = 0; j < N; ++j) ((mask >> j) & 1 ? nuc : rest).push_back(j);
            std::vector<std::vector<std::vector<int>>> parts;
            std::vector<std::vector<int>> cur;
            if (rest.empty())
                parts.push_back({});
            else
                partitions(rest, 0, cur, parts);
            for (auto& p : parts) {
                std::vector<std::vector<int>> blocks;
                for (auto& blk : p)
                    if (blk.size() >= 2) blocks.push_back(blk);
                // Singletons carry no internal motion; keep one labeling per subspace.
                bool dup = false;
                for (const auto& ex : L.decompositions)
                    if (ex.nuclear == nuc && ex.clusters == blocks) dup = true;
                if (!dup) add(nuc, blocks);
            }
        }
    }

    const int K = static_cast<int>(L.decompositions.size());
    L.contained.assign(K, std::vector<bool>(K, false));
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) {
            const MatR& pa = L.decompositions[a].pi_upper;
            const MatR& pb = L.decompositions[b].pi_upper;
            L.contained[a][b] = (pb * pa - pa).norm() <= 1e-10 * scale_of(pa);
        }
    for (int a = 0; a < K; ++a) {
        if (L.decompositions[a].rank == (fixed ? D : D - n)) L.index_max = a;
        if (L.decompositions[a].rank == 0) L.index_min = a;
    }
    // #a: longest strictly increasing chain from a to a_max.
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        return L.decompositions[x].rank > L.decompositions[y].rank;
    });
    for (int a : order) {
        int best = 1;
        for (int b = 0; b < K; ++b)
            if (b != a && L.contained[a][b] && L.decompositions[b].rank > L.decompositions[a].rank)
                best = std::max(best, L.decompositions[b].sharp + 1);
        L.decompositions[a].sharp = best;
    }
    return L;
}

std::pair<VecR, VecR> project(const ClusterLattice& lattice, const VecR& x, int a) {
    if (x.size() != lattice.metric.rows()) throw ValidationError("configuration has wrong length");
    if (a < 0 || a >= static_cast<int>(lattice.decompositions.size()))
        throw ValidationError("unknown cluster decomposition");
    const auto& d = lattice.decompositions[a];
    return {d.pi_upper * x, d.pi_lower * x};
}

double q_form(const ClusterLattice& lattice, const VecR& x) { return x.dot(lattice.metric * x); }

LatticeCheck check_lattice(const ClusterLattice& L) {
    LatticeCheck c;
    const bool fixed = L.system.nuclei.has_value();
    const int K = static_cast<int>(L.decompositions.size());
    for (const auto& d : L.decompositions) {
        c.max_sum = std::max(c.max_sum, (d.pi_upper + d.pi_lower - L.total).norm());
        c.max_orth = std::max(c.max_orth, (d.pi_upper * d.pi_lower).norm());
        c.max_idempotent = std::max(c.max_idempotent, (d.pi_upper * d.pi_upper - d.pi_upper).norm());
        c.max_idempotent = std::max(c.max_idempotent, (d.pi_lower * d.pi_lower - d.pi_lower).norm());
        MatR Mp = L.metric * d.pi_upper;
        c.max_selfadjoint = std::max(c.max_selfadjoint, (Mp - Mp.transpose()).norm() / scale_of(L.metric));
    }
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b)
            if (L.contained[a][b] != refines(L.decompositions[a], L.decompositions[b], fixed))
                c.order_matches_inclusion = false;
    const int atom_sharp = L.decompositions[L.index_min].sharp - 1;
    for (int a = 0; a < K; ++a) {
        if (L.decompositions[a].sharp != 2) continue;
        for (int b = 0; b < K; ++b) {
            if (L.decompositions[b].sharp != atom_sharp || L.contained[b][a]) continue;
            const int r = numeric_rank(L.decompositions[b].pi_upper * L.decompositions[a].pi_upper);
            if (r != 0 && r != L.decompositions[b].rank) c.rank_property = false;
        }
    }
    return c;
}

double hydrogen_radial(int n, int l, double r, double a0) {
    if (n < 1 || l < 0 || l >= n) throw ValidationError("invalid hydrogenic quantum numbers");
    const double rho = 2.0 * r / (n * a0);
    const double norm = std::sqrt(std::pow(2.0 / (n * a0), 3) * boost::math::factorial<double>(n - l - 1) /
                                  (2.0 * n * boost::math::factorial<double>(n + l)));
    return norm * std::exp(-0.5 * rho) * std::pow(rho, l) *
           boost::math::laguerre(static_cast<unsigned>(n - l - 1), static_cast<unsigned>(2 * l + 1), rho);
}

double real_spherical_harmonic(int l, int m, double theta, double phi) {
    if (l < 0 || std::abs(m) > l) throw ValidationError("invalid spherical harmonic index");
    const unsigned ul = static_cast<unsigned>(l);
    if (m == 0) return boost::math::spherical_harmonic_r(ul, 0, theta, phi);
    const double sign = (m % 2) ? -1.0 : 1.0;
    if (m > 0) return std::sqrt(2.0) * sign * boost::math::spherical_harmonic_r(ul, m, theta, phi);
    return std::sqrt(2.0) * sign * boost::math::spherical_harmonic_i(ul, -m, theta, phi);
}

namespace {

double tabulated_radial(const BoundState& s, std::size_t term, double r) {
    const auto& rr = s.table_r;
    const auto& RR = s.table_R[term];
    if (r <= rr.front()) return RR.front();
    if (r >= rr.back()) return 0.0;
    auto it = std::upper_bound(rr.begin(), rr.end(), r);
    const std::size_t k = static_cast<std::size_t>(it - rr.begin());
    const double t = (r - rr[k - 1]) / (rr[k] - rr[k - 1]);
    return (1 - t) * RR[k - 1] + t * RR[k];
}

double radial_of(const BoundState& s, std::size_t term, double r) {
    if (s.kind == BoundState::Kind::Hydrogenic)
        return hydrogen_radial(s.orbital[term].n, s.orbital[term].l, r, s.bohr_radius);
    return tabulated_radial(s, term, r);
}

// <R_c R_d r^3> over the radial coordinate.
double radial_moment(const BoundState& a, std::size_t ca, const BoundState& b, std::size_t cb) {
    if (a.kind == BoundState::Kind::Tabulated && b.kind == BoundState::Kind::Tabulated &&
        a.table_r == b.table_r) {
        const auto& r = a.table_r;
        double s = 0.0;
        for (std::size_t k = 1; k < r.size(); ++k) {
            const double f0 = a.table_R[ca][k - 1] * b.table_R[cb][k - 1] * std::pow(r[k - 1], 3);
            const double f1 = a.table_R[ca][k] * b.table_R[cb][k] * std::pow(r[k], 3);
            s += 0.5 * (r[k] - r[k - 1]) * (f0 + f1);
        }
        return s;
    }
    double rmax = 0.0;
    for (const BoundState* s : {&a, &b}) {
        if (s->kind == BoundState::Kind::Hydrogenic) {
            int nmax = 1;
            for (const auto& o : s->orbital) nmax = std::max(nmax, o.n);
            rmax = std::max(rmax, 60.0 * nmax * nmax * s->bohr_radius);
        } else {
            rmax = std::max(rmax, s->table_r.back());
        }
    }
    RadialGrid g = RadialGrid::panels({0.0, rmax}, rmax, rmax / 200.0, 1.0, 16);
    double s = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const double r = g.r()[i];
        s += g.w()[i] * radial_of(a, ca, r) * radial_of(b, cb, r) * r * r * r;
    }
    return s;
}

// Angular integral of Y_c Y_d y^ over the unit sphere.
Eigen::Vector3d angular_moment(const OrbitalTerm& c, const OrbitalTerm& d) {
    const int L = c.l + d.l + 1;
    VecR x, w;
    gauss_legendre(L / 2 + 2, x, w);
    const int nphi = 2 * L + 4;
    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    for (int i = 0; i < x.size(); ++i) {
        const double th = std::acos(x[i]), st = std::sqrt(1.0 - x[i] * x[i]);
        for (int k = 0; k < nphi; ++k) {
            const double ph = 2.0 * kPi * k / nphi;
            const double val = w[i] * (2.0 * kPi / nphi) * real_spherical_harmonic(c.l, c.m, th, ph) *
                               real_spherical_harmonic(d.l, d.m, th, ph);
            out += val * Eigen::Vector3d(st * std::cos(ph), st * std::sin(ph), x[i]);
        }
    }
    return out;
}

void check_table_extent(const BoundState& s) {
    if (s.kind != BoundState::Kind::Tabulated) return;
    if (s.table_r.size() < 2 || s.table_R.size() != s.orbital.size())
        throw ValidationError("tabulated bound state: table shape does not match orbital terms");
    for (const auto& R : s.table_R) {
        if (R.size() != s.table_r.size()) throw ValidationError("tabulated bound state: ragged table");
        double peak = 0.0;
        for (std::size_t k = 0; k < R.size(); ++k)
            peak = std::max(peak, std::abs(R[k]) * std::pow(s.table_r[k], 1.5));
        const double last = std::abs(R.back()) * std::pow(s.table_r.back(), 1.5);
        if (last > 1e-6 * peak)
            throw ValidationError("tabulated bound state: insufficient grid extent for moments");
    }
}

// <phi_a, y phi_b> for orbitals of the relative coordinate.
Eigen::Vector3d relative_dipole(const BoundState& a, const BoundState& b) {
    check_table_extent(a);
    check_table_extent(b);
    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    for (std::size_t c = 0; c < a.orbital.size(); ++c)
        for (std::size_t d = 0; d < b.orbital.size(); ++d) {
            Eigen::Vector3d ang = angular_moment(a.orbital[c], b.orbital[d]);
            if (ang.norm() < 1e-14) continue;
            out += a.orbital[c].coefficient * b.orbital[d].coefficient * radial_moment(a, c, b, d) * ang;
        }
    return out;
}

bool has_orbital(const BoundState& s) {
    return s.kind == BoundState::Kind::Hydrogenic || s.kind == BoundState::Kind::Tabulated;
}

}  // namespace

double orbital_value(const BoundState& s, const Eigen::Vector3d& y) {
    const double r = y.norm();
    if (r == 0.0) {
        double v = 0.0;
        for (std::size_t c = 0; c < s.orbital.size(); ++c)
            if (s.orbital[c].l == 0) v += s.orbital[c].coefficient * radial_of(s, c, 0.0) / std::sqrt(4 * kPi);
        return v;
    }
    const double th = std::acos(std::clamp(y.z() / r, -1.0, 1.0));
    const double ph = std::atan2(y.y(), y.x());
    double v = 0.0;
    for (std::size_t c = 0; c < s.orbital.size(); ++c)
        v += s.orbital[c].coefficient * radial_of(s, c, r) *
             real_spherical_harmonic(s.orbital[c].l, s.orbital[c].m, th, ph);
    return v;
}

Eigen::Vector3d dipole_moment(const ParticleSystem& sys, const BoundState& a, const BoundState& b,
                              bool fixed_nuclei) {
    if (a.particles != b.particles) throw ValidationError("bound states belong to different clusters");
    const bool same = &a == &b;
    if (a.kind == BoundState::Kind::Moments || b.kind == BoundState::Kind::Moments) {
        if (!same) return Eigen::Vector3d::Zero();
        return a.dipole;
    }
    if (fixed_nuclei) {
        // Nucleus-centred one-electron orbital: Q~ = q_e (R_1 + y).
        if (a.particles.size() != 1 || !has_orbital(a) || !has_orbital(b))
            throw ValidationError("fixed-nuclei orbitals must describe a single electron");
        if (!sys.nuclei || sys.nuclei->empty()) throw ValidationError("no nuclei supplied");
        const double qe = sys.charges[a.particles[0]];
        Eigen::Vector3d centre = Eigen::Vector3d::Zero();
        centre.head(std::min(3, sys.dim)) = sys.nuclei->front().position.head(std::min(3, sys.dim));
        Eigen::Vector3d d = qe * relative_dipole(a, b);
        if (same) d += qe * centre;
        return d;
    }
    if (a.particles.size() == 1 || a.kind == BoundState::Kind::Point) return Eigen::Vector3d::Zero();
    if (a.particles.size() != 2 || !has_orbital(a) || !has_orbital(b))
        throw ValidationError("orbital bound states need a two-particle cluster");
    const int i = a.particles[0], j = a.particles[1];
    const double mi = sys.masses[i], mj = sys.masses[j], M = mi + mj;
    const double factor = (sys.charges[i] * mj - sys.charges[j] * mi) / M;
    return factor * relative_dipole(a, b);
}

std::string to_string(MultipoleCase c) {
    switch (c) {
        case MultipoleCase::Case1: return "Case1";
        case MultipoleCase::Case2: return "Case2";
        default: return "Case3";
    }
}

std::string to_string(ChannelClass c) {
    switch (c) {
        case ChannelClass::A1: return "A1";
        case ChannelClass::A2: return "A2";
        case ChannelClass::A3cd: return "A3cd";
        default: return "A3fd";
    }
}

EffectiveMultipole effective_multipole(const ParticleSystem& sys, const ChannelSpec& ch) {
    sys.validate();
    const bool fixed = sys.nuclei.has_value();
    if (ch.states1.empty() || ch.states2.empty())
        throw ValidationError("channel needs bound states for both clusters");
    double qscale = 0.0;
    for (double q : sys.charges) qscale = std::max(qscale, std::abs(q));
    double Q1 = 0.0, Q2 = 0.0;
    for (int j : ch.cluster1) Q1 += sys.charges.at(j);
    for (int j : ch.cluster2) Q2 += sys.charges.at(j);
    Eigen::Vector3d ncl = Eigen::Vector3d::Zero();
    if (fixed) {
        for (const auto& nuc : *sys.nuclei) {
            Q1 += nuc.charge;
            qscale = std::max(qscale, std::abs(nuc.charge));
            Eigen::Vector3d p = Eigen::Vector3d::Zero();
            p.head(std::min(3, sys.dim)) = nuc.position.head(std::min(3, sys.dim));
            ncl += nuc.charge * p;
        }
        if (ch.cluster2.size() != 1)
            throw ValidationError("fixed-nuclei channel: cluster2 must be the escaping particle");
    }
    double lscale = 1.0;
    for (const auto* states : {&ch.states1, &ch.states2})
        for (const auto& s : *states) lscale = std::max(lscale, s.bohr_radius);

    EffectiveMultipole em;
    em.coulomb = Q1 * Q2;
    const int m1 = static_cast<int>(ch.states1.size()), m2 = static_cast<int>(ch.states2.size());
    std::vector<std::vector<Eigen::Vector3d>> d1(m1, std::vector<Eigen::Vector3d>(m1)),
        d2(m2, std::vector<Eigen::Vector3d>(m2));
    for (int k = 0; k < m1; ++k)
        for (int l = 0; l < m1; ++l) d1[k][l] = dipole_moment(sys, ch.states1[k], ch.states1[l], fixed);
    for (int k = 0; k < m2; ++k)
        for (int l = 0; l < m2; ++l)
            d2[k][l] = fixed ? Eigen::Vector3d::Zero() : dipole_moment(sys, ch.states2[k], ch.states2[l], false);
    const int m = m1 * m2;
    em.dipole_matrix.assign(m, std::vector<Eigen::Vector3d>(m, Eigen::Vector3d::Zero()));
    for (int k1 = 0; k1 < m1; ++k1)
        for (int k2 = 0; k2 < m2; ++k2)
            for (int l1 = 0; l1 < m1; ++l1)
                for (int l2 = 0; l2 < m2; ++l2) {
                    Eigen::Vector3d v = Eigen::Vector3d::Zero();
                    if (fixed) {
                        // q_N (<Q~> + Q~ncl); the escaping particle carries the channel index 2.
                        if (k2 == l2) v = Q2 * (d1[k1][l1] + (k1 == l1 ? ncl : Eigen::Vector3d::Zero()));
                    } else {
                        if (k1 == l1) v += Q1 * d2[k2][l2];
                        if (k2 == l2) v -= Q2 * d1[k1][l1];
                    }
                    em.dipole_matrix[k1 * m2 + k2][l1 * m2 + l2] = v;
                }
    em.dipole = em.dipole_matrix[0][0];
    const double ctol = kZeroTol * std::max(qscale * qscale, 1e-300);
    double dmax = 0.0;
    for (const auto& row : em.dipole_matrix)
        for (const auto& v : row) dmax = std::max(dmax, v.norm());
    if (std::abs(em.coulomb) > ctol)
        em.kase = MultipoleCase::Case1;
    else if (dmax > ctol * lscale)
        em.kase = MultipoleCase::Case2;
    else
        em.kase = MultipoleCase::Case3;
    if (std::abs(em.coulomb) <= ctol) em.coulomb = 0.0;
    return em;
}

ChannelClassification classify_channels(const ParticleSystem& sys, const std::vector<ChannelSpec>& channels) {
    ChannelClassification out;
    if (channels.empty()) return out;
    const double l0 = channels.front().lambda0;
    for (const auto& ch : channels)
        if (std::abs(ch.lambda0 - l0) > 1e-12 * std::max(1.0, std::abs(l0)))
            throw ValidationError("classify_channels: channels must share the threshold lambda0");
    for (std::size_t i = 0; i < channels.size(); ++i) {
        EffectiveMultipole em = effective_multipole(sys, channels[i]);
        ChannelClass c;
        if (em.coulomb < 0.0)
            c = ChannelClass::A1;
        else if (em.coulomb > 0.0)
            c = ChannelClass::A2;
        else
            c = em.kase == MultipoleCase::Case2 ? ChannelClass::A3cd : ChannelClass::A3fd;
        out.labels.push_back(c);
        const int idx = static_cast<int>(i);
        switch (c) {
            case ChannelClass::A1: out.A1.push_back(idx); break;
            case ChannelClass::A2: out.A2.push_back(idx); break;
            case ChannelClass::A3cd: out.A3cd.push_back(idx); break;
            case ChannelClass::A3fd: out.A3fd.push_back(idx); break;
        }
    }
    return out;
}

}  // namespace thr
