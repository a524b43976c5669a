#pragma once

#include <vector>

#include "threshold/common.hpp"

namespace thr {

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, VecR& x, VecR& w);

// Quadrature grid on (0, R_max] with cumulative integration rules, so that
// semi-separable kernels can be product-integrated row by row.
class RadialGrid {
public:
    enum class Kind { GaussPanels, Trapezoid };

    // n log-spaced nodes on [rmin, rmax], trapezoid rule in log r.
    static RadialGrid log_spaced(int n, double rmin, double rmax);
    // n equispaced nodes on [rmin, rmax], trapezoid rule.
    static RadialGrid uniform(int n, double rmin, double rmax);
    // Composite Gauss-Legendre with the given panel edges (first edge >= 0).
    static RadialGrid gauss_panels(const std::vector<double>& edges, int order);
    // Uniform panels of width <= h up to the last break, then widths growing
    // geometrically by `growth` until rmax. Breaks become panel edges.
    static RadialGrid panels(const std::vector<double>& breaks, double rmax, double h,
                             double growth, int order);
    // 400 log-spaced nodes on [1e-3, 60].
    static RadialGrid default_grid();

    int size() const { return static_cast<int>(r_.size()); }
    const VecR& r() const { return r_; }
    const VecR& w() const { return w_; }
    double rmax() const { return rmax_; }
    double rmin_edge() const { return rmin_edge_; }
    Kind kind() const { return kind_; }
    // Nodes sharing a block are product-integrated against each other;
    // blocks are Gauss panels, or single nodes on trapezoid grids.
    int block_of(int i) const { return kind_ == Kind::GaussPanels ? i / order_ : i; }

    // Weights c_j with sum_j c_j f_j ~ integral from the left edge to r_i.
    void lower_row(int i, double* out) const;
    // Dense matrix of lower rows.
    MatR cumulative_matrix() const;

    // Same layout with each panel split in two (Gauss) or nodes doubled (log).
    RadialGrid refined() const;

    double integrate(const VecR& f) const { return w_.dot(f); }

    // Weighted-space exponent s used by <r>^{-s} similarity transforms.
    double weight_s = 1.0;

private:
    Kind kind_ = Kind::GaussPanels;
    VecR r_, w_;
    double rmax_ = 0.0;
    double rmin_edge_ = 0.0;
    double dt_ = 0.0;
    bool log_map_ = false;
    VecR jac_;  // dr/dt at the nodes for trapezoid grids
    int order_ = 0;
    std::vector<double> edges_;
    MatR ref_cum_;  // cumulative Lagrange integrals on the reference panel
};

inline double japanese(double r) { return std::sqrt(1.0 + r * r); }

}  // namespace thr
