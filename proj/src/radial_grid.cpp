#include "threshold/radial_grid.hpp"

#include <algorithm>
#include <cmath>

namespace thr {

namespace {

// Legendre P_n and its derivative at x.
void legendre(int n, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

MatR reference_cumulative(const VecR& x, const VecR& w) {
    const int n = static_cast<int>(x.size());
    MatR V(n, n), I(n, n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> P(n + 1);
        P[0] = 1.0;
        if (n >= 1) P[1] = x[i];
        for (int k = 2; k <= n; ++k) P[k] = ((2.0 * k - 1.0) * x[i] * P[k - 1] - (k - 1.0) * P[k - 2]) / k;
        for (int k = 0; k < n; ++k) {
            V(i, k) = P[k];
            I(i, k) = (k == 0) ? x[i] + 1.0 : (P[k + 1] - P[k - 1]) / (2.0 * k + 1.0);
        }
    }
    // Discrete orthogonality of Gauss-Legendre inverts the Vandermonde matrix.
    MatR Vinv(n, n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) Vinv(k, j) = (2.0 * k + 1.0) / 2.0 * V(j, k) * w[j];
    return I * Vinv;
}

}  // namespace

void gauss_legendre(int n, VecR& x, VecR& w) {
    if (n < 1) throw ValidationError("gauss_legendre: order must be >= 1");
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p, dp;
            legendre(n, t, p, dp);
            double dt = p / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        double p, dp;
        legendre(n, t, p, dp);
        x[n - 1 - i] = t;
        w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

RadialGrid RadialGrid::log_spaced(int n, double rmin, double rmax) {
    if (n < 3 || !(rmin > 0.0) || !(rmax > rmin))
        throw ValidationError("log_spaced grid needs n >= 3 and 0 < rmin < rmax");
    RadialGrid g;
    g.kind_ = Kind::Trapezoid;
    g.log_map_ = true;
    g.r_.resize(n);
    const double t0 = std::log(rmin), t1 = std::log(rmax);
    g.dt_ = (t1 - t0) / (n - 1);
    for (int i = 0; i < n; ++i) g.r_[i] = std::exp(t0 + i * g.dt_);
    g.r_[0] = rmin;
    g.r_[n - 1] = rmax;
    g.jac_ = g.r_;
    g.w_ = g.jac_ * g.dt_;
    g.w_[0] *= 0.5;
    g.w_[n - 1] *= 0.5;
    g.rmax_ = rmax;
    g.rmin_edge_ = rmin;
    return g;
}

RadialGrid RadialGrid::uniform(int n, double rmin, double rmax) {
    if (n < 3 || rmin < 0.0 || !(rmax > rmin))
        throw ValidationError("uniform grid needs n >= 3 and 0 <= rmin < rmax");
    RadialGrid g;
    g.kind_ = Kind::Trapezoid;
    g.r_ = VecR::LinSpaced(n, rmin, rmax);
    g.dt_ = (rmax - rmin) / (n - 1);
    g.jac_ = VecR::Ones(n);
    g.w_ = g.jac_ * g.dt_;
    g.w_[0] *= 0.5;
    g.w_[n - 1] *= 0.5;
    g.rmax_ = rmax;
    g.rmin_edge_ = rmin;
    return g;
}

RadialGrid RadialGrid::gauss_panels(const std::vector<double>& edges, int order) {
    if (edges.size() < 2) throw ValidationError("gauss_panels needs at least two edges");
    if (edges.front() < 0.0) throw ValidationError("gauss_panels: edges must be >= 0");
    for (std::size_t k = 1; k < edges.size(); ++k)
        if (!(edges[k] > edges[k - 1])) throw ValidationError("gauss_panels: edges must increase");
    RadialGrid g;
    g.kind_ = Kind::GaussPanels;
    g.order_ = order;
    g.edges_ = edges;
    VecR x, w;
    gauss_legendre(order, x, w);
    g.ref_cum_ = reference_cumulative(x, w);
    const int P = static_cast<int>(edges.size()) - 1;
    g.r_.resize(P * order);
    g.w_.resize(P * order);
    for (int p = 0; p < P; ++p) {
        const double a = edges[p], b = edges[p + 1];
        for (int j = 0; j < order; ++j) {
            g.r_[p * order + j] = 0.5 * (a + b) + 0.5 * (b - a) * x[j];
            g.w_[p * order + j] = 0.5 * (b - a) * w[j];
        }
    }
    g.rmax_ = edges.back();
    g.rmin_edge_ = edges.front();
    return g;
}

RadialGrid RadialGrid::panels(const std::vector<double>& breaks, double rmax, double h,
                              double growth, int order) {
    if (breaks.empty() || !(h > 0.0) || growth < 1.0)
        throw ValidationError("panels: need breaks, h > 0 and growth >= 1");
    std::vector<double> edges{breaks.front()};
    for (std::size_t k = 1; k < breaks.size(); ++k) {
        const double a = breaks[k - 1], b = breaks[k];
        const int m = std::max(1, static_cast<int>(std::ceil((b - a) / h - 1e-12)));
        for (int j = 1; j <= m; ++j) edges.push_back(a + (b - a) * j / m);
    }
    double width = h;
    while (edges.back() < rmax - 1e-12) {
        width *= growth;
        double next = edges.back() + width;
        if (next > rmax || rmax - next < 0.3 * width) next = rmax;
        edges.push_back(next);
    }
    return gauss_panels(edges, order);
}

RadialGrid RadialGrid::default_grid() { return log_spaced(400, 1e-3, 60.0); }

void RadialGrid::lower_row(int i, double* out) const {
    const int n = size();
    if (kind_ == Kind::Trapezoid) {
        for (int j = 0; j < n; ++j) {
            if (j > i || i == 0)
                out[j] = 0.0;
            else if (j == i || j == 0)
                out[j] = 0.5 * jac_[j] * dt_;
            else
                out[j] = jac_[j] * dt_;
        }
        return;
    }
    const int p = i / order_, il = i % order_;
    const double half = 0.5 * (edges_[p + 1] - edges_[p]);
    for (int j = 0; j < n; ++j) {
        const int q = j / order_;
        if (q < p)
            out[j] = w_[j];
        else if (q > p)
            out[j] = 0.0;
        else
            out[j] = half * ref_cum_(il, j % order_);
    }
}

MatR RadialGrid::cumulative_matrix() const {
    const int n = size();
    MatR C(n, n);
    std::vector<double> row(n);
    for (int i = 0; i < n; ++i) {
        lower_row(i, row.data());
        for (int j = 0; j < n; ++j) C(i, j) = row[j];
    }
    return C;
}

RadialGrid RadialGrid::refined() const {
    RadialGrid g;
    if (kind_ == Kind::Trapezoid) {
        g = log_map_ ? log_spaced(2 * size() - 1, r_[0], rmax_)
                     : uniform(2 * size() - 1, r_[0], rmax_);
    } else {
        std::vector<double> e{edges_.front()};
        for (std::size_t k = 1; k < edges_.size(); ++k) {
            e.push_back(0.5 * (edges_[k - 1] + edges_[k]));
            e.push_back(edges_[k]);
        }
        g = gauss_panels(e, order_);
    }
    g.weight_s = weight_s;
    return g;
}

}  // namespace thr
