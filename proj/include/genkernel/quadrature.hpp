#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "genkernel/errors.hpp"
#include "genkernel/types.hpp"

namespace genkernel {

struct Box {
    Vec lo, hi;

    Box() = default;
    Box(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo.size() != hi.size() || lo.size() < 1) throw ArgumentError("box: dimension mismatch");
        for (int i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) throw ArgumentError("box: degenerate axis");
    }

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Point& x, Real pad = 0.0) const {
        for (int i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] - pad || x[i] > hi[i] + pad) return false;
        return true;
    }

    bool contains_box(const Box& inner, Real pad = 0.0) const {
        return contains(inner.lo, pad) && contains(inner.hi, pad);
    }

    Point center() const { return 0.5 * (lo + hi); }
    Vec widths() const { return hi - lo; }
};

inline Box box1(Real a, Real b) {
    Vec l(1), h(1);
    l[0] = a;
    h[0] = b;
    return Box(l, h);
}

inline Box box2(Real ax, Real bx, Real ay, Real by) {
    Vec l(2), h(2);
    l << ax, ay;
    h << bx, by;
    return Box(l, h);
}

inline Real volume(const Box& b) { return (b.hi - b.lo).prod(); }

inline Box hull(const Box& a, const Box& b) {
    return Box(a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi));
}

inline Box inflate(const Box& b, Real pad) {
    return Box(b.lo.array() - pad, b.hi.array() + pad);
}

inline Box product_box(const Box& x, const Box& y) {
    Vec lo(x.dim() + y.dim()), hi(x.dim() + y.dim());
    lo << x.lo, y.lo;
    hi << x.hi, y.hi;
    return Box(lo, hi);
}

inline std::optional<Box> intersect(const Box& a, const Box& b) {
    Vec lo = a.lo.cwiseMax(b.lo), hi = a.hi.cwiseMin(b.hi);
    for (int i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i])) return std::nullopt;
    return Box(lo, hi);
}

inline bool boxes_equal(const Box& a, const Box& b, Real tol = 1e-9) {
    if (a.dim() != b.dim()) return false;
    return (a.lo - b.lo).cwiseAbs().maxCoeff() <= tol && (a.hi - b.hi).cwiseAbs().maxCoeff() <= tol;
}

// Gauss-Legendre nodes/weights on [-1,1], Newton on the Legendre recurrence.
inline std::pair<Vec, Vec> gauss_legendre(int n) {
    if (n < 1 || n > 64) throw ArgumentError("gauss_legendre: order out of range");
    Vec x(n), w(n);
    for (int i = 0; i < n; ++i) {
        Real t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        Real dp = 0;
        for (int it = 0; it < 100; ++it) {
            Real p0 = 1, p1 = t;
            for (int k = 2; k <= n; ++k) {
                Real p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1);
            Real dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        Real p0 = 1, p1 = t;
        for (int k = 2; k <= n; ++k) {
            Real p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1);
        x[i] = t;
        w[i] = 2.0 / ((1 - t * t) * dp * dp);
    }
    // ascending + exact mirror symmetry (pairs averaged)
    Vec xs(n), ws(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = x[n - 1 - i];
        ws[i] = w[n - 1 - i];
    }
    for (int i = 0; i < n / 2; ++i) {
        Real m = 0.5 * (xs[n - 1 - i] - xs[i]);
        xs[i] = -m;
        xs[n - 1 - i] = m;
        Real mw = 0.5 * (ws[i] + ws[n - 1 - i]);
        ws[i] = mw;
        ws[n - 1 - i] = mw;
    }
    if (n % 2 == 1) xs[n / 2] = 0.0;
    return {xs, ws};
}

// Composite per-axis rule. Nodes are generated around the interval midpoint so
// that a symmetric interval yields exactly mirror-symmetric nodes (odd moments
// of even weight functions cancel to the last bit).
inline std::pair<Vec, Vec> axis_rule(Real a, Real b, int panels, int nodes) {
    auto [gx, gw] = gauss_legendre(nodes);
    Real c = 0.5 * (a + b);
    Real h = (b - a) / panels;
    Vec X(panels * nodes), W(panels * nodes);
    for (int p = 0; p < panels; ++p) {
        Real mid = c + h * (p - 0.5 * (panels - 1));
        for (int j = 0; j < nodes; ++j) {
            X[p * nodes + j] = mid + 0.5 * h * gx[j];
            W[p * nodes + j] = 0.5 * h * gw[j];
        }
    }
    return {X, W};
}

struct Grid {
    Box box;
    int panels_per_axis = 1;
    int nodes_per_panel = 2;
    Mat nodes;   // N x d
    Vec weights; // N

    int size() const { return static_cast<int>(weights.size()); }
    Point node(int i) const { return nodes.row(i).transpose(); }
};

inline Grid build_grid(const Box& box, int panels, int nodes_per_panel) {
    if (panels < 1) throw ArgumentError("build_grid: panels must be >= 1");
    if (nodes_per_panel < 2 || nodes_per_panel > 12)
        throw ArgumentError("build_grid: nodes_per_panel must be in [2,12]");
    const int d = box.dim();
    std::vector<Vec> ax(d), aw(d);
    long total = 1;
    for (int i = 0; i < d; ++i) {
        std::tie(ax[i], aw[i]) = axis_rule(box.lo[i], box.hi[i], panels, nodes_per_panel);
        total *= ax[i].size();
    }
    Grid g;
    g.box = box;
    g.panels_per_axis = panels;
    g.nodes_per_panel = nodes_per_panel;
    g.nodes.resize(total, d);
    g.weights.resize(total);
    std::vector<int> idx(d, 0);
    for (long n = 0; n < total; ++n) {
        Real w = 1;
        for (int i = 0; i < d; ++i) {
            g.nodes(n, i) = ax[i][idx[i]];
            w *= aw[i][idx[i]];
        }
        g.weights[n] = w;
        for (int i = d - 1; i >= 0; --i) {
            if (++idx[i] < ax[i].size()) break;
            idx[i] = 0;
        }
    }
    return g;
}

inline Cplx integrate(const Grid& g, const CVec& samples) {
    if (samples.size() != g.weights.size()) throw ArgumentError("integrate: sample count mismatch");
    Cplx acc = 0;
    for (int i = 0; i < g.size(); ++i) acc += g.weights[i] * samples[i];
    return acc;
}

inline Real integrate(const Grid& g, const Vec& samples) {
    if (samples.size() != g.weights.size()) throw ArgumentError("integrate: sample count mismatch");
    Real acc = 0;
    for (int i = 0; i < g.size(); ++i) acc += g.weights[i] * samples[i];
    return acc;
}

// Recommended quadrature for integrals against a concentrated factor:
// lambda = center + scale * u over u in u_box. Keeping the rule in u
// coordinates lets kit-backed integrands be sampled without the
// (lambda - center) / scale round trip.
struct PanelRule {
    Box u_box;
    int panels = 8;
    int nodes = 8;
    Point center; // empty => origin
    Real scale = 1.0;

    Grid lambda_grid() const {
        Grid u = build_grid(u_box, panels, nodes);
        Grid g = u;
        const int d = u_box.dim();
        Point c = center.size() == d ? center : Point(Point::Zero(d));
        for (int i = 0; i < u.size(); ++i)
            g.nodes.row(i) = (c + scale * u.node(i)).transpose();
        g.weights *= std::pow(scale, d);
        Vec lo(d), hi(d);
        for (int i = 0; i < d; ++i) {
            lo[i] = c[i] + scale * u_box.lo[i];
            hi[i] = c[i] + scale * u_box.hi[i];
        }
        g.box = Box(lo, hi);
        return g;
    }
};

} // namespace genkernel
