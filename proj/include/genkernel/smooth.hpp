#pragma once

#include <cmath>

#include "genkernel/jet.hpp"
#include "genkernel/types.hpp"

namespace genkernel {

// C-infinity step: 0 for v <= 0, 1 for v >= 1, exp(-s/v^p) ratio between.
// Shared by the spectral plateau, the cutoff chi and the boundary cutoff.
struct SmoothStep {
    Real s = 6.0;
    Real p = 0.5;

    Real operator()(Real v) const { return jet(Jet::variable(v)).value(); }

    Jet jet(const Jet& v) const {
        if (v.value() <= 0.0) return Jet::constant(0.0);
        if (v.value() >= 1.0) return Jet::constant(1.0);
        Jet a = -s * pow(v, -p);
        Jet one = Jet::constant(1.0);
        Jet b = -s * pow(one - v, -p);
        // exp(a)/(exp(a)+exp(b)) with the larger exponent factored out
        if (a.value() >= b.value()) {
            Jet e = exp(b - a);
            return Jet::constant(1.0) / (Jet::constant(1.0) + e);
        }
        Jet e = exp(a - b);
        return e / (Jet::constant(1.0) + e);
    }
};

// unit bump: exp(1 - 1/(1-t^2)) on |t|<1, 0 outside; peak value 1 at t=0
inline Jet bump_jet(const Jet& t) {
    if (std::abs(t.value()) >= 1.0) return Jet::constant(0.0);
    Jet one = Jet::constant(1.0);
    return exp(one - one / (one - t * t));
}

inline Real bump(Real t) { return bump_jet(Jet::variable(t)).value(); }

// cubic B-spline centered at 0, support [-2,2], C^2
inline Real bspline3(Real t) {
    Real a = std::abs(t);
    if (a >= 2.0) return 0.0;
    if (a >= 1.0) {
        Real u = 2.0 - a;
        return u * u * u / 6.0;
    }
    return (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
}

inline Real bspline3_deriv(Real t, int k) {
    if (k == 0) return bspline3(t);
    Real a = std::abs(t);
    Real sign = t < 0 ? -1.0 : 1.0;
    if (a >= 2.0) return 0.0;
    auto left = [&](int kk) -> Real { // on 1 <= a < 2, f(a) = (2-a)^3/6
        Real u = 2.0 - a;
        switch (kk) {
            case 1: return -u * u / 2.0;
            case 2: return u;
            case 3: return -1.0;
            default: return 0.0;
        }
    };
    auto mid = [&](int kk) -> Real { // on a < 1, f(a) = (4 - 6a^2 + 3a^3)/6
        switch (kk) {
            case 1: return -2.0 * a + 1.5 * a * a;
            case 2: return -2.0 + 3.0 * a;
            case 3: return 3.0;
            default: return 0.0;
        }
    };
    Real da = a >= 1.0 ? left(k) : mid(k);
    return (k % 2 == 1 ? sign : 1.0) * da;
}

// shrinking cutoff: 1 on B(0,1), 0 outside B(0,2)
struct Chi {
    SmoothStep step{1.0, 1.0};

    Real operator()(Real r) const { return step(2.0 - std::abs(r)); }

    // jet in one coordinate at a point with radius |x|; d=1 or points inside
    // the plateau/zero region (where all derivatives vanish) only
    Jet jet(const Jet& x) const {
        Real r = std::abs(x.value());
        if (r <= 1.0) return Jet::constant(1.0);
        if (r >= 2.0) return Jet::constant(0.0);
        Jet ax = x.value() < 0 ? -x : x;
        return step.jet(Jet::constant(2.0) - ax);
    }
};

} // namespace genkernel
