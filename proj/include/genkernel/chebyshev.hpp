#pragma once

#include <cmath>
#include <functional>

#include "genkernel/errors.hpp"
#include "genkernel/types.hpp"

namespace genkernel {

// Chebyshev interpolant on [a,b] built from samples at the n+1 extrema points.
struct ChebSeries {
    Real a = -1, b = 1;
    Vec coef; // c_0 .. c_n, T_k convention with halved first/last in the projection

    Real eval(Real x) const {
        const int n = static_cast<int>(coef.size()) - 1;
        Real t = (2.0 * x - (a + b)) / (b - a);
        Real b1 = 0, b2 = 0;
        for (int k = n; k >= 1; --k) {
            Real b0 = 2.0 * t * b1 - b2 + coef[k];
            b2 = b1;
            b1 = b0;
        }
        return t * b1 - b2 + coef[0];
    }

    // max |coef| over the last `tail` entries, relative to the overall max
    Real tail_decay(int tail = 8) const {
        const int n = static_cast<int>(coef.size());
        Real all = 0, last = 0;
        for (int i = 0; i < n; ++i) {
            all = std::max(all, std::abs(coef[i]));
            if (i >= n - tail) last = std::max(last, std::abs(coef[i]));
        }
        return all == 0 ? 0.0 : last / all;
    }
};

inline ChebSeries cheb_fit(const std::function<Real(Real)>& f, Real a, Real b, int degree) {
    if (degree < 2) throw ArgumentError("cheb_fit: degree too small");
    const int n = degree;
    Vec samples(n + 1);
    for (int j = 0; j <= n; ++j) {
        Real t = std::cos(M_PI * j / n);
        samples[j] = f(0.5 * (a + b) + 0.5 * (b - a) * t);
    }
    ChebSeries s;
    s.a = a;
    s.b = b;
    s.coef.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        Real acc = 0.5 * (samples[0] + (k % 2 == 0 ? samples[n] : -samples[n]));
        for (int j = 1; j < n; ++j) acc += samples[j] * std::cos(M_PI * k * j / n);
        s.coef[k] = 2.0 * acc / n;
    }
    s.coef[0] *= 0.5;
    s.coef[n] *= 0.5;
    return s;
}

} // namespace genkernel
