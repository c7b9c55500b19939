#pragma once

#include <array>
#include <cmath>

#include "genkernel/types.hpp"

namespace genkernel {

// Truncated Taylor coefficients c[k] = f^(k)(x0)/k! carried through arithmetic;
// deriv(k) recovers f^(k). Order 6 covers every derivative the library hands out.
constexpr int kJetOrder = 6;

struct Jet {
    std::array<Real, kJetOrder + 1> c{};

    static Jet constant(Real v) {
        Jet j;
        j.c[0] = v;
        return j;
    }
    static Jet variable(Real v) {
        Jet j;
        j.c[0] = v;
        j.c[1] = 1.0;
        return j;
    }
    // seed for an affine inner variable a + b*t
    static Jet affine(Real a, Real b) {
        Jet j;
        j.c[0] = a;
        j.c[1] = b;
        return j;
    }

    Real value() const { return c[0]; }
    Real deriv(int k) const {
        Real f = 1;
        for (int i = 2; i <= k; ++i) f *= i;
        return c[k] * f;
    }
};

inline Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    for (int k = 0; k <= kJetOrder; ++k) r.c[k] = a.c[k] + b.c[k];
    return r;
}

inline Jet operator-(const Jet& a, const Jet& b) {
    Jet r;
    for (int k = 0; k <= kJetOrder; ++k) r.c[k] = a.c[k] - b.c[k];
    return r;
}

inline Jet operator-(const Jet& a) {
    Jet r;
    for (int k = 0; k <= kJetOrder; ++k) r.c[k] = -a.c[k];
    return r;
}

inline Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int k = 0; k <= kJetOrder; ++k) {
        Real s = 0;
        for (int i = 0; i <= k; ++i) s += a.c[i] * b.c[k - i];
        r.c[k] = s;
    }
    return r;
}

inline Jet operator*(Real s, const Jet& a) {
    Jet r;
    for (int k = 0; k <= kJetOrder; ++k) r.c[k] = s * a.c[k];
    return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
    Jet r;
    r.c[0] = a.c[0] / b.c[0];
    for (int k = 1; k <= kJetOrder; ++k) {
        Real s = a.c[k];
        for (int i = 0; i < k; ++i) s -= r.c[i] * b.c[k - i];
        r.c[k] = s / b.c[0];
    }
    return r;
}

inline Jet exp(const Jet& a) {
    Jet r;
    r.c[0] = std::exp(a.c[0]);
    for (int k = 1; k <= kJetOrder; ++k) {
        Real s = 0;
        for (int i = 1; i <= k; ++i) s += i * a.c[i] * r.c[k - i];
        r.c[k] = s / k;
    }
    return r;
}

// a^alpha for a > 0, real alpha
inline Jet pow(const Jet& a, Real alpha) {
    Jet r;
    r.c[0] = std::pow(a.c[0], alpha);
    for (int k = 1; k <= kJetOrder; ++k) {
        Real s = 0;
        for (int i = 1; i <= k; ++i)
            s += (alpha * i - (k - i)) * a.c[i] * r.c[k - i];
        r.c[k] = s / (k * a.c[0]);
    }
    return r;
}

} // namespace genkernel
