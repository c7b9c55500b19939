#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "genkernel/chebyshev.hpp"
#include "genkernel/quadrature.hpp"
#include "genkernel/smooth.hpp"

using namespace genkernel;

TEST_CASE("jet arithmetic reproduces closed-form derivatives") {
    // f(x) = exp(a x) at x0: f^(k) = a^k exp(a x0)
    Real a = -1.7, x0 = 0.4;
    Jet f = exp(Jet::affine(a * x0, a));
    for (int k = 0; k <= kJetOrder; ++k)
        CHECK(f.deriv(k) == doctest::Approx(std::pow(a, k) * std::exp(a * x0)).epsilon(1e-13));

    // g(x) = x^(-1/2) at x0 = 2: g^(k) = prod_{i<k}(-1/2 - i) * x0^(-1/2-k)
    Jet g = pow(Jet::variable(2.0), -0.5);
    Real coef = 1.0;
    for (int k = 0; k <= kJetOrder; ++k) {
        CHECK(g.deriv(k) == doctest::Approx(coef * std::pow(2.0, -0.5 - k)).epsilon(1e-12));
        coef *= (-0.5 - k);
    }

    // quotient rule sanity: (f/f) == 1
    Jet q = f / f;
    CHECK(q.value() == doctest::Approx(1.0));
    for (int k = 1; k <= kJetOrder; ++k) CHECK(std::abs(q.deriv(k)) < 1e-12);
}

TEST_CASE("smooth step partitions unity and clamps") {
    SmoothStep st{6.0, 0.5};
    CHECK(st(-0.1) == 0.0);
    CHECK(st(0.0) == 0.0);
    CHECK(st(1.0) == 1.0);
    CHECK(st(2.0) == 1.0);
    for (Real v : {0.1, 0.3, 0.5, 0.8})
        CHECK(st(v) + st(1.0 - v) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(st(0.5) == doctest::Approx(0.5));

    // derivatives vanish identically outside (0,1)
    Jet flat = st.jet(Jet::variable(1.5));
    for (int k = 1; k <= kJetOrder; ++k) CHECK(flat.deriv(k) == 0.0);
}

TEST_CASE("bump normalization and symmetry") {
    CHECK(bump(0.0) == doctest::Approx(1.0));
    CHECK(bump(0.999) > 0.0);
    CHECK(bump(1.0) == 0.0);
    CHECK(bump(-0.4) == bump(0.4));
    Jet at0 = bump_jet(Jet::variable(0.0));
    CHECK(at0.deriv(1) == doctest::Approx(0.0));
    CHECK(at0.deriv(2) < 0.0); // strict maximum

    // central difference check of the jet's first derivative at t = 0.37
    Real h = 1e-6, t = 0.37;
    Real fd = (bump(t + h) - bump(t - h)) / (2 * h);
    CHECK(bump_jet(Jet::variable(t)).deriv(1) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("cubic b-spline partition of unity and derivatives") {
    for (Real t : {-1.7, -0.3, 0.0, 0.6, 1.9}) {
        Real s = 0;
        for (int k = -3; k <= 3; ++k) s += bspline3(t - k);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
    }
    auto [x, w] = axis_rule(-2.0, 2.0, 8, 8);
    Real mass = 0;
    for (int i = 0; i < x.size(); ++i) mass += w[i] * bspline3(x[i]);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9)); // C^2 only: panel rule converges, not exact

    Real h = 1e-5;
    for (Real t : {-1.4, -0.5, 0.3, 1.6}) {
        Real fd1 = (bspline3(t + h) - bspline3(t - h)) / (2 * h);
        Real fd2 = (bspline3(t + h) - 2 * bspline3(t) + bspline3(t - h)) / (h * h);
        CHECK(bspline3_deriv(t, 1) == doctest::Approx(fd1).epsilon(1e-7));
        CHECK(bspline3_deriv(t, 2) == doctest::Approx(fd2).epsilon(1e-4));
    }
    CHECK(bspline3_deriv(2.5, 2) == 0.0);
}

TEST_CASE("cutoff chi: plateau, support, smooth transition") {
    Chi chi;
    CHECK(chi(0.0) == 1.0);
    CHECK(chi(1.0) == 1.0);
    CHECK(chi(-0.7) == 1.0);
    CHECK(chi(2.0) == 0.0);
    CHECK(chi(2.4) == 0.0);
    CHECK(chi(1.5) > 0.0);
    CHECK(chi(1.5) < 1.0);

    Real h = 1e-6;
    for (Real r : {1.3, -1.6, 1.85}) {
        Real fd = (chi(r + h) - chi(r - h)) / (2 * h);
        CHECK(chi.jet(Jet::variable(r)).deriv(1) == doctest::Approx(fd).epsilon(1e-7));
    }
    // plateau jets are exactly constant
    Jet inside = chi.jet(Jet::variable(0.5));
    for (int k = 1; k <= kJetOrder; ++k) CHECK(inside.deriv(k) == 0.0);
}

TEST_CASE("chebyshev fit round-trips a smooth function") {
    auto f = [](Real x) { return std::cos(3.0 * x) * std::exp(-x); };
    ChebSeries s = cheb_fit(f, -1.0, 2.0, 64);
    for (Real x : {-1.0, -0.33, 0.0, 0.71, 1.5, 2.0})
        CHECK(s.eval(x) == doctest::Approx(f(x)).epsilon(1e-13));
    CHECK(s.tail_decay(8) < 1e-12);
    CHECK_THROWS_AS(cheb_fit(f, 0.0, 1.0, 1), ArgumentError);
}
