#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "genkernel/quadrature.hpp"

using namespace genkernel;

TEST_CASE("gauss-legendre is exact through degree 2n-1") {
    auto [x, w] = gauss_legendre(5);
    Real m8 = 0, m9 = 0;
    for (int i = 0; i < 5; ++i) {
        m8 += w[i] * std::pow(x[i], 8);
        m9 += w[i] * std::pow(x[i], 9);
    }
    CHECK(m8 == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
    CHECK(std::abs(m9) < 1e-16); // odd, and nodes are exactly mirrored
    CHECK(w.sum() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(gauss_legendre(0), ArgumentError);
    CHECK_THROWS_AS(gauss_legendre(65), ArgumentError);
}

TEST_CASE("axis rule node symmetry is exact") {
    auto [x, w] = axis_rule(-1.0, 1.0, 3, 5);
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        CHECK(x[i] == -x[n - 1 - i]);
        CHECK(w[i] == w[n - 1 - i]);
    }
}

TEST_CASE("composite rule integrates sin over [0,pi]") {
    auto [x, w] = axis_rule(0.0, M_PI, 8, 8);
    Real acc = 0;
    for (int i = 0; i < x.size(); ++i) acc += w[i] * std::sin(x[i]);
    CHECK(acc == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("tensor grid integrates a complex exponential to zero") {
    Grid g = build_grid(box2(0.0, 2.0 * M_PI, 0.0, 1.0), 8, 8);
    CHECK(g.size() == 64 * 64);
    CHECK(g.weights.sum() == doctest::Approx(2.0 * M_PI).epsilon(1e-14));
    CVec samples(g.size());
    for (int i = 0; i < g.size(); ++i) samples[i] = std::exp(Cplx(0.0, g.node(i)[0]));
    CHECK(std::abs(integrate(g, samples)) < 1e-13);
}

TEST_CASE("box algebra") {
    Box a = box1(-1.0, 2.0), b = box1(1.0, 3.0);
    CHECK(volume(a) == doctest::Approx(3.0));
    CHECK(hull(a, b).lo[0] == -1.0);
    CHECK(hull(a, b).hi[0] == 3.0);
    CHECK(inflate(a, 0.5).hi[0] == 2.5);

    auto c = intersect(a, b);
    REQUIRE(c.has_value());
    CHECK(c->lo[0] == 1.0);
    CHECK(c->hi[0] == 2.0);
    CHECK(!intersect(box1(0.0, 1.0), box1(2.0, 3.0)).has_value());

    Box p = product_box(a, b);
    CHECK(p.dim() == 2);
    CHECK(volume(p) == doctest::Approx(6.0));
    CHECK(boxes_equal(a, box1(-1.0, 2.0)));
    CHECK(!boxes_equal(a, b));

    CHECK(a.contains(0.5 * (a.lo + a.hi)));
    CHECK(!a.contains(b.hi));
    CHECK_THROWS_AS(box1(1.0, 1.0), ArgumentError);
}

TEST_CASE("panel rule maps u coordinates onto lambda") {
    PanelRule r;
    r.u_box = box1(-2.0, 2.0);
    r.panels = 8;
    r.nodes = 8;
    r.center = Point::Constant(1, 3.0);
    r.scale = 0.5;
    Grid g = r.lambda_grid();
    CHECK(g.box.lo[0] == doctest::Approx(2.0));
    CHECK(g.box.hi[0] == doctest::Approx(4.0));
    Vec s(g.size());
    for (int i = 0; i < g.size(); ++i) s[i] = g.node(i)[0] * g.node(i)[0];
    CHECK(integrate(g, s) == doctest::Approx(56.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("grid construction validation") {
    CHECK_THROWS_AS(build_grid(box1(0.0, 1.0), 0, 8), ArgumentError);
    CHECK_THROWS_AS(build_grid(box1(0.0, 1.0), 4, 1), ArgumentError);
    CHECK_THROWS_AS(build_grid(box1(0.0, 1.0), 4, 13), ArgumentError);
}
