#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "genkernel/growth.hpp"
#include "genkernel/schedule.hpp"

using namespace genkernel;

TEST_CASE("schedule construction and validation") {
    EpsilonSchedule s = default_schedule();
    CHECK(s.size() == 11);
    CHECK(s[0] == doctest::Approx(std::pow(2.0, -4)));
    CHECK(s.smallest() == doctest::Approx(std::pow(2.0, -14)));
    for (int i = 1; i < s.size(); ++i) CHECK(s[i] < s[i - 1]);

    CHECK_THROWS_AS(EpsilonSchedule({0.5, 0.25, 0.125}), ArgumentError);          // too short
    CHECK_THROWS_AS(EpsilonSchedule({0.5, 0.25, 0.25, 0.125}), ArgumentError);    // not decreasing
    CHECK_THROWS_AS(EpsilonSchedule({1.5, 0.5, 0.25, 0.125}), ArgumentError);     // above 1
    CHECK_THROWS_AS(make_schedule(8, 4, 2.0), ArgumentError);
}

TEST_CASE("fit recovers exact power laws") {
    EpsilonSchedule s = default_schedule();
    std::vector<Real> decay, growth;
    for (int i = 0; i < s.size(); ++i) {
        decay.push_back(std::pow(s[i], 3.0));
        growth.push_back(2.0 / s[i]);
    }
    auto rd = fit_growth(decay, s);
    CHECK(rd.fitted_slope == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(rd.fit_r2 == doctest::Approx(1.0));

    auto rg = fit_growth(growth, s);
    CHECK(rg.fitted_slope == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit window uses the smallest epsilons") {
    EpsilonSchedule s = default_schedule();
    // pre-asymptotic head: constant for the 5 largest eps, then eps^2
    std::vector<Real> v;
    for (int i = 0; i < s.size(); ++i) v.push_back(i < 5 ? 1.0 : s[i] * s[i]);
    auto r = fit_growth(v, s);
    CHECK(r.fit_window == 6);
    CHECK(r.fitted_slope == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("classification of the growth families") {
    EpsilonSchedule s = default_schedule();
    auto series = [&](auto f) {
        std::vector<Real> v;
        for (int i = 0; i < s.size(); ++i) v.push_back(f(s[i]));
        return v;
    };

    auto neg = classify(fit_growth(series([](Real e) { return std::pow(e, 6.0); }), s));
    CHECK(neg.tag == GrowthClass::Negligible);
    CHECK(neg.order == 4); // capped at m_max

    auto neg2 = classify(fit_growth(series([](Real e) { return e * e; }), s));
    CHECK(neg2.tag == GrowthClass::Negligible);
    CHECK(neg2.order == 2);

    auto mod = classify(fit_growth(series([](Real e) { return 1.0 / (e * e); }), s));
    CHECK(mod.tag == GrowthClass::Moderate);
    CHECK(mod.order == 2);

    auto log1 = classify(fit_growth(series([](Real e) { return 2.5 * std::log(1.0 / e); }), s));
    CHECK(log1.tag == GrowthClass::LogScale);
    CHECK(log1.k == doctest::Approx(2.5).epsilon(1e-9));

    // bounded nets are Moderate(0), not log-scale: no genuine log variation
    auto flat = classify(fit_growth(series([](Real) { return 0.75; }), s));
    CHECK(flat.tag == GrowthClass::Moderate);
    CHECK(flat.order == 0);
}

TEST_CASE("floors suppress roundoff-dominated entries") {
    EpsilonSchedule s = default_schedule();
    std::vector<Real> v(s.size(), 0.0), f(s.size(), 0.0);
    auto all_zero = classify(fit_growth(v, s));
    CHECK(all_zero.tag == GrowthClass::Negligible);
    CHECK(all_zero.order == 4);

    // noise below a unit-scale floor counts as zero
    for (int i = 0; i < s.size(); ++i) {
        v[i] = 1e-17;
        f[i] = noise_floor(1.0);
    }
    auto noisy = classify(fit_growth(v, s, f));
    CHECK(noisy.tag == GrowthClass::Negligible);

    // three genuine positives at the large-eps end: degenerate, not negligible
    std::vector<Real> head(s.size(), 0.0);
    head[0] = 1.0;
    head[1] = 0.5;
    head[2] = 0.25;
    head[3] = 0.125;
    auto r = fit_growth(head, s);
    CHECK(r.degenerate == false);
    std::vector<Real> three(s.size(), 0.0);
    three[0] = 1.0;
    three[1] = 0.5;
    three[2] = 0.25;
    auto rd = fit_growth(three, s);
    CHECK(rd.degenerate);
    CHECK(classify(rd).tag == GrowthClass::Negligible); // small-eps half all zero

    std::vector<Real> tail(s.size(), 0.0);
    tail[s.size() - 1] = 1.0;
    tail[s.size() - 2] = 1.0;
    auto rt = fit_growth(tail, s);
    CHECK(classify(rt).tag == GrowthClass::Indeterminate);
}

TEST_CASE("fit input validation") {
    EpsilonSchedule s = default_schedule();
    std::vector<Real> bad(s.size(), 1.0);
    bad[2] = -1.0;
    CHECK_THROWS_AS(fit_growth(bad, s), ArgumentError);
    CHECK_THROWS_AS(fit_growth(std::vector<Real>(3, 1.0), s), ArgumentError);
}
