#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "genkernel/errors.hpp"
#include "genkernel/schedule.hpp"
#include "genkernel/types.hpp"

namespace genkernel {

// Roundoff floor for an accumulated quadrature/sup value: anything at or below
// scale * 2^-52 * 64 is treated as numerically zero rather than fitted.
inline Real noise_floor(Real scale) { return scale * 0x1.0p-52 * 64.0; }

struct SeminormReport {
    EpsilonSchedule schedule;
    std::vector<Real> values;
    std::vector<Real> floors;    // per-value numeric-zero threshold (0 = exact zeros only)
    Real fitted_slope = 0.0;     // log(value) vs log(1/eps)
    Real fit_r2 = 0.0;
    Real log_fit_coeff = 0.0;    // value vs ln(1/eps)
    Real log_fit_rel_resid = 1.0;
    int positives = 0;           // values above their floor
    int fit_window = 0;          // positives actually used by the fit
    bool degenerate = false;     // fewer than 4 positives, slope not meaningful

    SeminormReport(EpsilonSchedule s, std::vector<Real> v, std::vector<Real> f)
        : schedule(std::move(s)), values(std::move(v)), floors(std::move(f)) {}
};

struct GrowthClass {
    enum Tag { Moderate, Negligible, LogScale, Indeterminate } tag = Indeterminate;
    int order = 0;   // Moderate n / Negligible verified order
    Real k = 0.0;    // LogScale coefficient

    std::string str() const {
        switch (tag) {
            case Moderate: return "Moderate(" + std::to_string(order) + ")";
            case Negligible: return "Negligible(" + std::to_string(order) + ")";
            case LogScale: {
                char buf[48];
                std::snprintf(buf, sizeof buf, "LogScale(%.3g)", k);
                return buf;
            }
            default: return "Indeterminate";
        }
    }
};

namespace detail {

struct LineFit {
    Real slope = 0, intercept = 0, r2 = 1;
};

inline LineFit least_squares(const std::vector<Real>& x, const std::vector<Real>& y) {
    const int n = static_cast<int>(x.size());
    Real sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    Real den = n * sxx - sx * sx;
    f.slope = den == 0 ? 0 : (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    Real ssr = 0, sst = 0, ym = sy / n;
    for (int i = 0; i < n; ++i) {
        Real r = y[i] - (f.slope * x[i] + f.intercept);
        ssr += r * r;
        sst += (y[i] - ym) * (y[i] - ym);
    }
    f.r2 = sst == 0 ? 1.0 : 1.0 - ssr / sst;
    return f;
}

} // namespace detail

// Least-squares slope of log(value) vs log(1/eps) over entries above their
// floor. The fit window is the smallest-eps 6 positives (pre-asymptotic head
// suppressed); if that leaves fewer than 4 points, all positives are used.
inline SeminormReport fit_growth(const std::vector<Real>& values, const EpsilonSchedule& schedule,
                                 std::vector<Real> floors = {}, int window = 6) {
    if (static_cast<int>(values.size()) != schedule.size())
        throw ArgumentError("fit_growth: value/schedule length mismatch");
    for (Real v : values)
        if (!(v >= 0.0)) throw ArgumentError("fit_growth: values must be non-negative");
    if (floors.empty()) floors.assign(values.size(), 0.0);
    if (floors.size() != values.size()) throw ArgumentError("fit_growth: floor length mismatch");

    SeminormReport rep(schedule, values, floors);
    std::vector<int> pos;
    for (int i = 0; i < schedule.size(); ++i)
        if (values[i] > floors[i]) pos.push_back(i);
    rep.positives = static_cast<int>(pos.size());
    if (rep.positives < 4) {
        rep.degenerate = true;
        return rep;
    }

    // schedule is decreasing, so the tail of `pos` holds the smallest eps
    std::vector<int> use = pos;
    if (static_cast<int>(pos.size()) > window &&
        window >= 4) // smallest-eps window
        use.assign(pos.end() - window, pos.end());

    std::vector<Real> lx, ly, L, v;
    for (int i : use) {
        lx.push_back(std::log(1.0 / schedule[i]));
        ly.push_back(std::log(values[i]));
        L.push_back(std::log(1.0 / schedule[i]));
        v.push_back(values[i]);
    }
    auto power = detail::least_squares(lx, ly);
    rep.fitted_slope = power.slope;
    rep.fit_r2 = std::clamp(power.r2, 0.0, 1.0);
    rep.fit_window = static_cast<int>(use.size());

    auto lin = detail::least_squares(L, v);
    rep.log_fit_coeff = lin.slope;
    Real ssr = 0, ss = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        Real r = v[i] - (lin.slope * L[i] + lin.intercept);
        ssr += r * r;
        ss += v[i] * v[i];
    }
    rep.log_fit_rel_resid = ss == 0 ? 0.0 : std::sqrt(ssr / ss);
    return rep;
}

// Decides the growth family of a report. Order of tests: identically-zero
// (Negligible at the cap), eventually-zero tails (same), Negligible by slope,
// LogScale when the log term explains genuine variation, then Moderate.
inline GrowthClass classify(const SeminormReport& rep, int m_max = 4, Real slope_tol = 0.25) {
    if (m_max < 1) throw ArgumentError("classify: m_max must be >= 1");
    GrowthClass g;

    if (rep.positives == 0) {
        g.tag = GrowthClass::Negligible;
        g.order = m_max;
        return g;
    }
    if (rep.degenerate) {
        // few positives: negligible if the small-eps half of the schedule is all zero
        int n = rep.schedule.size();
        bool tail_zero = true;
        for (int i = n / 2; i < n; ++i)
            if (rep.values[i] > rep.floors[i]) tail_zero = false;
        if (tail_zero) {
            g.tag = GrowthClass::Negligible;
            g.order = m_max;
        }
        return g; // otherwise Indeterminate
    }

    for (int m = m_max; m >= 1; --m) {
        if (rep.fitted_slope <= -static_cast<Real>(m) + slope_tol) {
            g.tag = GrowthClass::Negligible;
            g.order = m;
            return g;
        }
    }

    if (rep.fitted_slope < slope_tol && rep.log_fit_rel_resid < slope_tol) {
        // require the ln(1/eps) term to explain real variation, otherwise the
        // values are simply bounded (Moderate(0))
        Real lmin = std::log(1.0 / rep.schedule.values.front());
        Real lmax = std::log(1.0 / rep.schedule.smallest());
        Real swing = std::abs(rep.log_fit_coeff) * (lmax - lmin);
        Real scale = 0;
        for (int i = 0; i < rep.schedule.size(); ++i) scale = std::max(scale, rep.values[i]);
        if (swing > 0.1 * scale) {
            g.tag = GrowthClass::LogScale;
            g.k = std::max(rep.log_fit_coeff, 0.0);
            return g;
        }
    }

    if (rep.fit_r2 >= 0.8 || std::abs(rep.fitted_slope) < slope_tol) {
        g.tag = GrowthClass::Moderate;
        g.order = static_cast<int>(std::ceil(std::max(rep.fitted_slope, 0.0) - 1e-9));
        return g;
    }
    return g;
}

} // namespace genkernel
