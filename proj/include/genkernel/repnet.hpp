#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "genkernel/errors.hpp"
#include "genkernel/growth.hpp"
#include "genkernel/parallel.hpp"
#include "genkernel/quadrature.hpp"
#include "genkernel/schedule.hpp"
#include "genkernel/types.hpp"

namespace genkernel {

// One representative net u_eps(x). deriv is the single source of truth
// (alpha = 0 gives plain evaluation). scale_hint, when present, reports the
// magnitude that entered a cancellation-prone evaluation so seminorms can
// floor away pure roundoff. quad_hint, when present, recommends a rule for
// integrals against this net (concentrated factors).
struct RepNet {
    int dim = 1;
    int deriv_order = 0;
    Box domain;
    std::optional<Box> support; // nullopt = no better bound than domain
    std::function<Cplx(Real, const Point&, const MultiIndex&)> deriv;
    std::function<Real(Real, const Point&)> scale_hint;
    std::function<std::optional<PanelRule>(Real)> quad_hint;

    Cplx eval(Real eps, const Point& x) const { return deriv(eps, x, zero_alpha(dim)); }

    Cplx eval_deriv(Real eps, const Point& x, const MultiIndex& alpha) const {
        if (alpha_order(alpha) > deriv_order)
            throw CapabilityError("net: derivative order exceeds what this net provides");
        return deriv(eps, x, alpha);
    }

    Box effective_support() const { return support ? *support : domain; }
};

struct GeneralizedNumberNet {
    std::function<Cplx(Real)> value;

    CVec sampled(const EpsilonSchedule& s) const {
        CVec v(s.size());
        for (int i = 0; i < s.size(); ++i) v[i] = value(s[i]);
        return v;
    }
};

inline std::vector<MultiIndex> multi_indices(int dim, int max_order) {
    std::vector<MultiIndex> out;
    MultiIndex a = MultiIndex::Zero(dim);
    // graded enumeration, lexicographic within each total order
    std::function<void(int, int)> rec = [&](int axis, int left) {
        if (axis == dim - 1) {
            a[axis] = left;
            out.push_back(a);
            return;
        }
        for (int k = left; k >= 0; --k) {
            a[axis] = k;
            rec(axis + 1, left - k);
        }
    };
    for (int total = 0; total <= max_order; ++total) rec(0, total);
    return out;
}

inline Real binomial(int n, int k) {
    Real r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// ---- algebra ----------------------------------------------------------

inline RepNet add(const RepNet& a, const RepNet& b) {
    if (a.dim != b.dim) throw ArgumentError("add: dimension mismatch");
    RepNet r;
    r.dim = a.dim;
    r.deriv_order = std::min(a.deriv_order, b.deriv_order);
    r.domain = a.domain;
    if (a.support && b.support) r.support = hull(*a.support, *b.support);
    auto da = a.deriv, db = b.deriv;
    r.deriv = [da, db](Real eps, const Point& x, const MultiIndex& al) {
        return da(eps, x, al) + db(eps, x, al);
    };
    auto sa = a.scale_hint, sb = b.scale_hint;
    auto ea = a.deriv, eb = b.deriv;
    r.scale_hint = [sa, sb, ea, eb, d = a.dim](Real eps, const Point& x) {
        Real va = sa ? sa(eps, x) : std::abs(ea(eps, x, MultiIndex::Zero(d)));
        Real vb = sb ? sb(eps, x) : std::abs(eb(eps, x, MultiIndex::Zero(d)));
        return va + vb;
    };
    auto qa = a.quad_hint, qb = b.quad_hint;
    r.quad_hint = [qa, qb](Real eps) -> std::optional<PanelRule> {
        if (qa)
            if (auto h = qa(eps)) return h;
        if (qb) return qb(eps);
        return std::nullopt;
    };
    return r;
}

inline RepNet sub(const RepNet& a, const RepNet& b) {
    RepNet neg = b;
    auto db = b.deriv;
    neg.deriv = [db](Real eps, const Point& x, const MultiIndex& al) { return -db(eps, x, al); };
    return add(a, neg);
}

inline RepNet mul(const RepNet& a, const RepNet& b) {
    if (a.dim != b.dim) throw ArgumentError("mul: dimension mismatch");
    RepNet r;
    r.dim = a.dim;
    r.deriv_order = std::min(a.deriv_order, b.deriv_order);
    r.domain = a.domain;
    if (a.support && b.support) { // support of a product: intersection
        Vec lo = a.support->lo.cwiseMax(b.support->lo);
        Vec hi = a.support->hi.cwiseMin(b.support->hi);
        bool empty = false;
        for (int i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) empty = true;
        if (!empty) r.support = Box(lo, hi);
    } else if (a.support) {
        r.support = a.support;
    } else if (b.support) {
        r.support = b.support;
    }
    auto da = a.deriv, db = b.deriv;
    int dim = a.dim;
    r.deriv = [da, db, dim](Real eps, const Point& x, const MultiIndex& al) {
        // Leibniz over the multi-index lattice [0, al]
        Cplx acc = 0;
        MultiIndex beta = MultiIndex::Zero(dim);
        while (true) {
            Real coef = 1;
            for (int i = 0; i < dim; ++i) coef *= binomial(al[i], beta[i]);
            acc += coef * da(eps, x, beta) * db(eps, x, MultiIndex(al - beta));
            int axis = 0;
            while (axis < dim) {
                if (beta[axis] < al[axis]) {
                    ++beta[axis];
                    break;
                }
                beta[axis] = 0;
                ++axis;
            }
            if (axis == dim) break;
        }
        return acc;
    };
    auto qa = a.quad_hint, qb = b.quad_hint;
    r.quad_hint = [qa, qb](Real eps) -> std::optional<PanelRule> {
        if (qa)
            if (auto h = qa(eps)) return h;
        if (qb) return qb(eps);
        return std::nullopt;
    };
    return r;
}

inline RepNet scale(Cplx c, const RepNet& a) {
    RepNet r = a;
    auto da = a.deriv;
    r.deriv = [c, da](Real eps, const Point& x, const MultiIndex& al) { return c * da(eps, x, al); };
    auto sa = a.scale_hint;
    if (sa) {
        Real m = std::abs(c);
        r.scale_hint = [m, sa](Real eps, const Point& x) { return m * sa(eps, x); };
    }
    return r;
}

inline RepNet scale(const GeneralizedNumberNet& c, const RepNet& a) {
    RepNet r = a;
    auto da = a.deriv;
    auto cv = c.value;
    r.deriv = [cv, da](Real eps, const Point& x, const MultiIndex& al) {
        return cv(eps) * da(eps, x, al);
    };
    auto sa = a.scale_hint;
    if (sa) {
        r.scale_hint = [cv, sa](Real eps, const Point& x) { return std::abs(cv(eps)) * sa(eps, x); };
    }
    return r;
}

inline RepNet zero_net(const Box& domain) {
    RepNet r;
    r.dim = domain.dim();
    r.deriv_order = 64;
    r.domain = domain;
    r.deriv = [](Real, const Point&, const MultiIndex&) { return Cplx(0.0); };
    return r;
}

// ---- seminorms and integrals ------------------------------------------

struct SeminormSelector {
    enum Kind { PK, HM } kind = PK;
    int order = 0; // l for p_{K,l}, m for the L2 family
};

// sup over grid nodes and |alpha| <= l of |d^alpha u_eps|
inline SeminormReport seminorm_pKl(const RepNet& u, const Box& K, int l, const Grid& grid,
                                   const EpsilonSchedule& schedule) {
    if (l > u.deriv_order) throw CapabilityError("seminorm_pKl: derivative order unavailable");
    if (grid.box.dim() != u.dim) throw ArgumentError("seminorm_pKl: grid dimension mismatch");
    auto alphas = multi_indices(u.dim, l);
    std::vector<Real> vals(schedule.size()), floors(schedule.size(), 0.0);
    parallel_for(schedule.size(), [&](int i) {
        Real eps = schedule[i];
        Real m = 0, sc = 0;
        for (int n = 0; n < grid.size(); ++n) {
            Point x = grid.node(n);
            if (!K.contains(x, 1e-12)) continue;
            for (const auto& al : alphas) m = std::max(m, std::abs(u.deriv(eps, x, al)));
            if (u.scale_hint) sc = std::max(sc, u.scale_hint(eps, x));
        }
        vals[i] = m;
        floors[i] = noise_floor(sc);
    });
    return fit_growth(vals, schedule, floors);
}

// sum over |alpha| <= m of the quadrature L2 norm of d^alpha u_eps
inline SeminormReport seminorm_Hm(const RepNet& u, int m, const Grid& grid,
                                  const EpsilonSchedule& schedule) {
    if (m > u.deriv_order) throw CapabilityError("seminorm_Hm: derivative order unavailable");
    if (!u.support && volume(u.domain) > 1e12)
        throw CapabilityError("seminorm_Hm: unbounded support");
    auto alphas = multi_indices(u.dim, m);
    std::vector<Real> vals(schedule.size()), floors(schedule.size(), 0.0);
    parallel_for(schedule.size(), [&](int i) {
        Real eps = schedule[i];
        Real total = 0;
        Real sc2 = 0;
        for (const auto& al : alphas) {
            Real acc = 0;
            for (int n = 0; n < grid.size(); ++n) {
                Cplx v = u.deriv(eps, grid.node(n), al);
                acc += grid.weights[n] * std::norm(v);
            }
            total += std::sqrt(acc);
        }
        if (u.scale_hint) {
            for (int n = 0; n < grid.size(); ++n) {
                Real s = u.scale_hint(eps, grid.node(n));
                sc2 += grid.weights[n] * s * s;
            }
        }
        vals[i] = total;
        floors[i] = noise_floor(static_cast<Real>(alphas.size()) * std::sqrt(sc2));
    });
    return fit_growth(vals, schedule, floors);
}

inline GeneralizedNumberNet integrate_compact(const RepNet& u, const Box& K, const Grid& grid) {
    if (!u.domain.contains_box(K, 1e-12)) throw ArgumentError("integrate_compact: K outside domain");
    auto du = u.deriv;
    int dim = u.dim;
    return GeneralizedNumberNet{[du, grid, dim](Real eps) {
        Cplx acc = 0;
        MultiIndex z = MultiIndex::Zero(dim);
        for (int n = 0; n < grid.size(); ++n) acc += grid.weights[n] * du(eps, grid.node(n), z);
        return acc;
    }};
}

inline GeneralizedNumberNet scalar_product(const RepNet& f, const RepNet& g, const Grid& grid) {
    if (f.dim != g.dim) throw ArgumentError("scalar_product: dimension mismatch");
    auto df = f.deriv, dg = g.deriv;
    int dim = f.dim;
    return GeneralizedNumberNet{[df, dg, grid, dim](Real eps) {
        Cplx acc = 0;
        MultiIndex z = MultiIndex::Zero(dim);
        for (int n = 0; n < grid.size(); ++n)
            acc += grid.weights[n] * df(eps, grid.node(n), z) * std::conj(dg(eps, grid.node(n), z));
        return acc;
    }};
}

// difference of nets negligible at order m_max?
inline std::pair<bool, SeminormReport> is_null_difference(const RepNet& a, const RepNet& b,
                                                          const SeminormSelector& sel, const Box& box,
                                                          int m_max, const EpsilonSchedule& schedule,
                                                          int grid_panels = 8, int grid_nodes = 8) {
    if (a.dim != b.dim) throw ArgumentError("is_null_difference: dimension mismatch");
    RepNet d = sub(a, b);
    Grid grid = build_grid(box, grid_panels, grid_nodes);
    SeminormReport rep = sel.kind == SeminormSelector::PK
                             ? seminorm_pKl(d, box, sel.order, grid, schedule)
                             : seminorm_Hm(d, sel.order, grid, schedule);
    GrowthClass g = classify(rep, m_max);
    bool ok = g.tag == GrowthClass::Negligible && g.order >= m_max;
    return {ok, rep};
}

// outer dyadic-cell hull of the region where u is not negligible
inline std::optional<Box> support_estimate(const RepNet& u, const Box& domain, int cells, int m_test,
                                           const EpsilonSchedule& schedule) {
    if (cells < 2) throw ArgumentError("support_estimate: need cells >= 2");
    const int d = u.dim;
    std::vector<int> idx(d, 0);
    std::optional<Box> found;
    while (true) {
        Vec lo(d), hi(d);
        for (int i = 0; i < d; ++i) {
            Real w = (domain.hi[i] - domain.lo[i]) / cells;
            lo[i] = domain.lo[i] + idx[i] * w;
            hi[i] = lo[i] + w;
        }
        Box cell(lo, hi);
        Grid g = build_grid(cell, 2, 3);
        SeminormReport rep = seminorm_pKl(u, cell, 0, g, schedule);
        GrowthClass cls = classify(rep, m_test);
        bool null_cell = cls.tag == GrowthClass::Negligible && cls.order >= m_test;
        if (!null_cell) found = found ? hull(*found, cell) : cell;
        int axis = 0;
        while (axis < d) {
            if (++idx[axis] < cells) break;
            idx[axis] = 0;
            ++axis;
        }
        if (axis == d) break;
    }
    return found;
}

// central finite differences for constructors without analytic derivatives
inline std::function<Cplx(Real, const Point&, const MultiIndex&)>
make_fd_deriv(std::function<Cplx(Real, const Point&)> eval, Real h) {
    auto core = std::make_shared<std::function<Cplx(Real, const Point&, const MultiIndex&)>>();
    *core = [eval, h, core](Real eps, const Point& x, const MultiIndex& al) -> Cplx {
        int axis = -1;
        for (int i = 0; i < al.size(); ++i)
            if (al[i] > 0) axis = i;
        if (axis < 0) return eval(eps, x);
        MultiIndex lower = al;
        lower[axis] -= 1;
        Point xp = x, xm = x;
        xp[axis] += h;
        xm[axis] -= h;
        return ((*core)(eps, xp, lower) - (*core)(eps, xm, lower)) / (2.0 * h);
    };
    return [core](Real eps, const Point& x, const MultiIndex& al) { return (*core)(eps, x, al); };
}

} // namespace genkernel
