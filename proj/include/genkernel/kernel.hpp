#pragma once

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "genkernel/mollifier.hpp"
#include "genkernel/repnet.hpp"

namespace genkernel {

namespace detail {

inline Point concat(const Point& a, const Point& b) {
    Point p(a.size() + b.size());
    p << a, b;
    return p;
}

inline MultiIndex concat_mi(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex m(a.size() + b.size());
    m << a, b;
    return m;
}

inline Box box_head(const Box& prod, int m) {
    return Box(prod.lo.head(m), prod.hi.head(m));
}

inline Box box_tail(const Box& prod, int n) {
    return Box(prod.lo.tail(n), prod.hi.tail(n));
}

// cache key for kernel rows/columns: derivative order code then coordinate bits
using SliceKey = std::vector<unsigned long long>;

inline SliceKey slice_key(const Point& x, const MultiIndex& al) {
    SliceKey k;
    unsigned long long code = 0;
    for (int i = 0; i < al.size(); ++i) code = code * 16 + static_cast<unsigned long long>(al[i]);
    k.push_back(code);
    for (int i = 0; i < x.size(); ++i) {
        unsigned long long bits;
        Real v = x[i];
        std::memcpy(&bits, &v, sizeof bits);
        k.push_back(bits);
    }
    return k;
}

inline Jet cos_jet(Real x, Real a, Real b) {
    Jet j;
    Real f = 1;
    for (int k = 0; k <= kJetOrder; ++k) {
        if (k > 1) f *= k;
        j.c[k] = std::pow(a, k) * std::cos(a * x + b + k * M_PI_2) / f;
    }
    return j;
}

} // namespace detail

enum class SupportMode { Witness, Global, L2 };

// kernel H(x, y) as a net on a product box, plus the support bookkeeping the
// operator calculus needs: a witness procedure (or global boxes), optional
// slot-local quadrature rules, and an exact shifted-evaluation path for
// convolution kernels
struct KernelNet {
    RepNet base;
    int x_dim = 1, y_dim = 1;
    SupportMode mode = SupportMode::Witness;
    std::function<Box(const Box&)> witness_fn;             // Witness: O1 in X -> K2 in Y
    std::optional<Box> box_x, box_y;                       // Global: K1, K2
    std::function<PanelRule(Real, const Point&)> y_rule;   // rule covering H(x, .)
    std::function<PanelRule(Real, const Point&)> x_rule;   // rule covering H(., y)
    std::function<std::optional<PanelRule>(Real)> y_hint;  // x-independent slot rules
    std::function<std::optional<PanelRule>(Real)> x_hint;
    // exact evaluation at y = rule.center + rule.scale*u for rules produced by
    // y_rule: value of d^kx_x d^ky_y H(x, y) with no coordinate round trip
    std::function<Cplx(Real, const Point&, Real, int, int)> shift_eval;

    Box domain_x() const { return detail::box_head(base.domain, x_dim); }
    Box domain_y() const { return detail::box_tail(base.domain, y_dim); }

    Cplx eval(Real eps, const Point& x, const Point& y) const {
        return base.deriv(eps, detail::concat(x, y), zero_alpha(x_dim + y_dim));
    }

    Cplx eval_deriv(Real eps, const Point& x, const Point& y, const MultiIndex& ax,
                    const MultiIndex& ay) const {
        return base.eval_deriv(eps, detail::concat(x, y), detail::concat_mi(ax, ay));
    }

    bool has_witness() const { return mode != SupportMode::L2; }

    Box witness_box(const Box& O1) const {
        if (mode == SupportMode::Global) return *box_y;
        if (mode == SupportMode::L2) throw CapabilityError("kernel: L2-mode kernel has no support witness");
        Box w = witness_fn(O1);
        auto clipped = intersect(w, domain_y());
        return clipped ? *clipped : w;
    }

    // best static bound on the y-slot support
    std::optional<Box> y_support() const {
        if (mode == SupportMode::Global) return box_y;
        if (mode == SupportMode::Witness) return witness_box(domain_x());
        if (base.support) return detail::box_tail(*base.support, y_dim);
        return std::nullopt;
    }

    std::optional<Box> x_support() const {
        if (mode == SupportMode::Global) return box_x;
        if (base.support) return detail::box_head(*base.support, x_dim);
        return std::nullopt;
    }
};

inline PanelRule static_box_rule(const Box& B, int panels, int nodes) {
    PanelRule r;
    Point c = B.center();
    r.u_box = Box(B.lo - c, B.hi - c);
    r.panels = panels;
    r.nodes = nodes;
    r.center = c;
    r.scale = 1.0;
    return r;
}

// ---- constructors ------------------------------------------------------

struct Factor1D {
    std::function<Jet(Real)> jet;
    Box support; // 1-d
};

inline Factor1D bump_factor(Real center, Real halfwidth, Real amp = 1.0) {
    Factor1D f;
    f.jet = [center, halfwidth, amp](Real x) {
        Jet t = Jet::affine((x - center) / halfwidth, 1.0 / halfwidth);
        return Jet::constant(amp) * bump_jet(t);
    };
    f.support = box1(center - halfwidth, center + halfwidth);
    return f;
}

inline Factor1D cos_bump_factor(Real center, Real halfwidth, Real freq, Real phase, Real amp = 1.0) {
    Factor1D f;
    f.jet = [=](Real x) {
        Jet t = Jet::affine((x - center) / halfwidth, 1.0 / halfwidth);
        return Jet::constant(amp) * detail::cos_jet(x, freq, phase) * bump_jet(t);
    };
    f.support = box1(center - halfwidth, center + halfwidth);
    return f;
}

struct SeparableTerm {
    Cplx coeff{1.0, 0.0};
    Factor1D fx, fy;
};

// H(x,y) = sum_t c_t fx_t(x) fy_t(y); globally supported in the factor hulls
inline KernelNet separable_kernel(std::vector<SeparableTerm> terms, const Box& X, const Box& Y,
                                  int panels = 8, int nodes = 8) {
    if (terms.empty()) throw ArgumentError("separable_kernel: no terms");
    KernelNet H;
    H.x_dim = X.dim();
    H.y_dim = Y.dim();
    if (H.x_dim != 1 || H.y_dim != 1) throw CapabilityError("separable_kernel: 1-d slots");
    Box sx = terms[0].fx.support, sy = terms[0].fy.support;
    for (const auto& t : terms) {
        sx = hull(sx, t.fx.support);
        sy = hull(sy, t.fy.support);
    }
    auto cx = intersect(sx, X), cy = intersect(sy, Y);
    if (!cx || !cy) throw ArgumentError("separable_kernel: factor support outside domain");
    H.mode = SupportMode::Global;
    H.box_x = *cx;
    H.box_y = *cy;
    auto tptr = std::make_shared<std::vector<SeparableTerm>>(std::move(terms));
    H.base.dim = 2;
    H.base.deriv_order = kJetOrder;
    H.base.domain = product_box(X, Y);
    H.base.support = product_box(*cx, *cy);
    H.base.deriv = [tptr](Real, const Point& p, const MultiIndex& al) {
        Cplx acc = 0;
        for (const auto& t : *tptr) acc += t.coeff * t.fx.jet(p[0]).deriv(al[0]) * t.fy.jet(p[1]).deriv(al[1]);
        return acc;
    };
    H.base.scale_hint = [tptr](Real, const Point& p) {
        Real acc = 0;
        for (const auto& t : *tptr)
            acc += std::abs(t.coeff) * std::abs(t.fx.jet(p[0]).value()) * std::abs(t.fy.jet(p[1]).value());
        return acc;
    };
    PanelRule ry = static_box_rule(*cy, panels, nodes), rx = static_box_rule(*cx, panels, nodes);
    H.y_rule = [ry](Real, const Point&) { return ry; };
    H.x_rule = [rx](Real, const Point&) { return rx; };
    H.y_hint = [ry](Real) -> std::optional<PanelRule> { return ry; };
    H.x_hint = [rx](Real) -> std::optional<PanelRule> { return rx; };
    return H;
}

inline KernelNet rank1_kernel(const Factor1D& phi, const Box& X, const Box& Y, int panels = 8,
                              int nodes = 8) {
    return separable_kernel({SeparableTerm{Cplx(1.0, 0.0), phi, phi}}, X, Y, panels, nodes);
}

// identity-candidate kernel H_eps(x,y) = Theta_eps(x - y)
inline KernelNet theta_diff_kernel(const MollifierKit& kit, const Box& X, const Box& Y,
                                   Real eps_max = 1.0 / 16) {
    if (X.dim() != 1 || Y.dim() != 1) throw CapabilityError("theta_diff_kernel: 1-d slots");
    auto kitp = std::make_shared<MollifierKit>(kit);
    KernelNet H;
    H.x_dim = H.y_dim = 1;
    H.mode = SupportMode::Witness;
    Real spread = std::min(eps_max * kit.support_radius,
                           2.0 / std::abs(std::log(eps_max))); // support of Theta, x units
    H.witness_fn = [spread](const Box& O1) { return inflate(O1, spread); };
    H.base.dim = 2;
    H.base.deriv_order = kJetOrder;
    H.base.domain = product_box(X, Y);
    H.base.deriv = [kitp](Real eps, const Point& p, const MultiIndex& al) -> Cplx {
        Real u = (p[0] - p[1]) / eps;
        if (std::abs(u) > kitp->clip_radius(eps)) return 0.0;
        Real sign = al[1] % 2 == 0 ? 1.0 : -1.0;
        return sign * kitp->theta_scaled_deriv(eps, u, al[0] + al[1]);
    };
    H.base.scale_hint = [kitp](Real eps, const Point& p) -> Real {
        Real u = (p[0] - p[1]) / eps;
        if (std::abs(u) > kitp->clip_radius(eps)) return 0.0;
        return 0.7 / eps;
    };
    H.y_rule = [kitp](Real eps, const Point& x) { return kitp->theta_rule(eps, x[0]); };
    H.x_rule = [kitp](Real eps, const Point& y) { return kitp->theta_rule(eps, y[0]); };
    H.shift_eval = [kitp](Real eps, const Point&, Real u, int kx, int ky) -> Cplx {
        // y = x + eps*u, so the profile argument of Theta(x - y) is -u
        Real sign = ky % 2 == 0 ? 1.0 : -1.0;
        return sign * kitp->theta_scaled_deriv(eps, -u, kx + ky);
    };
    return H;
}

// H(x,y) = u1(x) u2(y) for embedded-distribution factors
inline KernelNet tensor_kernel(const RepNet& u1, const RepNet& u2) {
    if (u1.dim != 1 || u2.dim != 1) throw CapabilityError("tensor_kernel: 1-d factors");
    KernelNet H;
    H.x_dim = H.y_dim = 1;
    H.mode = SupportMode::Global;
    H.box_x = u1.effective_support();
    H.box_y = u2.effective_support();
    H.base.dim = 2;
    H.base.deriv_order = std::min(u1.deriv_order, u2.deriv_order);
    H.base.domain = product_box(u1.domain, u2.domain);
    H.base.support = product_box(*H.box_x, *H.box_y);
    H.base.deriv = [u1, u2](Real eps, const Point& p, const MultiIndex& al) {
        return u1.deriv(eps, point1(p[0]), MultiIndex::Constant(1, al[0])) *
               u2.deriv(eps, point1(p[1]), MultiIndex::Constant(1, al[1]));
    };
    H.base.scale_hint = [u1, u2](Real eps, const Point& p) {
        Point a = point1(p[0]), b = point1(p[1]);
        Real v1 = std::abs(u1.eval(eps, a)), v2 = std::abs(u2.eval(eps, b));
        Real s1 = u1.scale_hint ? u1.scale_hint(eps, a) : 0.0;
        Real s2 = u2.scale_hint ? u2.scale_hint(eps, b) : 0.0;
        return (v1 + s1) * (v2 + s2);
    };
    if (u1.quad_hint) {
        auto q = u1.quad_hint;
        H.x_hint = q;
        H.x_rule = [q](Real eps, const Point&) { return *q(eps); };
    }
    if (u2.quad_hint) {
        auto q = u2.quad_hint;
        H.y_hint = q;
        H.y_rule = [q](Real eps, const Point&) { return *q(eps); };
    }
    return H;
}

// smooth classical kernel h lifted pointwise (sigma embedding on the product)
inline KernelNet sigma_kernel(std::function<Cplx(const Point&, const MultiIndex&)> h, const Box& X,
                              const Box& Y, int deriv_order = kJetOrder, int panels = 8, int nodes = 8) {
    KernelNet H;
    H.x_dim = X.dim();
    H.y_dim = Y.dim();
    H.mode = SupportMode::Global;
    H.box_x = X;
    H.box_y = Y;
    H.base = embed_sigma(std::move(h), product_box(X, Y), deriv_order);
    PanelRule ry = static_box_rule(Y, panels, nodes), rx = static_box_rule(X, panels, nodes);
    H.y_rule = [ry](Real, const Point&) { return ry; };
    H.x_rule = [rx](Real, const Point&) { return rx; };
    H.y_hint = [ry](Real) -> std::optional<PanelRule> { return ry; };
    H.x_hint = [rx](Real) -> std::optional<PanelRule> { return rx; };
    return H;
}

inline KernelNet zero_kernel(const Box& X, const Box& Y) {
    KernelNet H;
    H.x_dim = X.dim();
    H.y_dim = Y.dim();
    H.mode = SupportMode::Global;
    H.box_x = X;
    H.box_y = Y;
    H.base = zero_net(product_box(X, Y));
    return H;
}

// pointwise eps-dependent rescaling (log-scale and power-law test kernels)
inline KernelNet scale_kernel(const KernelNet& H, std::function<Cplx(Real)> amp) {
    KernelNet S = H;
    auto d = H.base.deriv;
    S.base.deriv = [d, amp](Real eps, const Point& p, const MultiIndex& al) {
        return amp(eps) * d(eps, p, al);
    };
    if (H.base.scale_hint) {
        auto sc = H.base.scale_hint;
        S.base.scale_hint = [sc, amp](Real eps, const Point& p) { return std::abs(amp(eps)) * sc(eps, p); };
    }
    if (H.shift_eval) {
        auto se = H.shift_eval;
        S.shift_eval = [se, amp](Real eps, const Point& x, Real u, int kx, int ky) {
            return amp(eps) * se(eps, x, u, kx, ky);
        };
    }
    return S;
}

inline KernelNet add_kernels(const KernelNet& A, const KernelNet& B) {
    if (A.x_dim != B.x_dim || A.y_dim != B.y_dim || !boxes_equal(A.base.domain, B.base.domain))
        throw ArgumentError("add_kernels: domain mismatch");
    KernelNet S;
    S.x_dim = A.x_dim;
    S.y_dim = A.y_dim;
    S.base = add(A.base, B.base);
    if (A.mode == SupportMode::Global && B.mode == SupportMode::Global) {
        S.mode = SupportMode::Global;
        S.box_x = hull(*A.box_x, *B.box_x);
        S.box_y = hull(*A.box_y, *B.box_y);
    } else if (A.has_witness() && B.has_witness()) {
        S.mode = SupportMode::Witness;
        KernelNet a = A, b = B;
        S.witness_fn = [a, b](const Box& O1) { return hull(a.witness_box(O1), b.witness_box(O1)); };
    } else {
        S.mode = SupportMode::L2;
    }
    auto merge = [](const std::function<std::optional<PanelRule>(Real)>& h1,
                    const std::function<std::optional<PanelRule>(Real)>& h2)
        -> std::function<std::optional<PanelRule>(Real)> {
        if (!h1) return h2;
        if (!h2) return h1;
        return [h1, h2](Real eps) -> std::optional<PanelRule> {
            auto r1 = h1(eps), r2 = h2(eps);
            if (!r1) return r2;
            if (!r2) return r1;
            Grid g1 = r1->lambda_grid(), g2 = r2->lambda_grid();
            Box b = hull(g1.box, g2.box);
            int panels = std::max(r1->panels, r2->panels);
            int nodes = std::max(r1->nodes, r2->nodes);
            return static_box_rule(b, panels, nodes);
        };
    };
    S.y_hint = merge(A.y_hint, B.y_hint);
    S.x_hint = merge(A.x_hint, B.x_hint);
    if (S.y_hint) {
        auto h = S.y_hint;
        S.y_rule = [h](Real eps, const Point&) { return *h(eps); };
    }
    if (S.x_hint) {
        auto h = S.x_hint;
        S.x_rule = [h](Real eps, const Point&) { return *h(eps); };
    }
    return S;
}

// ---- sampling helpers ---------------------------------------------------

inline CMat sample_matrix(const KernelNet& H, Real eps, const Grid& gx, const Grid& gy) {
    CMat M(gx.size(), gy.size());
    parallel_for(gx.size(), [&](int i) {
        for (int j = 0; j < gy.size(); ++j) M(i, j) = H.eval(eps, gx.node(i), gy.node(j));
    });
    return M;
}

// quadrature L2 norm of the kernel as a function on X x Y
inline Real kernel_l2(const KernelNet& H, Real eps, const Grid& gx, const Grid& gy) {
    Real acc = 0;
    for (int i = 0; i < gx.size(); ++i)
        for (int j = 0; j < gy.size(); ++j)
            acc += gx.weights[i] * gy.weights[j] * std::norm(H.eval(eps, gx.node(i), gy.node(j)));
    return std::sqrt(acc);
}

// ---- witness verification ------------------------------------------------

struct ProperSupportReport {
    bool applicable = true;
    bool pass = true;
    struct Probe {
        Box probe;
        bool pass = true;
        std::vector<SeminormReport> complements;
        std::vector<GrowthClass> classes;
    };
    std::vector<Probe> probes;
};

// verify the declared witness: |H| restricted to O1 x (Y \ witness(O1)) must
// classify negligible
inline ProperSupportReport check_properly_supported(const KernelNet& H, const std::vector<Box>& probes,
                                                    const EpsilonSchedule& schedule, int m_max = 4) {
    ProperSupportReport rep;
    if (!H.has_witness()) {
        rep.applicable = false;
        rep.pass = false;
        return rep;
    }
    if (H.y_dim != 1) throw CapabilityError("check_properly_supported: 1-d y slot");
    Box Y = H.domain_y();
    for (const auto& O1 : probes) {
        if (!H.domain_x().contains_box(O1, 1e-12))
            throw ArgumentError("check_properly_supported: probe outside X");
        ProperSupportReport::Probe pr;
        pr.probe = O1;
        Box W = H.witness_box(O1);
        std::vector<Box> complements;
        if (W.lo[0] - Y.lo[0] > 1e-9) complements.push_back(box1(Y.lo[0], W.lo[0]));
        if (Y.hi[0] - W.hi[0] > 1e-9) complements.push_back(box1(W.hi[0], Y.hi[0]));
        for (const auto& C : complements) {
            Box region = product_box(O1, C);
            Grid g = build_grid(region, 6, 4);
            SeminormReport sr = seminorm_pKl(H.base, region, 0, g, schedule);
            GrowthClass cls = classify(sr, m_max);
            bool ok = cls.tag == GrowthClass::Negligible && cls.order >= m_max;
            pr.pass = pr.pass && ok;
            pr.complements.push_back(std::move(sr));
            pr.classes.push_back(cls);
        }
        rep.pass = rep.pass && pr.pass;
        rep.probes.push_back(std::move(pr));
    }
    return rep;
}

// ---- application ---------------------------------------------------------

namespace detail {

struct RuleChoice {
    PanelRule rule;
    bool from_y_rule = false;
};

// prefer the finer-scaled of the kernel's y rule and the argument's own rule
inline RuleChoice choose_apply_rule(const KernelNet& H, const RepNet& f, Real eps, const Point& x,
                                    const std::optional<PanelRule>& static_rule) {
    std::optional<PanelRule> rk, rf;
    if (H.y_rule) rk = H.y_rule(eps, x);
    if (f.quad_hint) rf = f.quad_hint(eps);
    if (rk && rf) {
        if (rf->scale < rk->scale) return {*rf, false};
        return {*rk, true};
    }
    if (rk) return {*rk, true};
    if (rf) return {*rf, false};
    if (static_rule) return {*static_rule, false};
    throw CapabilityError("apply: no quadrature rule available for the y integration");
}

} // namespace detail

// the generalized integral operator: (H f)(x) = int H(x,y) f(y) dy
inline RepNet apply(const KernelNet& H, const RepNet& f, int panels = 8, int nodes = 8) {
    if (f.dim != H.y_dim) throw ArgumentError("apply: argument dimension mismatch");
    if (!boxes_equal(f.domain, H.domain_y(), 1e-9)) throw ArgumentError("apply: argument domain mismatch");

    std::optional<PanelRule> static_rule;
    bool empty_overlap = false;
    {
        std::optional<Box> yb = H.y_support();
        Box fs = f.effective_support();
        if (yb) {
            auto both = intersect(*yb, fs);
            if (both)
                static_rule = static_box_rule(*both, panels, nodes);
            else
                empty_overlap = true;
        } else {
            static_rule = static_box_rule(fs, panels, nodes);
        }
    }

    KernelNet Hc = H;
    RepNet fc = f;
    RepNet r;
    r.dim = H.x_dim;
    r.deriv_order = H.base.deriv_order;
    r.domain = H.domain_x();
    if (H.mode == SupportMode::Global) r.support = H.box_x;

    if (empty_overlap) {
        RepNet z = zero_net(r.domain);
        z.support = r.support;
        return z;
    }

    r.deriv = [Hc, fc, static_rule](Real eps, const Point& x, const MultiIndex& al) -> Cplx {
        auto choice = detail::choose_apply_rule(Hc, fc, eps, x, static_rule);
        Grid ug = build_grid(choice.rule.u_box, choice.rule.panels, choice.rule.nodes);
        const int d = choice.rule.u_box.dim();
        Point c = choice.rule.center.size() == d ? choice.rule.center : Point(Point::Zero(d));
        Real wscale = std::pow(choice.rule.scale, d);
        bool shift = choice.from_y_rule && Hc.shift_eval && d == 1;
        MultiIndex zero_y = zero_alpha(Hc.y_dim);
        Cplx acc = 0;
        for (int j = 0; j < ug.size(); ++j) {
            Point lam = c + choice.rule.scale * ug.node(j);
            Cplx hv = shift ? Hc.shift_eval(eps, x, ug.node(j)[0], al[0], 0)
                            : Hc.base.deriv(eps, detail::concat(x, lam), detail::concat_mi(al, zero_y));
            if (hv == Cplx(0.0)) continue;
            acc += wscale * ug.weights[j] * hv * fc.deriv(eps, lam, zero_y);
        }
        return acc;
    };

    r.scale_hint = [Hc, fc, static_rule](Real eps, const Point& x) -> Real {
        auto choice = detail::choose_apply_rule(Hc, fc, eps, x, static_rule);
        Grid ug = build_grid(choice.rule.u_box, choice.rule.panels, choice.rule.nodes);
        const int d = choice.rule.u_box.dim();
        Point c = choice.rule.center.size() == d ? choice.rule.center : Point(Point::Zero(d));
        Real wscale = std::pow(choice.rule.scale, d);
        bool shift = choice.from_y_rule && Hc.shift_eval && d == 1;
        Real acc = 0;
        for (int j = 0; j < ug.size(); ++j) {
            Point lam = c + choice.rule.scale * ug.node(j);
            Cplx hv = shift ? Hc.shift_eval(eps, x, ug.node(j)[0], 0, 0)
                            : Hc.eval(eps, x, lam);
            if (hv == Cplx(0.0)) continue;
            Real fs = std::abs(fc.eval(eps, lam));
            if (fc.scale_hint) fs += fc.scale_hint(eps, lam);
            acc += std::abs(wscale * ug.weights[j] * hv) * fs;
        }
        return acc;
    };
    return r;
}

// G(x) = int H(x,y) dy over the witness box
inline RepNet param_integral(const KernelNet& H, int panels = 8, int nodes = 8) {
    if (!H.has_witness()) throw CapabilityError("param_integral: kernel carries no support witness");
    RepNet one;
    one.dim = H.y_dim;
    one.deriv_order = 1 << 20;
    one.domain = H.domain_y();
    one.deriv = [](Real, const Point&, const MultiIndex& al) {
        return alpha_order(al) == 0 ? Cplx(1.0) : Cplx(0.0);
    };
    return apply(H, one, panels, nodes);
}

// ---- composition ----------------------------------------------------------

namespace detail {

struct ComposeCache {
    std::mutex m;
    struct PerEps {
        Mat nodes;
        Vec weights;
        std::map<SliceKey, CVec> rows, cols;
        std::mutex m;
    };
    std::map<Real, std::shared_ptr<PerEps>> by_eps;
};

inline PanelRule intersection_rule(const PanelRule& ra, const PanelRule& rb) {
    const int d = ra.u_box.dim();
    Point ca = ra.center.size() == d ? ra.center : Point(Point::Zero(d));
    Point cb = rb.center.size() == d ? rb.center : Point(Point::Zero(d));
    Box ba(ca + ra.scale * ra.u_box.lo, ca + ra.scale * ra.u_box.hi);
    Box bb(cb + rb.scale * rb.u_box.lo, cb + rb.scale * rb.u_box.hi);
    auto cross = intersect(ba, bb);
    if (!cross) {
        PanelRule r;
        r.u_box = Box(Vec::Zero(d), Vec::Constant(d, 1e-30));
        r.panels = 0; // sentinel: empty
        return r;
    }
    Real da = ra.panels * ra.nodes / (ba.hi - ba.lo).maxCoeff();
    Real db = rb.panels * rb.nodes / (bb.hi - bb.lo).maxCoeff();
    Real density = std::max(da, db);
    Real width = (cross->hi - cross->lo).maxCoeff();
    int nodes = std::max(ra.nodes, rb.nodes);
    int panels = std::max(1, static_cast<int>(std::ceil(density * width / nodes)));
    PanelRule r = static_box_rule(*cross, panels, nodes);
    return r;
}

} // namespace detail

// L(x,y) = int H1(x,xi) H2(xi,y) dxi on a shared xi rule; rows/columns of the
// operand kernels are cached per eps so repeated grid sweeps stay cheap
inline KernelNet compose(const KernelNet& H1, const KernelNet& H2, int panels = 8, int nodes = 8) {
    if (H1.y_dim != H2.x_dim || !boxes_equal(H1.domain_y(), H2.domain_x(), 1e-9))
        throw ArgumentError("compose: mismatched inner domains");

    KernelNet A = H1, B = H2;
    KernelNet L;
    L.x_dim = H1.x_dim;
    L.y_dim = H2.y_dim;
    bool l2 = H1.mode == SupportMode::L2 || H2.mode == SupportMode::L2;
    if (l2) {
        if (!H1.x_support() || !H2.y_support() || !H1.y_support() || !H2.x_support())
            throw CapabilityError("compose: L2-mode composition needs bounded supports");
        L.mode = SupportMode::L2;
    } else if (H1.mode == SupportMode::Global && H2.mode == SupportMode::Global) {
        L.mode = SupportMode::Global;
        L.box_x = H1.box_x;
        L.box_y = H2.box_y;
    } else {
        L.mode = SupportMode::Witness;
        L.witness_fn = [A, B](const Box& O1) { return B.witness_box(A.witness_box(O1)); };
    }

    // shared xi rule: operand hints first (finer scale wins), then the static
    // witness-box rule; two x/y-local operands with no hints integrate over the
    // per-pair support intersection instead
    std::optional<PanelRule> static_rule;
    bool dynamic = false;
    {
        bool have_hints = static_cast<bool>(H1.y_hint) || static_cast<bool>(H2.x_hint);
        if (!have_hints && H1.y_rule && H2.x_rule) {
            dynamic = true;
        } else if (!have_hints) {
            std::optional<Box> b1 = H1.y_support(), b2 = H2.x_support();
            Box B1 = b1 ? *b1 : H1.domain_y();
            Box B2 = b2 ? *b2 : H2.domain_x();
            auto cross = intersect(B1, B2);
            if (cross) static_rule = static_box_rule(*cross, panels, nodes);
        }
    }

    auto cache = std::make_shared<detail::ComposeCache>();
    auto xi_rule = [A, B, static_rule](Real eps) -> std::optional<PanelRule> {
        std::optional<PanelRule> r1, r2;
        if (A.y_hint) r1 = A.y_hint(eps);
        if (B.x_hint) r2 = B.x_hint(eps);
        if (r1 && r2) return r1->scale <= r2->scale ? r1 : r2;
        if (r1) return r1;
        if (r2) return r2;
        return static_rule;
    };

    L.base.dim = L.x_dim + L.y_dim;
    L.base.deriv_order = std::min(H1.base.deriv_order, H2.base.deriv_order);
    L.base.domain = product_box(H1.domain_x(), H2.domain_y());
    if (L.mode == SupportMode::Global) L.base.support = product_box(*L.box_x, *L.box_y);

    const int xd = L.x_dim, yd = L.y_dim;

    auto slices = [A, B, cache, xi_rule, xd, yd](Real eps, const Point& x, const Point& y,
                                                 const MultiIndex& ax, const MultiIndex& ay)
        -> std::tuple<const CVec*, const CVec*, const Vec*, std::shared_ptr<detail::ComposeCache::PerEps>> {
        std::shared_ptr<detail::ComposeCache::PerEps> pe;
        {
            std::lock_guard<std::mutex> lk(cache->m);
            auto it = cache->by_eps.find(eps);
            if (it == cache->by_eps.end()) {
                auto rule = xi_rule(eps);
                if (!rule) throw CapabilityError("compose: no xi quadrature rule available");
                pe = std::make_shared<detail::ComposeCache::PerEps>();
                Grid g = rule->lambda_grid();
                pe->nodes = g.nodes;
                pe->weights = g.weights;
                cache->by_eps.emplace(eps, pe);
            } else {
                pe = it->second;
            }
        }
        detail::SliceKey kx = detail::slice_key(x, ax), ky = detail::slice_key(y, ay);
        const CVec* row;
        const CVec* col;
        {
            std::unique_lock<std::mutex> lk(pe->m);
            auto it = pe->rows.find(kx);
            if (it == pe->rows.end()) {
                lk.unlock();
                CVec v(pe->nodes.rows());
                MultiIndex zy = zero_alpha(A.y_dim);
                for (int j = 0; j < v.size(); ++j)
                    v[j] = A.base.deriv(eps, detail::concat(x, pe->nodes.row(j).transpose()),
                                        detail::concat_mi(ax, zy));
                lk.lock();
                it = pe->rows.emplace(kx, std::move(v)).first;
            }
            row = &it->second;
            auto jt = pe->cols.find(ky);
            if (jt == pe->cols.end()) {
                lk.unlock();
                CVec v(pe->nodes.rows());
                MultiIndex zx = zero_alpha(B.x_dim);
                for (int j = 0; j < v.size(); ++j)
                    v[j] = B.base.deriv(eps, detail::concat(pe->nodes.row(j).transpose(), y),
                                        detail::concat_mi(zx, ay));
                lk.lock();
                jt = pe->cols.emplace(ky, std::move(v)).first;
            }
            col = &jt->second;
        }
        return {row, col, &pe->weights, pe};
    };

    if (!dynamic) {
        L.base.deriv = [slices, xd, yd](Real eps, const Point& p, const MultiIndex& al) -> Cplx {
            Point x = p.head(xd), y = p.tail(yd);
            MultiIndex ax = al.head(xd), ay = al.tail(yd);
            auto [row, col, w, pe] = slices(eps, x, y, ax, ay);
            Cplx acc = 0;
            for (int j = 0; j < w->size(); ++j) acc += (*w)[j] * (*row)[j] * (*col)[j];
            return acc;
        };
        L.base.scale_hint = [slices, xd, yd](Real eps, const Point& p) -> Real {
            Point x = p.head(xd), y = p.tail(yd);
            MultiIndex zx = zero_alpha(xd), zy = zero_alpha(yd);
            auto [row, col, w, pe] = slices(eps, x, y, zx, zy);
            Real acc = 0;
            for (int j = 0; j < w->size(); ++j)
                acc += std::abs((*w)[j]) * std::abs((*row)[j]) * std::abs((*col)[j]);
            return acc;
        };
    } else {
        L.base.deriv = [A, B, xd, yd](Real eps, const Point& p, const MultiIndex& al) -> Cplx {
            Point x = p.head(xd), y = p.tail(yd);
            MultiIndex ax = al.head(xd), ay = al.tail(yd);
            PanelRule r = detail::intersection_rule(A.y_rule(eps, x), B.x_rule(eps, y));
            if (r.panels == 0) return 0.0;
            Grid g = r.lambda_grid();
            MultiIndex zy = zero_alpha(A.y_dim), zx = zero_alpha(B.x_dim);
            Cplx acc = 0;
            for (int j = 0; j < g.size(); ++j) {
                Point xi = g.node(j);
                acc += g.weights[j] *
                       A.base.deriv(eps, detail::concat(x, xi), detail::concat_mi(ax, zy)) *
                       B.base.deriv(eps, detail::concat(xi, y), detail::concat_mi(zx, ay));
            }
            return acc;
        };
        L.base.scale_hint = [A, B, xd, yd](Real eps, const Point& p) -> Real {
            Point x = p.head(xd), y = p.tail(yd);
            PanelRule r = detail::intersection_rule(A.y_rule(eps, x), B.x_rule(eps, y));
            if (r.panels == 0) return 0.0;
            Grid g = r.lambda_grid();
            Real acc = 0;
            for (int j = 0; j < g.size(); ++j) {
                Point xi = g.node(j);
                acc += std::abs(g.weights[j] * A.eval(eps, x, xi) * B.eval(eps, xi, y));
            }
            return acc;
        };
    }

    L.y_rule = H2.y_rule;
    L.x_rule = H1.x_rule;
    L.y_hint = H2.y_hint;
    L.x_hint = H1.x_hint;
    return L;
}

// L_n = H o H o ... o H (n factors)
inline KernelNet iterate(const KernelNet& H, int n, int panels = 8, int nodes = 8) {
    if (n < 1) throw ArgumentError("iterate: n must be >= 1 (the identity has no kernel here)");
    if (!boxes_equal(H.domain_x(), H.domain_y(), 1e-9)) throw ArgumentError("iterate: square domain required");
    KernelNet L = H;
    for (int k = 1; k < n; ++k) L = compose(L, H, panels, nodes);
    return L;
}

// ---- zero-operator falsification harness ----------------------------------

struct ZeroOpReport {
    bool consistent_with_zero = true;
    int witness_probe = -1;
    std::vector<std::string> probe_names;
    std::vector<GrowthClass> classes;
    std::vector<SeminormReport> reports;
};

struct NamedProbe {
    std::string name;
    RepNet net;
};

// dyadic tensor b-spline bumps plus the adjoint-style probes conj(H(x*, .))
inline std::vector<NamedProbe> default_zero_probes(const KernelNet& H) {
    if (H.y_dim != 1) throw CapabilityError("default_zero_probes: 1-d y slot");
    Box Y = H.domain_y();
    Real w = Y.hi[0] - Y.lo[0];
    std::vector<NamedProbe> probes;
    for (int level = 0; level < 2; ++level) {
        Real h = w / std::pow(2.0, level + 3);
        for (Real c = Y.lo[0] + 2 * h; c < Y.hi[0] - 2 * h + 1e-12; c += 2 * h) {
            RepNet p;
            p.dim = 1;
            p.deriv_order = 3;
            p.domain = Y;
            p.support = box1(c - 2 * h, c + 2 * h);
            p.deriv = [c, h](Real, const Point& x, const MultiIndex& al) -> Cplx {
                return bspline3_deriv((x[0] - c) / h, al[0]) / std::pow(h, al[0]);
            };
            char buf[64];
            std::snprintf(buf, sizeof buf, "bspline(c=%.4g,h=%.4g)", c, h);
            probes.push_back({buf, std::move(p)});
        }
    }
    Box X = H.domain_x();
    KernelNet Hc = H;
    for (int k = 1; k <= 5; ++k) {
        Real xs = X.lo[0] + k * (X.hi[0] - X.lo[0]) / 6.0;
        RepNet p;
        p.dim = 1;
        p.deriv_order = H.base.deriv_order;
        p.domain = Y;
        if (H.has_witness()) p.support = H.witness_box(box1(xs, xs + 1e-12));
        Point xp = point1(xs);
        p.deriv = [Hc, xp](Real eps, const Point& y, const MultiIndex& al) {
            return std::conj(Hc.eval_deriv(eps, xp, y, zero_alpha(1), al));
        };
        char buf[64];
        std::snprintf(buf, sizeof buf, "adjoint(x*=%.4g)", xs);
        probes.push_back({buf, std::move(p)});
    }
    return probes;
}

inline ZeroOpReport test_zero_operator(const KernelNet& H, std::vector<NamedProbe> probes,
                                       const Box& out_box, int m_max, const EpsilonSchedule& schedule,
                                       int panels = 8, int nodes = 8) {
    if (probes.empty()) probes = default_zero_probes(H);
    ZeroOpReport rep;
    Grid g = build_grid(out_box, panels, nodes);
    for (std::size_t i = 0; i < probes.size(); ++i) {
        RepNet image = apply(H, probes[i].net, panels, nodes);
        SeminormReport sr = seminorm_pKl(image, out_box, 0, g, schedule);
        GrowthClass cls = classify(sr, m_max);
        bool null_image = cls.tag == GrowthClass::Negligible && cls.order >= m_max;
        if (!null_image && rep.consistent_with_zero) {
            rep.consistent_with_zero = false;
            rep.witness_probe = static_cast<int>(i);
        }
        rep.probe_names.push_back(probes[i].name);
        rep.classes.push_back(cls);
        rep.reports.push_back(std::move(sr));
    }
    return rep;
}

// ---- regularity ------------------------------------------------------------

struct RegularityReport {
    struct PerProbe {
        std::vector<Real> slopes;
        std::vector<int> orders;
        bool uniform = true;
        int bounding_order = 0;
    };
    std::vector<PerProbe> probes;
    bool all_uniform = true;
};

// G-infinity signature: one moderateness order bounds p_{K,l}(H f) for every l
inline RegularityReport check_regular(const KernelNet& H, const std::vector<RepNet>& probes,
                                      const Box& K, int l_max, const EpsilonSchedule& schedule,
                                      int panels = 8, int nodes = 8) {
    RegularityReport rep;
    Grid g = build_grid(K, panels, nodes);
    for (const auto& f : probes) {
        RepNet image = apply(H, f, panels, nodes);
        if (l_max > image.deriv_order)
            throw CapabilityError("check_regular: kernel derivative order below l_max");
        RegularityReport::PerProbe pp;
        for (int l = 0; l <= l_max; ++l) {
            SeminormReport sr = seminorm_pKl(image, K, l, g, schedule);
            GrowthClass cls = classify(sr, 1 << 10);
            int order;
            switch (cls.tag) {
                case GrowthClass::Moderate: order = cls.order; break;
                case GrowthClass::Negligible: order = 0; break;
                case GrowthClass::LogScale: order = cls.k > 0 ? 1 : 0; break;
                default: order = -1; break;
            }
            pp.slopes.push_back(sr.fitted_slope);
            pp.orders.push_back(order);
        }
        pp.bounding_order = *std::max_element(pp.orders.begin(), pp.orders.end());
        bool any_indet = std::any_of(pp.orders.begin(), pp.orders.end(), [](int o) { return o < 0; });
        pp.uniform = !any_indet && pp.bounding_order <= pp.orders.front();
        rep.all_uniform = rep.all_uniform && pp.uniform;
        rep.probes.push_back(std::move(pp));
    }
    return rep;
}

// ---- commutative diagram (classical vs embedded application) ---------------

inline SeminormReport diagram_check_smooth(std::function<Cplx(const Point&, const MultiIndex&)> h,
                                           const DistributionSpec& T, const MollifierKit& kit,
                                           const Box& X, const Box& Y, const EpsilonSchedule& schedule,
                                           int panels = 8, int nodes = 8) {
    // classical side: <T, h(x, .)> term by term
    Grid tg = build_grid(T.support_box, panels, nodes);
    auto terms = T.terms;
    RepNet classical;
    classical.dim = X.dim();
    classical.deriv_order = kJetOrder;
    classical.domain = X;
    classical.deriv = [h, terms, tg](Real, const Point& x, const MultiIndex& ax) -> Cplx {
        Cplx total = 0;
        for (const auto& term : terms) {
            switch (term.kind) {
                case DistributionSpec::Term::Dirac: {
                    Real sign = alpha_order(term.alpha) % 2 == 0 ? 1.0 : -1.0;
                    total += sign * h(detail::concat(x, term.point), detail::concat_mi(ax, term.alpha));
                    break;
                }
                case DistributionSpec::Term::Smooth: {
                    MultiIndex zy = zero_alpha(tg.box.dim());
                    for (int j = 0; j < tg.size(); ++j)
                        total += tg.weights[j] * h(detail::concat(x, tg.node(j)), detail::concat_mi(ax, zy)) *
                                 term.f(tg.node(j), zy);
                    break;
                }
                case DistributionSpec::Term::DerivedContinuous: {
                    Real sign = alpha_order(term.alpha) % 2 == 0 ? 1.0 : -1.0;
                    for (int j = 0; j < tg.size(); ++j)
                        total += sign * tg.weights[j] *
                                 h(detail::concat(x, tg.node(j)), detail::concat_mi(ax, term.alpha)) *
                                 term.f0(tg.node(j));
                    break;
                }
            }
        }
        return total;
    };

    KernelNet Hk = sigma_kernel(h, X, Y, kJetOrder, panels, nodes);
    RepNet embedded = apply(Hk, embed_is(T, kit, Y), panels, nodes);
    RepNet diff = sub(embedded, classical);
    Grid g = build_grid(X, panels, nodes);
    return seminorm_pKl(diff, X, 0, g, schedule);
}

// ---- Fourier transform example ----------------------------------------------

inline RepNet fourier_hat(const RepNet& u, const Box& freq_box, const Grid& freq_grid,
                          int panels = 8, int nodes = 8) {
    if (freq_box.dim() != u.dim) throw ArgumentError("fourier_hat: frequency dimension mismatch");
    if (!freq_box.contains_box(freq_grid.box, 1e-9))
        throw ArgumentError("fourier_hat: report grid outside the frequency box");
    Box sup = u.effective_support();
    Real max_freq = freq_box.lo.cwiseAbs().cwiseMax(freq_box.hi.cwiseAbs()).maxCoeff();
    Real width = (sup.hi - sup.lo).maxCoeff();
    int osc_panels = std::max(panels, static_cast<int>(std::ceil(max_freq * width / 4.0)));
    PanelRule static_rule = static_box_rule(sup, osc_panels, nodes);

    RepNet uc = u;
    RepNet r;
    r.dim = u.dim;
    r.deriv_order = 1 << 20;
    r.domain = freq_box;
    r.deriv = [uc, static_rule](Real eps, const Point& x, const MultiIndex& al) -> Cplx {
        PanelRule rule = static_rule;
        if (uc.quad_hint) {
            auto hint = uc.quad_hint(eps);
            if (hint) rule = *hint;
        }
        Grid g = rule.lambda_grid();
        MultiIndex z = zero_alpha(uc.dim);
        Cplx acc = 0;
        for (int j = 0; j < g.size(); ++j) {
            Point y = g.node(j);
            Cplx mono(1.0, 0.0);
            for (int i = 0; i < al.size(); ++i)
                for (int k = 0; k < al[i]; ++k) mono *= Cplx(0.0, -y[i]);
            acc += g.weights[j] * mono * std::exp(Cplx(0.0, -x.dot(y))) * uc.deriv(eps, y, z);
        }
        return acc;
    };
    r.scale_hint = [uc, static_rule](Real eps, const Point&) -> Real {
        PanelRule rule = static_rule;
        if (uc.quad_hint) {
            auto hint = uc.quad_hint(eps);
            if (hint) rule = *hint;
        }
        Grid g = rule.lambda_grid();
        MultiIndex z = zero_alpha(uc.dim);
        Real acc = 0;
        for (int j = 0; j < g.size(); ++j)
            acc += std::abs(g.weights[j]) * std::abs(uc.deriv(eps, g.node(j), z));
        return acc;
    };
    return r;
}

} // namespace genkernel
