#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include "genkernel/kernel.hpp"

namespace genkernel {

enum class ExpMode { CompactSup, L2 };

struct LogScaleReport {
    bool pass = true;
    Real max_k = 0;
    std::vector<GrowthClass> classes;
    std::vector<SeminormReport> reports;
};

// p_{KxK,l}(H) (or the L2 family) must grow at most like a power of |ln eps|
inline LogScaleReport check_log_scale(const KernelNet& H, const Box& K, int l_max, ExpMode mode,
                                      const EpsilonSchedule& schedule, int panels = 4, int nodes = 6) {
    Box V2 = product_box(K, K);
    Grid g = build_grid(V2, panels, nodes);
    LogScaleReport rep;
    for (int l = 0; l <= l_max; ++l) {
        SeminormReport sr = mode == ExpMode::CompactSup ? seminorm_pKl(H.base, V2, l, g, schedule)
                                                        : seminorm_Hm(H.base, l, g, schedule);
        GrowthClass cls = classify(sr);
        bool ok = cls.tag == GrowthClass::LogScale || cls.tag == GrowthClass::Negligible ||
                  (cls.tag == GrowthClass::Moderate && cls.order == 0);
        rep.pass = rep.pass && ok;
        if (cls.tag == GrowthClass::LogScale) rep.max_k = std::max(rep.max_k, cls.k);
        rep.classes.push_back(cls);
        rep.reports.push_back(std::move(sr));
    }
    return rep;
}

namespace detail {

// shared machinery for kernels of the form c1*H + sum_{n>=2} g_n L_n: the grid
// samples K and the inner matrix G determine values everywhere through
// S(x,y) = c1 H(x,y) + h_x^T W G h_y
struct SeriesState {
    struct SeriesPerEps {
        Grid g;
        CMat K;
        CMat G;
        CMat M; // on-grid samples of the full kernel
        int terms = 0;
        Real tail = 0;
        std::map<SliceKey, CVec> rows, cols;
        std::mutex m;
    };

    KernelNet H;
    std::optional<PanelRule> static_rule;
    std::function<void(Real, SeriesPerEps&)> build;
    std::map<Real, std::shared_ptr<SeriesPerEps>> by_eps;
    std::mutex m;

    PanelRule rule_at(Real eps) const {
        if (H.y_hint) {
            auto r = H.y_hint(eps);
            if (r) return *r;
        }
        if (static_rule) return *static_rule;
        throw CapabilityError("exponential: no quadrature rule available for the shared grid");
    }

    std::shared_ptr<SeriesPerEps> get(Real eps) {
        {
            std::lock_guard<std::mutex> lk(m);
            auto it = by_eps.find(eps);
            if (it != by_eps.end()) return it->second;
        }
        auto pe = std::make_shared<SeriesPerEps>();
        pe->g = rule_at(eps).lambda_grid();
        pe->K = sample_matrix(H, eps, pe->g, pe->g);
        build(eps, *pe);
        std::lock_guard<std::mutex> lk(m);
        auto it = by_eps.find(eps);
        if (it != by_eps.end()) return it->second;
        by_eps.emplace(eps, pe);
        return pe;
    }
};

inline const CVec& series_slice(SeriesState::SeriesPerEps& pe, const KernelNet& H, Real eps,
                                const Point& z, const MultiIndex& az, bool row_side) {
    SliceKey key = slice_key(z, az);
    std::unique_lock<std::mutex> lk(pe.m);
    auto& table = row_side ? pe.rows : pe.cols;
    auto it = table.find(key);
    if (it != table.end()) return it->second;
    lk.unlock();
    CVec v(pe.g.size());
    MultiIndex zero = zero_alpha(1);
    for (int j = 0; j < v.size(); ++j) {
        Point xi = pe.g.node(j);
        v[j] = row_side ? H.base.deriv(eps, concat(z, xi), concat_mi(az, zero))
                        : H.base.deriv(eps, concat(xi, z), concat_mi(zero, az));
    }
    lk.lock();
    return table.emplace(key, std::move(v)).first->second;
}

inline KernelNet series_kernel(std::shared_ptr<SeriesState> st, Cplx c1) {
    const KernelNet& H = st->H;
    KernelNet S;
    S.x_dim = H.x_dim;
    S.y_dim = H.y_dim;
    S.mode = H.mode;
    S.box_x = H.box_x;
    S.box_y = H.box_y;
    if (H.mode == SupportMode::Witness) {
        KernelNet Hc = H;
        // iterated kernels spread no further than the witness of the whole slab
        S.witness_fn = [Hc](const Box& O1) {
            return hull(Hc.witness_box(O1), Hc.witness_box(Hc.domain_x()));
        };
    }
    // force every integral against S onto the shared series grid; composition
    // identities then hold to roundoff because KW commutes with G
    S.y_hint = [st](Real eps) -> std::optional<PanelRule> { return st->rule_at(eps); };
    S.x_hint = S.y_hint;
    S.base.dim = H.base.dim;
    S.base.deriv_order = H.base.deriv_order;
    S.base.domain = H.base.domain;
    if (H.mode == SupportMode::Witness) {
        Box xs = H.x_support() ? *H.x_support() : H.domain_x();
        S.base.support = product_box(xs, H.witness_box(H.domain_x()));
    } else {
        S.base.support = H.base.support;
    }
    const int xd = H.x_dim, yd = H.y_dim;
    auto hb = H.base.deriv;
    S.base.deriv = [st, c1, hb, xd, yd](Real eps, const Point& p, const MultiIndex& al) -> Cplx {
        auto pe = st->get(eps);
        Point x = p.head(xd), y = p.tail(yd);
        MultiIndex ax = al.head(xd), ay = al.tail(yd);
        const CVec& row = series_slice(*pe, st->H, eps, x, ax, true);
        const CVec& col = series_slice(*pe, st->H, eps, y, ay, false);
        Cplx acc = c1 * hb(eps, p, al);
        CVec gw = pe->G * col;
        for (int j = 0; j < row.size(); ++j) acc += row[j] * pe->g.weights[j] * gw[j];
        return acc;
    };
    S.base.scale_hint = [st, c1, hb, xd, yd](Real eps, const Point& p) -> Real {
        auto pe = st->get(eps);
        Point x = p.head(xd), y = p.tail(yd);
        MultiIndex zx = zero_alpha(xd), zy = zero_alpha(yd);
        const CVec& row = series_slice(*pe, st->H, eps, x, zx, true);
        const CVec& col = series_slice(*pe, st->H, eps, y, zy, false);
        Real acc = std::abs(c1 * hb(eps, p, zero_alpha(xd + yd)));
        Vec gw = pe->G.cwiseAbs() * col.cwiseAbs();
        for (int j = 0; j < row.size(); ++j)
            acc += std::abs(row[j]) * pe->g.weights[j] * gw[j];
        return acc;
    };
    return S;
}

// ln of a^n/n!
inline Real ln_series_term(Real a, int n) { return n * std::log(a) - std::lgamma(n + 1.0); }

// rigorous geometric bound on sum_{n>N} a^n/n!, valid once N+2 > a
inline Real series_tail_bound(Real a, int N) {
    if (a == 0.0) return 0.0;
    if (N + 2 <= a) return std::numeric_limits<Real>::infinity();
    Real ratio = a / (N + 2.0);
    Real ln_b = ln_series_term(a, N + 1) - std::log1p(-ratio);
    if (ln_b > 700.0) return std::numeric_limits<Real>::infinity();
    return std::exp(ln_b);
}

} // namespace detail

struct ExpSeriesResult {
    KernelNet S;
    ExpMode mode = ExpMode::CompactSup;
    Cplx t{1.0, 0.0};
    EpsilonSchedule schedule;
    std::vector<int> terms_used;
    std::vector<Real> tail_bound;
    std::shared_ptr<detail::SeriesState> state;

    const CMat& grid_matrix(Real eps) const { return state->get(eps)->M; }
    Grid grid(Real eps) const { return state->get(eps)->g; }
};

// truncated exponential series S_t = sum_{n=1}^{N(eps)} t^n L_n / n!, with N
// chosen from the analytic majorant: sum_{n>N} |t|^n (sum w)^{n-1} sup|H|^n / n!
// in the compactly supported regime, sum_{n>N} (|t| ||H||_2)^n / n! in L2
inline ExpSeriesResult exp_kernel(const KernelNet& H, Cplx t, ExpMode mode, Real series_tol,
                                  const EpsilonSchedule& schedule, int n_cap = 300, int panels = 8,
                                  int nodes = 8) {
    if (!boxes_equal(H.domain_x(), H.domain_y(), 1e-9))
        throw ArgumentError("exp_kernel: square domain required");
    if (!(series_tol > 0)) throw ArgumentError("exp_kernel: series_tol must be positive");

    auto st = std::make_shared<detail::SeriesState>();
    st->H = H;
    {
        std::optional<Box> yb = H.mode == SupportMode::L2 ? H.y_support()
                                                          : std::optional<Box>(H.witness_box(H.domain_x()));
        if (!yb) yb = H.domain_y();
        st->static_rule = static_box_rule(*yb, panels, nodes);
    }
    st->build = [t, mode, series_tol, n_cap](Real eps, detail::SeriesState::SeriesPerEps& pe) {
        Real sw = pe.g.weights.sum();
        Real a, factor;
        if (mode == ExpMode::CompactSup) {
            Real p = pe.K.size() ? pe.K.cwiseAbs().maxCoeff() : 0.0;
            a = std::abs(t) * sw * p;
            factor = sw > 0 ? 1.0 / sw : 1.0;
        } else {
            Real acc = 0;
            for (int i = 0; i < pe.K.rows(); ++i)
                for (int j = 0; j < pe.K.cols(); ++j)
                    acc += pe.g.weights[i] * pe.g.weights[j] * std::norm(pe.K(i, j));
            a = std::abs(t) * std::sqrt(acc);
            factor = 1.0;
        }
        int N = -1;
        Real tail = 0;
        for (int n = 1; n <= n_cap; ++n) {
            Real b = factor * detail::series_tail_bound(a, n);
            if (b < series_tol) {
                N = n;
                tail = b;
                break;
            }
        }
        if (N < 0)
            throw DivergenceError("exp_kernel: series tail bound not reached within " +
                                  std::to_string(n_cap) + " terms (majorant a = " + std::to_string(a) +
                                  " at eps = " + std::to_string(eps) + "); kernel too large for this scale");
        pe.terms = N;
        pe.tail = tail;
        const auto n_grid = pe.K.rows();
        CVec cw = pe.g.weights.cast<Cplx>();
        CMat A = pe.K * cw.asDiagonal();
        CMat G = CMat::Zero(n_grid, n_grid);
        if (N >= 2) {
            CMat Q = (t * t / 2.0) * CMat::Identity(n_grid, n_grid);
            G = Q;
            for (int n = 3; n <= N; ++n) {
                Q = Q * A * (t / static_cast<Real>(n));
                G += Q;
            }
        }
        pe.G = G;
        pe.M = t * pe.K + pe.K * cw.asDiagonal() * G * pe.K;
    };

    ExpSeriesResult res{detail::series_kernel(st, t), mode, t, schedule, {}, {}, st};
    for (int i = 0; i < schedule.size(); ++i) {
        auto pe = st->get(schedule[i]);
        res.terms_used.push_back(pe->terms);
        res.tail_bound.push_back(pe->tail);
    }
    return res;
}

// independent oracle: S_t = t phi1(t K W) K via the scaling-and-squaring matrix
// exponential of an augmented block matrix
inline ExpSeriesResult oracle_phi1(const KernelNet& H, Cplx t, const EpsilonSchedule& schedule,
                                   int panels = 8, int nodes = 8) {
    if (!boxes_equal(H.domain_x(), H.domain_y(), 1e-9))
        throw ArgumentError("oracle_phi1: square domain required");
    auto st = std::make_shared<detail::SeriesState>();
    st->H = H;
    {
        std::optional<Box> yb = H.mode == SupportMode::L2 ? H.y_support() : std::optional<Box>(H.witness_box(H.domain_x()));
        if (!yb) yb = H.domain_y();
        st->static_rule = static_box_rule(*yb, panels, nodes);
    }
    st->build = [t](Real eps, detail::SeriesState::SeriesPerEps& pe) {
        const auto n = pe.K.rows();
        CVec cw = pe.g.weights.cast<Cplx>();
        CMat A = pe.K * cw.asDiagonal();
        CMat Z = CMat::Zero(3 * n, 3 * n);
        Z.topLeftCorner(n, n) = t * A;
        Z.block(0, n, n, n) = t * CMat::Identity(n, n);
        Z.block(n, 2 * n, n, n) = t * CMat::Identity(n, n);
        CMat E = Z.exp();
        if (!E.allFinite()) throw DivergenceError("oracle_phi1: matrix exponential overflow");
        pe.G = E.block(0, 2 * n, n, n); // t^2 phi2(tA)
        pe.M = t * pe.K + pe.K * cw.asDiagonal() * pe.G * pe.K;
        pe.terms = 0;
        pe.tail = 0;
    };
    ExpSeriesResult res{detail::series_kernel(st, t), ExpMode::CompactSup, t, schedule, {}, {}, st};
    for (int i = 0; i < schedule.size(); ++i) {
        auto pe = st->get(schedule[i]);
        res.terms_used.push_back(pe->terms);
        res.tail_bound.push_back(pe->tail);
    }
    return res;
}

// experimental: user-supplied entire series sum_n c_n L_n with a user-supplied
// tail majorant tail(N, a) where a is the per-eps composition majorant
inline ExpSeriesResult entire_kernel(const KernelNet& H, std::function<Cplx(int)> coeff,
                                     std::function<Real(int, Real)> tail_majorant, Real series_tol,
                                     const EpsilonSchedule& schedule, int n_cap = 300, int panels = 8,
                                     int nodes = 8) {
    if (!boxes_equal(H.domain_x(), H.domain_y(), 1e-9))
        throw ArgumentError("entire_kernel: square domain required");
    auto st = std::make_shared<detail::SeriesState>();
    st->H = H;
    st->static_rule = static_box_rule(H.has_witness() ? H.witness_box(H.domain_x()) : H.domain_y(),
                                      panels, nodes);
    Cplx c1 = coeff(1);
    st->build = [coeff, tail_majorant, series_tol, n_cap](Real eps,
                                                          detail::SeriesState::SeriesPerEps& pe) {
        Real sw = pe.g.weights.sum();
        Real p = pe.K.size() ? pe.K.cwiseAbs().maxCoeff() : 0.0;
        Real a = sw * p;
        int N = -1;
        Real tail = 0;
        for (int n = 1; n <= n_cap; ++n) {
            Real b = tail_majorant(n, a);
            if (b < series_tol) {
                N = n;
                tail = b;
                break;
            }
        }
        if (N < 0)
            throw DivergenceError("entire_kernel: tail majorant not reached within " +
                                  std::to_string(n_cap) + " terms at eps = " + std::to_string(eps));
        pe.terms = N;
        pe.tail = tail;
        const auto n_grid = pe.K.rows();
        CVec cw = pe.g.weights.cast<Cplx>();
        CMat A = pe.K * cw.asDiagonal();
        CMat G = CMat::Zero(n_grid, n_grid);
        CMat P = CMat::Identity(n_grid, n_grid);
        for (int n = 2; n <= N; ++n) {
            G += coeff(n) * P;
            if (n < N) P = P * A;
        }
        pe.G = G;
        pe.M = coeff(1) * pe.K + pe.K * cw.asDiagonal() * G * pe.K;
    };
    ExpSeriesResult res{detail::series_kernel(st, c1), ExpMode::CompactSup, c1, schedule, {}, {}, st};
    for (int i = 0; i < schedule.size(); ++i) {
        auto pe = st->get(schedule[i]);
        res.terms_used.push_back(pe->terms);
        res.tail_bound.push_back(pe->tail);
    }
    return res;
}

// ---- identity checks --------------------------------------------------------

struct IdentityReport {
    std::vector<Real> per_eps;
    Real max_residual = 0;
    Real op_residual = 0; // operator-level probe check, when a probe was given
    bool pass = true;
    bool hypothesis_violated = false; // commuting-sum only
    Real hypothesis_residual = 0;
};

namespace detail {

inline Real rel_residual(const CMat& got, const CMat& want) {
    Real scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
    return (got - want).cwiseAbs().maxCoeff() / scale;
}

} // namespace detail

// e^{a H} o e^{b H} = e^{(a+b) H}, as kernels: S_{a+b} = S_a W S_b + S_a + S_b
inline IdentityReport verify_semigroup(const KernelNet& H, Cplx a, Cplx b,
                                       const EpsilonSchedule& schedule, Real tol = 1e-8,
                                       ExpMode mode = ExpMode::CompactSup, Real series_tol = 1e-14,
                                       const RepNet* probe = nullptr) {
    ExpSeriesResult Sa = exp_kernel(H, a, mode, series_tol, schedule);
    ExpSeriesResult Sb = exp_kernel(H, b, mode, series_tol, schedule);
    ExpSeriesResult Sab = exp_kernel(H, a + b, mode, series_tol, schedule);
    IdentityReport rep;
    std::optional<RepNet> lhs, rhs;
    if (probe) {
        RepNet inner = add(*probe, apply(Sb.S, *probe));
        lhs = add(inner, apply(Sa.S, inner));
        rhs = add(*probe, apply(Sab.S, *probe));
    }
    for (int i = 0; i < schedule.size(); ++i) {
        Real eps = schedule[i];
        const CMat& Ma = Sa.grid_matrix(eps);
        const CMat& Mb = Sb.grid_matrix(eps);
        const CMat& Mab = Sab.grid_matrix(eps);
        Grid g = Sa.grid(eps);
        CVec cw = g.weights.cast<Cplx>();
        CMat composed = Ma * cw.asDiagonal() * Mb + Ma + Mb;
        Real r = detail::rel_residual(composed, Mab);
        rep.per_eps.push_back(r);
        rep.max_residual = std::max(rep.max_residual, r);
        if (probe) {
            Real worst = 0, scale = 0;
            for (int n = 0; n < g.size(); ++n) {
                Cplx u = lhs->eval(eps, g.node(n)), v = rhs->eval(eps, g.node(n));
                worst = std::max(worst, std::abs(u - v));
                scale = std::max(scale, std::abs(v));
            }
            rep.op_residual = std::max(rep.op_residual, worst / std::max(scale, 1e-300));
        }
    }
    rep.pass = rep.max_residual <= tol && (!probe || rep.op_residual <= tol);
    return rep;
}

struct DerivativeReport {
    std::vector<Real> steps;
    std::vector<std::vector<Real>> residuals; // [eps][step]
    std::vector<Real> observed_order;         // per eps
    Real min_order = 0, max_order = 0;
    bool pass = true;
};

// d/dt e^{tH} = H o e^{tH}: central difference in t against compose(H, S_t) + H
inline DerivativeReport verify_derivative(const KernelNet& H, Real t, std::vector<Real> steps,
                                          const EpsilonSchedule& schedule,
                                          std::pair<Real, Real> order_band = {1.8, 2.2},
                                          ExpMode mode = ExpMode::CompactSup, Real series_tol = 1e-14) {
    if (steps.size() < 2) throw ArgumentError("verify_derivative: need at least two steps");
    ExpSeriesResult St = exp_kernel(H, t, mode, series_tol, schedule);
    DerivativeReport rep;
    rep.steps = steps;
    std::vector<ExpSeriesResult> plus, minus;
    for (Real h : steps) {
        plus.push_back(exp_kernel(H, t + h, mode, series_tol, schedule));
        minus.push_back(exp_kernel(H, t - h, mode, series_tol, schedule));
    }
    for (int i = 0; i < schedule.size(); ++i) {
        Real eps = schedule[i];
        Grid g = St.grid(eps);
        CMat K = sample_matrix(H, eps, g, g);
        CVec cw = g.weights.cast<Cplx>();
        CMat target = K + K * cw.asDiagonal() * St.grid_matrix(eps);
        std::vector<Real> res, lx, ly;
        for (std::size_t s = 0; s < steps.size(); ++s) {
            CMat D = (plus[s].grid_matrix(eps) - minus[s].grid_matrix(eps)) / (2.0 * steps[s]);
            res.push_back(detail::rel_residual(D, target));
            lx.push_back(std::log(steps[s]));
            ly.push_back(std::log(std::max(res.back(), 1e-300)));
        }
        rep.residuals.push_back(res);
        rep.observed_order.push_back(detail::least_squares(lx, ly).slope);
    }
    rep.min_order = *std::min_element(rep.observed_order.begin(), rep.observed_order.end());
    rep.max_order = *std::max_element(rep.observed_order.begin(), rep.observed_order.end());
    rep.pass = rep.min_order >= order_band.first && rep.max_order <= order_band.second;
    return rep;
}

// e^H o e^K = e^{H+K} when H and K commute
inline IdentityReport verify_commuting_sum(const KernelNet& H, const KernelNet& K,
                                           const EpsilonSchedule& schedule, Real tol = 1e-8,
                                           Real commute_tol = 1e-10, ExpMode mode = ExpMode::CompactSup,
                                           Real series_tol = 1e-14) {
    ExpSeriesResult Sh = exp_kernel(H, 1.0, mode, series_tol, schedule);
    ExpSeriesResult Sk = exp_kernel(K, 1.0, mode, series_tol, schedule);
    ExpSeriesResult Ssum = exp_kernel(add_kernels(H, K), 1.0, mode, series_tol, schedule);
    IdentityReport rep;
    for (int i = 0; i < schedule.size(); ++i) {
        Real eps = schedule[i];
        Grid g = Ssum.grid(eps);
        Grid gh = Sh.grid(eps), gk = Sk.grid(eps);
        if (gh.size() != g.size() || gk.size() != g.size() ||
            (gh.nodes - g.nodes).cwiseAbs().maxCoeff() > 1e-9 ||
            (gk.nodes - g.nodes).cwiseAbs().maxCoeff() > 1e-9)
            throw ArgumentError("verify_commuting_sum: kernels must share a quadrature rule");
        CVec cw = g.weights.cast<Cplx>();
        CMat Kh = sample_matrix(H, eps, g, g);
        CMat Kk = sample_matrix(K, eps, g, g);
        CMat hk = Kh * cw.asDiagonal() * Kk;
        CMat kh = Kk * cw.asDiagonal() * Kh;
        rep.hypothesis_residual = std::max(rep.hypothesis_residual, detail::rel_residual(hk, kh));
        const CMat& Mh = Sh.grid_matrix(eps);
        const CMat& Mk = Sk.grid_matrix(eps);
        CMat composed = Mh * cw.asDiagonal() * Mk + Mh + Mk;
        Real r = detail::rel_residual(composed, Ssum.grid_matrix(eps));
        rep.per_eps.push_back(r);
        rep.max_residual = std::max(rep.max_residual, r);
    }
    rep.hypothesis_violated = rep.hypothesis_residual > commute_tol;
    rep.pass = !rep.hypothesis_violated && rep.max_residual <= tol;
    return rep;
}

// max |H(x,y) - conj(H(y,x))| on the shared grid
inline Real is_symmetric(const KernelNet& H, const EpsilonSchedule& schedule, int panels = 8,
                         int nodes = 8) {
    Box B = H.has_witness() ? H.witness_box(H.domain_x()) : H.domain_y();
    Grid g = static_box_rule(B, panels, nodes).lambda_grid();
    Real worst = 0;
    for (int i = 0; i < schedule.size(); ++i) {
        CMat K = sample_matrix(H, schedule[i], g, g);
        worst = std::max(worst, (K - K.adjoint()).cwiseAbs().maxCoeff());
    }
    return worst;
}

struct UnitarityReport {
    std::vector<std::vector<Real>> per_probe_eps; // [probe][eps]
    Real max_residual = 0;
    bool pass = true;
};

// (Uf, Ug) = (f, g) for U = Id + S_{it}, discrete scalar products on the grid
inline UnitarityReport verify_unitary(const KernelNet& H, Real t,
                                      const std::vector<std::pair<RepNet, RepNet>>& probes,
                                      const EpsilonSchedule& schedule, Real tol = 1e-7,
                                      Real sym_tol = 1e-10, Real series_tol = 1e-14) {
    if (is_symmetric(H, schedule) > sym_tol)
        throw ArgumentError("verify_unitary: kernel is not symmetric");
    ExpSeriesResult S = exp_kernel(H, Cplx(0.0, t), ExpMode::CompactSup, series_tol, schedule);
    UnitarityReport rep;
    for (const auto& [f, g] : probes) {
        std::vector<Real> row;
        for (int i = 0; i < schedule.size(); ++i) {
            Real eps = schedule[i];
            Grid grid = S.grid(eps);
            const CMat& M = S.grid_matrix(eps);
            CVec F(grid.size()), Gv(grid.size());
            for (int n = 0; n < grid.size(); ++n) {
                F[n] = f.eval(eps, grid.node(n));
                Gv[n] = g.eval(eps, grid.node(n));
            }
            CVec wf = grid.weights.cast<Cplx>().cwiseProduct(F);
            CVec wg = grid.weights.cast<Cplx>().cwiseProduct(Gv);
            CVec UF = F + M * wf;
            CVec UG = Gv + M * wg;
            Cplx ip_before = 0, ip_after = 0;
            for (int n = 0; n < grid.size(); ++n) {
                ip_before += grid.weights[n] * F[n] * std::conj(Gv[n]);
                ip_after += grid.weights[n] * UF[n] * std::conj(UG[n]);
            }
            Real denom = std::max(std::abs(ip_before), 1e-300);
            Real r = std::abs(ip_after - ip_before) / denom;
            row.push_back(r);
            rep.max_residual = std::max(rep.max_residual, r);
        }
        rep.per_probe_eps.push_back(std::move(row));
    }
    rep.pass = rep.max_residual <= tol;
    return rep;
}

} // namespace genkernel
