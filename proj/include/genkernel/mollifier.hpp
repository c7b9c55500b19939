#pragma once

#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "genkernel/chebyshev.hpp"
#include "genkernel/errors.hpp"
#include "genkernel/quadrature.hpp"
#include "genkernel/repnet.hpp"
#include "genkernel/smooth.hpp"

namespace genkernel {

// Spectral profile: plateau 1 on [0, xi0], smoothstep down to 0 at xi1. The
// inverse cosine transform of a plateau has every moment of order >= 1 equal
// to zero before truncation; truncation residue is repaired by the discrete
// moment correction below.
namespace kitconst {
constexpr Real kXi0 = 1.0;
constexpr Real kXi1 = 4.0;
constexpr Real kStepS = 6.0;
constexpr Real kStepP = 0.5;
constexpr int kDerivOrder = kJetOrder;
// even bump pairs used to zero the quadrature moments of orders {0,2,4}
constexpr std::array<Real, 3> kCenters{0.6, 1.8, 3.0};
constexpr std::array<int, 3> kOrders{0, 2, 4};
} // namespace kitconst

inline int spatial_panels(Real halfwidth) {
    return std::max(8, static_cast<int>(std::ceil(2.0 * halfwidth * kitconst::kXi1 / M_PI)));
}

// 1-d rule in profile coordinates, symmetric about 0
inline std::pair<Vec, Vec> profile_rule(Real halfwidth) {
    return axis_rule(-halfwidth, halfwidth, spatial_panels(halfwidth), 8);
}

class MollifierKit;
RepNet embed_sigma(std::function<Cplx(const Point&, const MultiIndex&)> f, const Box& domain,
                   int deriv_order = kJetOrder);

class MollifierKit {
public:
    int spectral_resolution = 0;
    Real support_radius = 0;
    int verified_moments = 0;
    bool gaussian_debug = false;
    Vec rho_samples;               // corrected rho on the build grid
    Vec build_nodes, build_weights;
    std::array<Real, 3> correction{0, 0, 0};
    Chi chi;

    Real rho(Real y) const { return rho_deriv(y, 0); }

    Real rho_deriv(Real y, int k) const {
        if (k > kitconst::kDerivOrder) throw CapabilityError("mollifier: derivative order exceeds kit order");
        if (gaussian_debug) {
            Jet t = Jet::variable(y);
            Jet g = exp(Jet::constant(0.0) - Jet::constant(0.5) * t * t);
            return g.deriv(k) / std::sqrt(2.0 * M_PI);
        }
        Real a = std::abs(y);
        if (a > support_radius) return 0.0;
        Real sign = (y < 0 && k % 2 == 1) ? -1.0 : 1.0;
        Real v = sign * cheb_[k].eval(a);
        if (a < kitconst::kCenters.back() + 1.0) {
            Jet t = Jet::variable(y);
            Jet corr = Jet::constant(0.0);
            for (std::size_t j = 0; j < kitconst::kCenters.size(); ++j) {
                Real c = kitconst::kCenters[j];
                corr = corr + correction[j] * (bump_jet(t - Jet::constant(c)) + bump_jet(t + Jet::constant(c)));
            }
            v += corr.deriv(k);
        }
        return v;
    }

    // half-width, in profile units, of the chi clip at this eps
    Real clip_radius(Real eps) const {
        Real L = std::abs(std::log(eps));
        if (L == 0.0) return support_radius;
        return std::min(support_radius, 2.0 / (eps * L)); // chi vanishes past radius 2
    }

    // d^m/dx^m of Theta_eps at x = eps*u, computed without the x/eps round
    // trip: Theta_eps(x) = eps^-1 rho(x/eps) chi(L x)
    Real theta_scaled_deriv(Real eps, Real u, int m) const {
        Real L = std::abs(std::log(eps));
        Jet rj, cj;
        for (int i = 0; i <= kJetOrder; ++i) {
            Real f = 1;
            for (int t = 2; t <= i; ++t) f *= t;
            rj.c[i] = i <= kitconst::kDerivOrder ? rho_deriv(u, i) * std::pow(eps, -i) / f : 0.0;
        }
        Jet arg = Jet::affine(eps * L * u, L); // chi argument along x
        cj = chi.jet(arg);
        Jet prod = rj * cj;
        return prod.deriv(m) / eps;
    }

    Real theta(Real eps, const Point& x) const {
        if (!(eps > 0.0) || eps > 1.0) throw ArgumentError("theta: eps must lie in (0,1]");
        Real L = std::abs(std::log(eps));
        Real v = 1.0;
        for (int i = 0; i < x.size(); ++i) v *= rho(x[i] / eps) / eps;
        return v * chi(L * x.norm());
    }

    // recommended rule for integrals against Theta_eps centered at c
    PanelRule theta_rule(Real eps, Real center = 0.0) const {
        Real rh = clip_radius(eps);
        PanelRule r;
        r.u_box = box1(-rh, rh);
        r.panels = spatial_panels(rh);
        r.nodes = 8;
        r.center = point1(center);
        r.scale = eps;
        return r;
    }

    struct ProfileTable {
        Vec u, w, rho_chi;
        Real abs_mass = 0; // sum |w * rho * chi|, drives roundoff floors
    };

    // per-eps quadrature table for convolutions (nodes in profile units)
    std::shared_ptr<const ProfileTable> profile_table(Real eps) const {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        auto it = cache_->tables.find(eps);
        if (it != cache_->tables.end()) return it->second;
        auto tab = std::make_shared<ProfileTable>();
        Real rh = clip_radius(eps);
        std::tie(tab->u, tab->w) = profile_rule(rh);
        Real L = std::abs(std::log(eps));
        tab->rho_chi.resize(tab->u.size());
        for (int j = 0; j < tab->u.size(); ++j) {
            Real v = rho(tab->u[j]) * chi(eps * L * tab->u[j]);
            tab->rho_chi[j] = v;
            tab->abs_mass += std::abs(tab->w[j] * v);
        }
        cache_->tables.emplace(eps, tab);
        return cache_->tables[eps];
    }

    friend MollifierKit build_rho(int spectral_resolution, Real support_radius);
    friend MollifierKit build_gaussian_kit(Real support_radius);

private:
    std::array<ChebSeries, kitconst::kDerivOrder + 1> cheb_; // raw spectral profile per order
    struct Cache {
        std::mutex mutex;
        std::map<Real, std::shared_ptr<const ProfileTable>> tables;
    };
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();

    friend struct KitCacheFile;
};

namespace detail {

struct SpectralProfile {
    Vec xi, w, P;

    SpectralProfile(int resolution, Real radius) {
        int panels = std::max(static_cast<int>(std::ceil(resolution / 10.0)),
                              static_cast<int>(std::ceil(radius * kitconst::kXi1 / M_PI)));
        std::tie(xi, w) = axis_rule(0.0, kitconst::kXi1, panels, 10);
        SmoothStep step{kitconst::kStepS, kitconst::kStepP};
        P.resize(xi.size());
        for (int i = 0; i < xi.size(); ++i) {
            Real t = (xi[i] - kitconst::kXi0) / (kitconst::kXi1 - kitconst::kXi0);
            P[i] = xi[i] <= kitconst::kXi0 ? 1.0 : step(1.0 - t);
        }
    }

    // (1/pi) int xi^k P(xi) cos(xi y + k pi/2) dxi
    Real deriv(Real y, int k) const {
        Real acc = 0;
        for (int i = 0; i < xi.size(); ++i) {
            Real phase = xi[i] * y;
            Real c;
            switch (k % 4) {
                case 0: c = std::cos(phase); break;
                case 1: c = -std::sin(phase); break;
                case 2: c = -std::cos(phase); break;
                default: c = std::sin(phase); break;
            }
            acc += w[i] * P[i] * std::pow(xi[i], k) * c;
        }
        return acc / M_PI;
    }
};

inline Real pair_bump_deriv(Real y, Real center, int k) {
    Jet t = Jet::variable(y);
    Jet v = bump_jet(t - Jet::constant(center)) + bump_jet(t + Jet::constant(center));
    return v.deriv(k);
}

} // namespace detail

// sidecar cache keyed by (resolution, radius)
struct KitCacheFile {
    static std::filesystem::path path_for(int resolution, Real radius) {
        const char* dir = std::getenv("GENKERNEL_CACHE_DIR");
        std::filesystem::path base = dir ? dir : ".genkernel-cache";
        char name[96];
        std::snprintf(name, sizeof name, "rho_%d_%.6g.bin", resolution, radius);
        return base / name;
    }

    static bool load(MollifierKit& kit, int resolution, Real radius) {
        std::ifstream in(path_for(resolution, radius), std::ios::binary);
        if (!in) return false;
        char magic[8] = {};
        in.read(magic, 8);
        if (std::strncmp(magic, "GKRHO2", 6) != 0) return false;
        int res = 0, M = 0, degree = 0;
        Real rad = 0;
        in.read(reinterpret_cast<char*>(&res), sizeof res);
        in.read(reinterpret_cast<char*>(&rad), sizeof rad);
        in.read(reinterpret_cast<char*>(&M), sizeof M);
        in.read(reinterpret_cast<char*>(&degree), sizeof degree);
        if (!in || res != resolution || rad != radius || degree < 2 || degree > 1 << 20) return false;
        in.read(reinterpret_cast<char*>(kit.correction.data()), sizeof(Real) * 3);
        for (int k = 0; k <= kitconst::kDerivOrder; ++k) {
            kit.cheb_[k].a = 0;
            kit.cheb_[k].b = radius;
            kit.cheb_[k].coef.resize(degree + 1);
            in.read(reinterpret_cast<char*>(kit.cheb_[k].coef.data()), sizeof(Real) * (degree + 1));
        }
        if (!in) return false;
        kit.spectral_resolution = resolution;
        kit.support_radius = radius;
        kit.verified_moments = M;
        return true;
    }

    static void store(const MollifierKit& kit) {
        auto p = path_for(kit.spectral_resolution, kit.support_radius);
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) return;
        // write-then-rename so concurrent builders never expose a torn file
        auto tmp = p;
        tmp += "." + std::to_string(static_cast<long>(::getpid())) + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) return;
            out.write("GKRHO2\0\0", 8);
            int degree = static_cast<int>(kit.cheb_[0].coef.size()) - 1;
            out.write(reinterpret_cast<const char*>(&kit.spectral_resolution), sizeof(int));
            out.write(reinterpret_cast<const char*>(&kit.support_radius), sizeof(Real));
            out.write(reinterpret_cast<const char*>(&kit.verified_moments), sizeof(int));
            out.write(reinterpret_cast<const char*>(&degree), sizeof(int));
            out.write(reinterpret_cast<const char*>(kit.correction.data()), sizeof(Real) * 3);
            for (int k = 0; k <= kitconst::kDerivOrder; ++k)
                out.write(reinterpret_cast<const char*>(kit.cheb_[k].coef.data()),
                          sizeof(Real) * kit.cheb_[k].coef.size());
            if (!out) return;
        }
        std::filesystem::rename(tmp, p, ec);
        if (ec) std::filesystem::remove(tmp, ec);
    }
};

inline MollifierKit build_rho(int spectral_resolution, Real support_radius) {
    if (spectral_resolution < 64) throw ArgumentError("build_rho: spectral_resolution must be >= 64");
    if (!(support_radius > 0)) throw ArgumentError("build_rho: support_radius must be positive");

    MollifierKit kit;
    bool cached = KitCacheFile::load(kit, spectral_resolution, support_radius);

    if (!cached) {
        detail::SpectralProfile spec(spectral_resolution, support_radius);
        kit.spectral_resolution = spectral_resolution;
        kit.support_radius = support_radius;

        // chebyshev tables of the raw spectral profile, one per derivative order;
        // the profile extends to an entire function, so coefficients fall off
        // superexponentially once the degree clears radius * xi1 * e / 4
        int degree = std::max(128, static_cast<int>(std::ceil(1.2 * support_radius * kitconst::kXi1)));
        degree = ((degree + 31) / 32) * 32;
        for (int tries = 0;; ++tries) {
            for (int k = 0; k <= kitconst::kDerivOrder; ++k)
                kit.cheb_[k] = cheb_fit([&](Real y) { return spec.deriv(y, k); }, 0.0, support_radius, degree);
            Real worst = 0;
            for (int k = 0; k <= kitconst::kDerivOrder; ++k)
                worst = std::max(worst, kit.cheb_[k].tail_decay());
            if (worst < 1e-13) break;
            if (tries >= 2) throw ConstructionError("build_rho: chebyshev fit of the spectral profile did not converge");
            degree = degree * 3 / 2;
        }
    }

    std::tie(kit.build_nodes, kit.build_weights) = profile_rule(support_radius);
    auto raw = [&](Real y) { return std::abs(y) > support_radius ? 0.0 : kit.cheb_[0].eval(std::abs(y)); };

    if (!cached) {
        // severe truncation leaves mass the bump correction cannot honestly repair
        Real raw_mass = 0;
        for (int j = 0; j < kit.build_nodes.size(); ++j)
            raw_mass += kit.build_weights[j] * raw(kit.build_nodes[j]);
        if (std::abs(raw_mass - 1.0) > 1e-3)
            throw ConstructionError("build_rho: support_radius too small, truncated mass defect " +
                                    std::to_string(std::abs(raw_mass - 1.0)));
        if (support_radius < kitconst::kCenters.back() + 1.0)
            throw ConstructionError("build_rho: support_radius too small for the moment correction");

        // zero the build-grid moments of orders {0,2,4} with even bump pairs
        Mat A(3, 3);
        Vec b(3);
        for (int i = 0; i < 3; ++i) {
            int m = kitconst::kOrders[i];
            Real raw_m = 0;
            for (int j = 0; j < kit.build_nodes.size(); ++j)
                raw_m += kit.build_weights[j] * std::pow(kit.build_nodes[j], m) * raw(kit.build_nodes[j]);
            b[i] = (m == 0 ? 1.0 : 0.0) - raw_m;
            for (int jc = 0; jc < 3; ++jc) {
                Real acc = 0;
                for (int j = 0; j < kit.build_nodes.size(); ++j)
                    acc += kit.build_weights[j] * std::pow(kit.build_nodes[j], m) *
                           detail::pair_bump_deriv(kit.build_nodes[j], kitconst::kCenters[jc], 0);
                A(i, jc) = acc;
            }
        }
        Vec c = A.fullPivLu().solve(b);
        for (int j = 0; j < 3; ++j) kit.correction[j] = c[j];
        Real cmax = c.cwiseAbs().maxCoeff();
        if (cmax > 1e-4)
            throw ConstructionError("build_rho: moment correction too large (" + std::to_string(cmax) +
                                    "), spectral profile inaccurate at this resolution");
    }

    kit.rho_samples.resize(kit.build_nodes.size());
    for (int j = 0; j < kit.build_nodes.size(); ++j) kit.rho_samples[j] = kit.rho(kit.build_nodes[j]);

    Real mass = 0;
    for (int j = 0; j < kit.build_nodes.size(); ++j) mass += kit.build_weights[j] * kit.rho_samples[j];
    if (std::abs(mass - 1.0) > 1e-10)
        throw ConstructionError("build_rho: unit mass violated after correction");

    int M = 0;
    for (int m = 1; m <= 8; ++m) {
        Real mom = 0;
        for (int j = 0; j < kit.build_nodes.size(); ++j)
            mom += kit.build_weights[j] * std::pow(kit.build_nodes[j], m) * kit.rho_samples[j];
        if (std::abs(mom) < 1e-8)
            M = m;
        else
            break;
    }
    if (M < 1) throw ConstructionError("build_rho: first moment does not vanish");
    if (!cached) {
        kit.verified_moments = M;
        KitCacheFile::store(kit);
    } else {
        kit.verified_moments = M; // recomputed either way; must agree with the cache
    }
    return kit;
}

// debug substitute: Gaussian density, second moment 1 (so M = 1)
inline MollifierKit build_gaussian_kit(Real support_radius = 12.0) {
    MollifierKit kit;
    kit.gaussian_debug = true;
    kit.spectral_resolution = 0;
    kit.support_radius = support_radius;
    std::tie(kit.build_nodes, kit.build_weights) = profile_rule(support_radius);
    kit.rho_samples.resize(kit.build_nodes.size());
    for (int j = 0; j < kit.build_nodes.size(); ++j) kit.rho_samples[j] = kit.rho(kit.build_nodes[j]);
    kit.verified_moments = 1;
    return kit;
}

// |int Theta_eps - 1| (m = 0) and |int x^m Theta_eps| (m >= 1), evaluated in
// profile coordinates where int x^m Theta = eps^m int u^m rho(u) chi(eps L u) du
inline std::vector<SeminormReport> check_scarp_moments(const MollifierKit& kit,
                                                       const EpsilonSchedule& schedule, int m_max) {
    if (!kit.gaussian_debug && m_max > kit.verified_moments)
        throw CapabilityError("check_scarp_moments: m_max exceeds verified moment order");
    std::vector<SeminormReport> out;
    for (int m = 0; m <= m_max; ++m) {
        std::vector<Real> vals(schedule.size()), floors(schedule.size());
        for (int i = 0; i < schedule.size(); ++i) {
            Real eps = schedule[i];
            auto tab = kit.profile_table(eps);
            Real acc = 0, mag = 0;
            for (int j = 0; j < tab->u.size(); ++j) {
                Real term = tab->w[j] * std::pow(tab->u[j], m) * tab->rho_chi[j];
                acc += term;
                mag += std::abs(term);
            }
            Real target = m == 0 ? 1.0 : 0.0;
            vals[i] = std::pow(eps, m) * std::abs(acc - target);
            floors[i] = std::pow(eps, m) * noise_floor(mag + target);
        }
        out.push_back(fit_growth(vals, schedule, floors));
    }
    return out;
}

// constant-in-eps embedding of a smooth function
inline RepNet embed_sigma(std::function<Cplx(const Point&, const MultiIndex&)> f, const Box& domain,
                          int deriv_order) {
    RepNet r;
    r.dim = domain.dim();
    r.deriv_order = deriv_order;
    r.domain = domain;
    r.deriv = [f](Real, const Point& x, const MultiIndex& al) { return f(x, al); };
    return r;
}

// ---- distribution embedding -------------------------------------------

struct DistributionSpec {
    struct Term {
        enum Kind { Dirac, Smooth, DerivedContinuous } kind = Dirac;
        Point point;                                              // Dirac
        MultiIndex alpha;                                         // Dirac / DerivedContinuous
        std::function<Cplx(const Point&, const MultiIndex&)> f;   // Smooth (with derivatives)
        std::function<Cplx(const Point&)> f0;                     // DerivedContinuous (values only)
    };
    std::vector<Term> terms;
    Box support_box;
};

namespace detail {

// boundary cutoff gamma_eps: 1 where d(x, boundary) >= eps and |x| <= 1/eps,
// 0 past an eps/2 transition on either side
struct Gamma {
    Box domain;
    SmoothStep step{2.0, 1.0};

    Jet jet(Real eps, Real x) const { // d = 1
        Real lo = domain.lo[0], hi = domain.hi[0];
        Jet t = Jet::variable(x);
        Real dlo = x - lo, dhi = hi - x;
        Jet dist = dlo <= dhi ? t - Jet::constant(lo) : Jet::constant(hi) - t;
        Jet inner = step.jet((2.0 / eps) * (dist - Jet::constant(0.5 * eps)));
        Real radius = 1.0 / eps + 0.5 * eps;
        Jet ax = x < 0 ? -t : t;
        Jet outer = step.jet((2.0 / eps) * (Jet::constant(radius) - ax));
        return inner * outer;
    }

    Real value(Real eps, Real x) const { return jet(eps, x).value(); }
};

} // namespace detail

// i_S: T -> (gamma_eps T * Theta_eps). Dirac derivatives expand through the
// Leibniz rule in gamma; function terms integrate over a per-eps profile-grid
// table with f sampled at x - eps*u.
inline RepNet embed_is(const DistributionSpec& T, const MollifierKit& kit, const Box& domain) {
    if (domain.dim() != 1) throw CapabilityError("embed_is: implemented for d = 1");
    if (!domain.contains_box(T.support_box) ||
        !(T.support_box.lo[0] > domain.lo[0] && T.support_box.hi[0] < domain.hi[0]))
        throw ArgumentError("embed_is: support must lie in the domain interior");
    for (const auto& term : T.terms)
        if (term.kind == DistributionSpec::Term::Dirac && alpha_order(term.alpha) > 4)
            throw CapabilityError("embed_is: Dirac derivative order capped at 4");

    auto kitp = std::make_shared<MollifierKit>(kit);
    detail::Gamma gamma{domain};
    auto terms = T.terms;

    int max_alpha = 0;
    bool all_dirac = true;
    for (const auto& term : T.terms) {
        if (term.kind != DistributionSpec::Term::Smooth) max_alpha = std::max(max_alpha, term.alpha[0]);
        if (term.kind != DistributionSpec::Term::Dirac) all_dirac = false;
    }

    RepNet r;
    r.dim = 1;
    r.deriv_order = kJetOrder - max_alpha; // jet budget left after the distribution order
    r.domain = domain;
    Real R = kit.support_radius;
    r.support = Box(Vec::Constant(1, std::max(T.support_box.lo[0] - R, domain.lo[0])),
                    Vec::Constant(1, std::min(T.support_box.hi[0] + R, domain.hi[0])));

    r.deriv = [kitp, gamma, terms](Real eps, const Point& x, const MultiIndex& al) -> Cplx {
        int g = al[0];
        Cplx total = 0;
        for (const auto& term : terms) {
            switch (term.kind) {
                case DistributionSpec::Term::Dirac: {
                    Real p = term.point[0];
                    int a = term.alpha[0];
                    Jet gj = gamma.jet(eps, p);
                    Cplx acc = 0;
                    for (int beta = 0; beta <= a; ++beta) {
                        Real gb = gj.deriv(beta);
                        if (gb == 0.0) continue;
                        Real sign = beta % 2 == 0 ? 1.0 : -1.0;
                        Real u = (x[0] - p) / eps;
                        acc += binomial(a, beta) * sign * gb *
                               kitp->theta_scaled_deriv(eps, u, a - beta + g);
                    }
                    total += acc;
                    break;
                }
                case DistributionSpec::Term::Smooth: {
                    auto tab = kitp->profile_table(eps);
                    Cplx acc = 0;
                    MultiIndex dg = MultiIndex::Constant(1, g);
                    for (int j = 0; j < tab->u.size(); ++j) {
                        if (tab->rho_chi[j] == 0.0) continue;
                        Real lam = x[0] - eps * tab->u[j];
                        Jet gl = gamma.jet(eps, lam);
                        Cplx fv = 0;
                        if (gl.value() != 0.0) {
                            // (gamma f)^(g) via Leibniz; gamma is constant 1 away from the boundary
                            for (int b = 0; b <= g; ++b) {
                                Real gb = gl.deriv(b);
                                if (gb == 0.0) continue;
                                fv += binomial(g, b) * gb *
                                      term.f(point1(lam), MultiIndex::Constant(1, g - b));
                            }
                        }
                        acc += tab->w[j] * tab->rho_chi[j] * fv;
                    }
                    total += acc;
                    break;
                }
                case DistributionSpec::Term::DerivedContinuous: {
                    int a = term.alpha[0];
                    auto tab = kitp->profile_table(eps);
                    Cplx acc = 0;
                    for (int j = 0; j < tab->u.size(); ++j) {
                        Real lam = x[0] - eps * tab->u[j];
                        Jet gl = gamma.jet(eps, lam);
                        if (gl.value() == 0.0) continue;
                        Cplx fv = term.f0(point1(lam));
                        if (fv == Cplx(0.0)) continue;
                        Real theta_part = 0;
                        for (int b = 0; b <= a; ++b) {
                            Real gb = gl.deriv(b);
                            if (gb == 0.0) continue;
                            Real sign = b % 2 == 0 ? 1.0 : -1.0;
                            theta_part += binomial(a, b) * sign * gb *
                                          kitp->theta_scaled_deriv(eps, tab->u[j], a - b + g);
                        }
                        acc += eps * tab->w[j] * fv * theta_part;
                    }
                    total += acc;
                    break;
                }
            }
        }
        return total;
    };

    r.scale_hint = [kitp, terms](Real eps, const Point& x) -> Real {
        Real sc = 0;
        for (const auto& term : terms) {
            switch (term.kind) {
                case DistributionSpec::Term::Dirac: {
                    Real u = (x[0] - term.point[0]) / eps;
                    sc += std::abs(kitp->theta_scaled_deriv(eps, u, term.alpha[0]));
                    break;
                }
                case DistributionSpec::Term::Smooth: {
                    auto tab = kitp->profile_table(eps);
                    Real acc = 0;
                    MultiIndex z = MultiIndex::Zero(1);
                    for (int j = 0; j < tab->u.size(); ++j)
                        acc += std::abs(tab->w[j] * tab->rho_chi[j] *
                                        term.f(point1(x[0] - eps * tab->u[j]), z));
                    sc += acc;
                    break;
                }
                case DistributionSpec::Term::DerivedContinuous: {
                    auto tab = kitp->profile_table(eps);
                    Real acc = 0;
                    for (int j = 0; j < tab->u.size(); ++j)
                        acc += std::abs(eps * tab->w[j] * term.f0(point1(x[0] - eps * tab->u[j])) *
                                        kitp->theta_scaled_deriv(eps, tab->u[j], term.alpha[0]));
                    sc += acc;
                    break;
                }
            }
        }
        return sc;
    };

    if (all_dirac) {
        r.quad_hint = [kitp, c = T.support_box.center()[0]](Real eps) -> std::optional<PanelRule> {
            return kitp->theta_rule(eps, c);
        };
    } else {
        Real half = 0.5 * (r.support->hi[0] - r.support->lo[0]);
        Real mid = r.support->center()[0];
        r.quad_hint = [half, mid](Real) -> std::optional<PanelRule> {
            PanelRule rule;
            rule.u_box = box1(-half, half);
            rule.panels = spatial_panels(half);
            rule.nodes = 8;
            rule.center = point1(mid);
            rule.scale = 1.0;
            return rule;
        };
    }
    return r;
}

inline RepNet theta_net(const MollifierKit& kit, const Box& domain) {
    DistributionSpec T;
    DistributionSpec::Term d;
    d.kind = DistributionSpec::Term::Dirac;
    d.point = point1(0.0);
    d.alpha = MultiIndex::Zero(1);
    T.terms.push_back(d);
    Real m = std::min(-domain.lo[0], domain.hi[0]) * 0.25;
    T.support_box = box1(-m, m);
    return embed_is(T, kit, domain);
}

} // namespace genkernel
