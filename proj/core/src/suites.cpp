#include "hsca/suites.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hsca::suites {

using clifford::Multivector;
using clifford::Paravector;
using ops::GridField;
using poly::HomPoly;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

HomPoly<double> random_in(const poly::MonogenicBasis& B, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    HomPoly<double> p(B.m, B.k);
    for (const auto& e : B.elements) p += e * nd(rng);
    return p;
}

const poly::MonogenicBasis& basis_of(const Ctx& ctx, int chirality) {
    if (chirality == 0) throw std::invalid_argument("test field: chirality must be +1 or -1");
    return chirality > 0 ? ctx->basis_plus : ctx->basis_minus;
}

double rel(double num2, double den2) { return den2 > 0 ? std::sqrt(num2 / den2) : std::sqrt(num2); }

double poly_norm2(const HomPoly<double>& p) { return poly::real_inner(p, p); }

HomPoly<double> conj_poly(const HomPoly<double>& p) {
    HomPoly<double> r(p.m(), p.k());
    for (int i = 0; i < p.nmono(); ++i) r.set(i, clifford::conjugate(p.coeff(i)));
    return r;
}

// right multiplication by ∂̄_x: Σ_j ∂_j g e_j (e_0 = 1)
HomPoly<double> right_dbar(const AnalyticField& g, const Paravector<double>& x) {
    HomPoly<double> r = g.deriv(x, 0);
    for (int j = 1; j < g.m; ++j) r += g.deriv(x, j).right_mul(Multivector<double>::e(g.m, j));
    return r;
}

HomPoly<double> left_dbar(const AnalyticField& f, const Paravector<double>& x) {
    HomPoly<double> r = f.deriv(x, 0);
    for (int j = 1; j < f.m; ++j) r += f.deriv(x, j).left_e(j);
    return r;
}

std::vector<Paravector<double>> bp_probes(const Ctx& ctx) {
    const auto& g = *ctx->grid;
    const int m = g.m();
    std::vector<Paravector<double>> ys;
    const double fr[3] = {0.3, 0.5, 0.7};
    int total = 1;
    for (int i = 0; i < m; ++i) total *= 3;
    for (int t = 0; t < total; ++t) {
        Paravector<double> y(m);
        int r = t;
        for (int i = 0; i < m; ++i) {
            const auto [a, b] = g.bounds()[std::size_t(i)];
            y[i] = a + fr[r % 3] * (b - a) + g.h(i) / 3;
            r /= 3;
        }
        ys.push_back(y);
    }
    return ys;
}

std::vector<double> centre(const Ctx& ctx, double shift) {
    std::vector<double> c;
    for (const auto& [a, b] : ctx->grid->bounds()) c.push_back(a + (0.5 + shift) * (b - a));
    return c;
}

double min_width(const Ctx& ctx) {
    double w = INFINITY;
    for (const auto& [a, b] : ctx->grid->bounds()) w = std::min(w, b - a);
    return w;
}

void finish_ladder(SuiteReport& r) { r.order_estimate = order_estimate(r.N, r.residuals); }

// ---- suites ------------------------------------------------------------------------

SuiteReport fischer(const SuiteConfig& cfg) {
    SuiteReport r;
    r.invariant = "h = P^+h + u_bar p_{k-1}, cr_bar(P^+h) = 0, cr(p_{k-1}) = 0, cr_bar(u_bar q) = (m+2k-2) q";
    r.identity = "Fischer decomposition";
    r.threshold = 1e-12;
    if (cfg.k < 1) throw std::invalid_argument("fischer: k >= 1");
    const int m = cfg.m, k = cfg.k;
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
        HomPoly<double> h = random_harmonic(m, k, cfg.seed + uint64_t(t));
        const double s = std::max(1.0, h.max_abs());
        auto parts = poly::fischer_split(h);
        HomPoly<double> back = parts.p_k + poly::mul_u(parts.p_km1, -1);
        worst = std::max(worst, (back - h).max_abs() / s);
        worst = std::max(worst, poly::cr_bar(parts.p_k).max_abs() / s);
        worst = std::max(worst, poly::cr(parts.p_km1).max_abs() / s);
        HomPoly<double> pp = poly::proj_plus(h);
        worst = std::max(worst, (poly::proj_plus(pp) - pp).max_abs() / s);
    }
    // exact rational check over a spanning set of M_{k-1}^-
    bool exact = true;
    const auto tab = poly::MonomialTable::get(m, k - 1);
    const int dim = 1 << (m - 1);
    for (int i = 0; i < tab->size() && exact; ++i)
        for (int A = 0; A < dim && exact; ++A) {
            auto mono = HomPoly<Rational>::monomial(tab->exponent(i), Multivector<Rational>::blade(m, uint32_t(A)));
            HomPoly<Rational> q = poly::proj_minus(poly::harmonic_project(mono));
            HomPoly<Rational> lhs = poly::cr_bar(poly::mul_u(q, -1));
            if (!(lhs - q * Rational(m + 2 * k - 2)).is_zero()) exact = false;
        }
    r.series.push_back({"rational_identity_exact", {exact ? 1.0 : 0.0}});
    r.residuals.push_back(exact ? worst : std::max(worst, 1.0));
    r.pass = r.residuals[0] <= r.threshold;
    return r;
}

SuiteReport harortho(const SuiteConfig& cfg) {
    SuiteReport r;
    r.invariant = "integral over the sphere of conj(P^+h) (h - P^+h) vanishes (and likewise for P^-)";
    r.identity = "orthogonality of the Fischer components";
    r.threshold = 1e-12;
    const int m = cfg.m, k = cfg.k;
    const auto rule = disc::make_sphere_rule(m, 2 * k + 2);
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
        HomPoly<double> h = random_harmonic(m, k, cfg.seed + uint64_t(t));
        const double s = std::max(poly_norm2(h), 1e-300);
        for (int chir : {1, -1}) {
            HomPoly<double> p = poly::project(h, chir);
            const auto v = poly::sphere_pair(conj_poly(p), h - p, rule);
            worst = std::max(worst, clifford::norm(v) / s);
        }
    }
    r.residuals.push_back(worst);
    r.pass = worst <= r.threshold;
    return r;
}

SuiteReport right_inverse(const SuiteConfig& cfg) {
    SuiteReport r;
    r.invariant = "||R_k T_k f - f|| / ||f|| decreases with order >= 1 and is <= 5e-2 on the finest grid";
    r.identity = "right inverse R_k T_k = I";
    r.threshold = 5e-2;
    for (int N : cfg.ladder) {
        auto ctx = make_context(cfg, N);
        GridField f = disc::sample(polynomial_field(ctx, +1, 2, cfg.seed), ctx->grid);
        GridField d = ops::apply_Rk(ops::teodorescu(f, ctx), ctx) - f;
        r.N.push_back(N);
        r.residuals.push_back(ops::norm(d, ctx) / ops::norm(f, ctx));
    }
    finish_ladder(r);
    r.pass = strictly_decreasing(r.residuals) && r.order_estimate >= 1.0 && r.residuals.back() <= r.threshold;
    return r;
}

SuiteReport borel_pompeiu(const SuiteConfig& cfg) {
    SuiteReport r;
    r.invariant = "||F_k g + T_k R_k g - g|| / ||g|| at off-lattice probes decreases with order >= 1, <= 5e-2 finest";
    r.identity = "Borel-Pompeiu formula";
    r.threshold = 5e-2;
    for (int N : cfg.ladder) {
        auto ctx = make_context(cfg, N);
        AnalyticField g = polynomial_field(ctx, -1, 2, cfg.seed);
        GridField Rg = disc::sample(ops::apply_Rk(g, ctx), ctx->grid);
        const auto ys = bp_probes(ctx);
        const auto F = ops::cauchy_bitsadze(ops::boundary_values(g, ctx), ys, ctx);
        const auto T = ops::teodorescu(Rg, ys, ctx);
        double num = 0, den = 0;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            const auto gv = g.value(ys[i]);
            num += poly_norm2(F[i] + T[i] - gv);
            den += poly_norm2(gv);
        }
        r.N.push_back(N);
        r.residuals.push_back(rel(num, den));
    }
    finish_ladder(r);
    r.pass = strictly_decreasing(r.residuals) && r.order_estimate >= 1.0 && r.residuals.back() <= r.threshold;
    return r;
}

SuiteReport pi_id(const SuiteConfig& cfg) {
    SuiteReport r;
    r.invariant = "||Pi^dag Pi f - f + R_k F_k^dag T_k f|| / ||f|| decreases; ||Pi^dag Pi f - f|| / ||f|| <= 1e-1 finest";
    r.identity = "Pi^dag Pi = I - R_k F_k^dag T_k";
    r.threshold = 1e-1;
    std::vector<double> plain;
    for (int N : cfg.ladder) {
        auto ctx = make_context(cfg, N);
        AnalyticField g = bump_field(ctx, -1, centre(ctx, 0.0), 0.4 * min_width(ctx), cfg.seed);
        GridField f = disc::sample(ops::apply_Rk(g, ctx), ctx->grid);
        GridField Tf = ops::teodorescu(f, ctx);
        GridField Pf = ops::apply_Rk_dagger(Tf, ctx);
        GridField PdPf = ops::pi_dagger_apply(Pf, ctx);
        GridField Fterm =
            ops::apply_Rk(ops::cauchy_bitsadze(ops::teodorescu_boundary(f, ctx), ctx, true), ctx);
        const double fn = ops::norm(f, ctx);
        r.N.push_back(N);
        r.residuals.push_back(ops::norm(PdPf - f + Fterm, ctx) / fn);
        plain.push_back(ops::norm(PdPf - f, ctx) / fn);
    }
    r.series.push_back({"residual_without_boundary_term", plain});
    finish_ladder(r);
    r.pass = strictly_decreasing(r.residuals) && strictly_decreasing(plain) && plain.back() <= r.threshold;
    return r;
}

SuiteReport prop_a(const SuiteConfig& cfg) {
    SuiteReport r;
    r.invariant = "||Pi R_k g - R_k^dag g + R_k^dag F_k g|| / ||R_k^dag g|| decreases under refinement";
    r.identity = "Pi R_k = R_k^dag - R_k^dag F_k";
    r.threshold = 0;
    for (int N : cfg.ladder) {
        auto ctx = make_context(cfg, N);
        AnalyticField g = polynomial_field(ctx, -1, 2, cfg.seed);
        GridField Rg = disc::sample(ops::apply_Rk(g, ctx), ctx->grid);
        GridField Rdg = disc::sample(ops::apply_Rk_dagger(g, ctx), ctx->grid);
        GridField Fg = ops::cauchy_bitsadze(ops::boundary_values(g, ctx), ctx);
        GridField d = ops::pi_apply(Rg, ctx) - Rdg + ops::apply_Rk_dagger(Fg, ctx);
        r.N.push_back(N);
        r.residuals.push_back(ops::norm(d, ctx) / ops::norm(Rdg, ctx));
    }
    finish_ladder(r);
    r.pass = strictly_decreasing(r.residuals);
    return r;
}

SuiteReport stokes(const SuiteConfig& cfg) {
    SuiteReport r;
    r.invariant = "boundary term minus both volume terms, relative to the volume terms, decreases with order >= 1";
    r.identity = "Stokes theorem for the Rarita-Schwinger pairing";
    r.threshold = 0;
    for (int N : cfg.ladder) {
        auto ctx = make_context(cfg, N);
        AnalyticField f = polynomial_field(ctx, -1, 2, cfg.seed);
        AnalyticField g = polynomial_field(ctx, -1, 2, cfg.seed + 1);
        auto b = stokes_balance(f, g, ctx);
        const double scale = clifford::norm(b.volume_left) + clifford::norm(b.volume_right);
        r.N.push_back(N);
        r.residuals.push_back(clifford::norm(b.boundary - b.volume_left - b.volume_right) / scale);
    }
    finish_ladder(r);
    r.pass = strictly_decreasing(r.residuals) && r.order_estimate >= 1.0;
    return r;
}

SuiteReport adjoint(const SuiteConfig& cfg) {
    SuiteReport r;
    r.invariant = "exactly one sign s gives |<Pi f, g> - s <f, J T_k^dag R_k J g>| / (||f|| ||g||) -> 0";
    r.identity = "adjoint of Pi";
    r.threshold = 0.1;  // winner / loser on the finest grid
    std::vector<double> plus, minus;
    for (int N : cfg.ladder) {
        auto ctx = make_context(cfg, N);
        const double w = min_width(ctx);
        GridField f = disc::sample(bump_field(ctx, +1, centre(ctx, 0.0), 0.4 * w, cfg.seed), ctx->grid);
        AnalyticField ga = bump_field(ctx, +1, centre(ctx, -0.05), 0.35 * w, cfg.seed + 1);
        GridField g = disc::sample(ga, ctx->grid);
        GridField RJg = disc::sample(ops::apply_Rk(ops::flip_u0(ga), ctx), ctx->grid);
        GridField rhs = ops::flip_u0(ops::teodorescu(RJg, ctx, true));
        const double a = ops::inner_real(ops::pi_apply(f, ctx), g, ctx);
        const double b = ops::inner_real(f, rhs, ctx);
        const double s = ops::norm(f, ctx) * ops::norm(g, ctx);
        r.N.push_back(N);
        plus.push_back(std::abs(a - b) / s);
        minus.push_back(std::abs(a + b) / s);
    }
    const bool plus_wins = plus.back() <= minus.back();
    r.sign = plus_wins ? 1 : -1;
    r.residuals = plus_wins ? plus : minus;
    const auto& loser = plus_wins ? minus : plus;
    r.series.push_back({"residual_plus", plus});
    r.series.push_back({"residual_minus", minus});
    finish_ladder(r);
    r.pass = strictly_decreasing(r.residuals) && r.residuals.back() <= r.threshold * loser.back();
    return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"fischer", "harortho", "right_inverse", "borel_pompeiu",
                                                "pi_id",   "propA",    "stokes",        "adjoint"};
    return names;
}

bool is_suite(const std::string& name) {
    const auto& n = suite_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

SuiteReport run_suite(const std::string& name, const SuiteConfig& cfg) {
    if (!is_suite(name)) throw std::invalid_argument("unknown suite: " + name);
    SuiteReport r;
    if (name == "fischer") r = fischer(cfg);
    else if (name == "harortho") r = harortho(cfg);
    else if (name == "right_inverse") r = right_inverse(cfg);
    else if (name == "borel_pompeiu") r = borel_pompeiu(cfg);
    else if (name == "pi_id") r = pi_id(cfg);
    else if (name == "propA") r = prop_a(cfg);
    else if (name == "stokes") r = stokes(cfg);
    else r = adjoint(cfg);
    r.suite = name;
    r.m = cfg.m;
    r.k = cfg.k;
    if (!r.pass) r.message = "violated: " + r.invariant + " (" + r.identity + ")";
    return r;
}

double order_estimate(const std::vector<int>& N, const std::vector<double>& r) {
    if (N.size() != r.size() || N.size() < 2) return kNaN;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(N.size());
    for (std::size_t i = 0; i < N.size(); ++i) {
        if (!(r[i] > 0)) return kNaN;
        const double x = std::log(double(N[i])), y = -std::log(r[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    return den > 0 ? (n * sxy - sx * sy) / den : kNaN;
}

bool strictly_decreasing(const std::vector<double>& r) {
    for (std::size_t i = 1; i < r.size(); ++i)
        if (!(r[i] < r[i - 1])) return false;
    return !r.empty();
}

std::vector<std::pair<double, double>> unit_box(int m) { return std::vector<std::pair<double, double>>(std::size_t(m), {0.0, 1.0}); }

Ctx make_context(const SuiteConfig& cfg, int N) {
    auto grid = disc::make_box_grid(cfg.bounds.empty() ? unit_box(cfg.m) : cfg.bounds, N);
    ops::ContextOptions opt;
    opt.sphere_degree = cfg.sphere_degree;
    opt.threads = cfg.threads;
    return ops::OperatorContext::make(grid, cfg.k, opt);
}

AnalyticField polynomial_field(const Ctx& ctx, int chirality, int degree, uint64_t seed) {
    const auto& B = basis_of(ctx, chirality);
    const int m = ctx->m;
    std::vector<poly::Exponent> xs;
    for (int d = 0; d <= degree; ++d) {
        auto tab = poly::MonomialTable::get(m, d);
        for (int i = 0; i < tab->size(); ++i) xs.push_back(tab->exponent(i));
    }
    std::mt19937_64 rng(seed);
    std::vector<HomPoly<double>> qs;
    for (std::size_t b = 0; b < xs.size(); ++b) qs.push_back(random_in(B, rng));

    AnalyticField f;
    f.m = m;
    f.k = ctx->k;
    f.chirality = chirality;
    f.value = [xs, qs, m](const Paravector<double>& x) {
        HomPoly<double> v(qs[0].m(), qs[0].k());
        for (std::size_t b = 0; b < xs.size(); ++b) {
            double w = 1;
            for (int i = 0; i < m; ++i) w *= std::pow(x[i], xs[b][std::size_t(i)]);
            v += qs[b] * w;
        }
        return v;
    };
    f.deriv = [xs, qs, m](const Paravector<double>& x, int j) {
        HomPoly<double> v(qs[0].m(), qs[0].k());
        for (std::size_t b = 0; b < xs.size(); ++b) {
            const int e = xs[b][std::size_t(j)];
            if (e == 0) continue;
            double w = e;
            for (int i = 0; i < m; ++i) w *= std::pow(x[i], xs[b][std::size_t(i)] - (i == j ? 1 : 0));
            v += qs[b] * w;
        }
        return v;
    };
    return f;
}

AnalyticField bump_field(const Ctx& ctx, int chirality, const std::vector<double>& center, double radius,
                         uint64_t seed) {
    const auto& B = basis_of(ctx, chirality);
    const int m = ctx->m;
    if (int(center.size()) != m || !(radius > 0)) throw std::invalid_argument("bump_field: centre/radius");
    std::mt19937_64 rng(seed);
    std::vector<HomPoly<double>> qs;
    for (int i = 0; i <= m; ++i) qs.push_back(random_in(B, rng));
    const double r2i = 1.0 / (radius * radius);

    AnalyticField f;
    f.m = m;
    f.k = ctx->k;
    f.chirality = chirality;
    auto shape = [qs, center, radius, m](const Paravector<double>& x) {
        HomPoly<double> v = qs[0];
        for (int i = 0; i < m; ++i) v += qs[std::size_t(i + 1)] * ((x[i] - center[std::size_t(i)]) / radius);
        return v;
    };
    auto s_of = [center, r2i, m](const Paravector<double>& x) {
        double r2 = 0;
        for (int i = 0; i < m; ++i) r2 += (x[i] - center[std::size_t(i)]) * (x[i] - center[std::size_t(i)]);
        return 1 - r2 * r2i;
    };
    f.value = [shape, s_of, m, k = ctx->k](const Paravector<double>& x) {
        const double s = s_of(x);
        if (s <= 0) return HomPoly<double>(m, k);
        return shape(x) * (s * s * s * s);
    };
    f.deriv = [shape, s_of, qs, center, radius, r2i, m, k = ctx->k](const Paravector<double>& x, int j) {
        const double s = s_of(x);
        if (s <= 0) return HomPoly<double>(m, k);
        const double dpsi = 4 * s * s * s * (-2 * (x[j] - center[std::size_t(j)]) * r2i);
        return shape(x) * dpsi + qs[std::size_t(j + 1)] * (s * s * s * s / radius);
    };
    return f;
}

HomPoly<double> random_harmonic(int m, int k, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    HomPoly<double> p(m, k);
    for (auto& c : p.coeffs()) c = nd(rng);
    return poly::harmonic_project(p);
}

StokesBalance stokes_balance(const AnalyticField& f, const AnalyticField& g, const Ctx& ctx) {
    if (!f.deriv || !g.deriv) throw std::invalid_argument("stokes_balance: fields need derivative callbacks");
    const auto& grid = *ctx->grid;
    const int m = ctx->m;
    StokesBalance b{Multivector<double>(m), Multivector<double>(m), Multivector<double>(m)};
    for (const auto& face : grid.faces()) {
        Paravector<double> x(face.center);
        HomPoly<double> nf = f.value(x).left_mul(face.normal().to_multivector());
        b.boundary += poly::sphere_pair(g.value(x), nf, ctx->rule) * face.area;
    }
    const double vol = grid.cell_volume();
    for (int n = 0; n < grid.num_nodes(); ++n) {
        Paravector<double> x = grid.node_point(n);
        b.volume_left += poly::sphere_pair(right_dbar(g, x), f.value(x), ctx->rule) * vol;
        b.volume_right += poly::sphere_pair(g.value(x), left_dbar(f, x), ctx->rule) * vol;
    }
    return b;
}

}  // namespace hsca::suites
