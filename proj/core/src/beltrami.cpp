#include "hsca/beltrami.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hsca::beltrami {

using clifford::Paravector;
using poly::HomPoly;

double BeltramiProblem::f_inf() const {
    double s = 0;
    if (multivector)
        for (const auto& c : f_mv) s = std::max(s, clifford::norm(c));
    else
        for (double c : f_scalar) s = std::max(s, std::abs(c));
    return s;
}

Decomposition decompose(const GridField& omega, const Ctx& ctx) {
    Decomposition d;
    d.h = ops::apply_Rk(omega, ctx);
    d.phi = omega - ops::teodorescu(d.h, ctx);
    d.phi.chirality = ops::kFieldChirality;
    return d;
}

ContractionVerdict check_contraction(const BeltramiProblem& p, const Ctx& ctx, double pi_norm_emp) {
    ContractionVerdict v;
    v.f_inf = p.f_inf();
    v.C = kernels::norm_constants(ctx->m, ctx->k).C;
    v.pi_norm_emp = pi_norm_emp;
    v.analytic_pass = v.f_inf < 1.0 / v.C;
    v.empirical_pass = v.f_inf * pi_norm_emp < 1.0;
    return v;
}

namespace {

// nodal f·g, reprojected onto M^+ in multivector mode; returns the removed part's norm
GridField multiply(const BeltramiProblem& p, const GridField& g, const Ctx& ctx, double* leak) {
    GridField r = g;
    if (!p.multivector) {
        for (int n = 0; n < g.num_nodes(); ++n)
            for (int c = 0; c < g.len; ++c) r.at(n)[c] *= p.f_scalar[std::size_t(n)];
        return r;
    }
    for (int n = 0; n < g.num_nodes(); ++n) r.set(n, g.poly(n).left_mul(p.f_mv[std::size_t(n)]));
    r.chirality = 0;
    GridField q = ops::project_field(r, +1, ctx);
    if (leak) *leak = std::max(*leak, ops::norm(r - q, ctx) / std::max(ops::norm(r, ctx), 1e-300));
    return q;
}

}  // namespace

BeltramiSolution solve(const BeltramiProblem& p, const Ctx& ctx, double pi_norm_emp) {
    const int nn = ctx->grid->num_nodes();
    if (!(p.tol > 0)) throw std::invalid_argument("beltrami: tol > 0");
    if (p.max_iter < 1) throw std::invalid_argument("beltrami: max_iter >= 1");
    if (p.multivector ? int(p.f_mv.size()) != nn : int(p.f_scalar.size()) != nn)
        throw std::invalid_argument("beltrami: coefficient needs one value per node");
    if (p.phi.grid != ctx->grid) throw std::invalid_argument("beltrami: phi lives on a different grid");
    if (p.phi.chirality > 0) throw std::invalid_argument("beltrami: phi chirality mismatch (expected M^-)");

    const GridField Rphi = ops::apply_Rk(p.phi, ctx);
    const GridField Rdphi = ops::apply_Rk_dagger(p.phi, ctx);
    const double phin = ops::norm(p.phi, ctx);
    if (ops::norm(Rphi, ctx) > p.tol_monogenic * std::max(1.0, phin))
        throw std::invalid_argument("beltrami: phi is not in the kernel of R_k");

    BeltramiSolution s;
    double leak = 0;
    GridField h(ctx->grid, ctx->k, ops::kSourceChirality);
    double prev = 0;
    int bad = 0;
    for (int it = 1; it <= p.max_iter; ++it) {
        GridField rhs = Rdphi + ops::pi_apply(h, ctx);
        GridField hn = multiply(p, rhs, ctx, &leak);
        hn.chirality = ops::kSourceChirality;
        const double upd = ops::norm(hn - h, ctx);
        const double hnorm = ops::norm(hn, ctx);
        s.update_norms.push_back(upd);
        s.ratios.push_back(it == 1 || prev == 0 ? std::numeric_limits<double>::quiet_NaN() : upd / prev);
        h = std::move(hn);
        s.iterations = it;
        if (upd <= p.tol * hnorm || upd == 0) {
            s.converged = true;
            break;
        }
        if (it > 1 && prev > 0 && upd / prev >= 1.0) {
            if (++bad >= 3) {
                s.diverged = true;
                std::ostringstream os;
                os << "divergence: update ratio >= 1 for 3 consecutive iterations; ||f||_inf*||Pi||_emp = "
                   << p.f_inf() * pi_norm_emp;
                s.diagnostic = os.str();
                break;
            }
        } else {
            bad = 0;
        }
        prev = upd;
    }
    if (!s.converged && !s.diverged) s.diagnostic = "max_iter reached without meeting tol";

    s.h = h;
    s.omega = p.phi + ops::teodorescu(h, ctx);
    s.omega.chirality = ops::kFieldChirality;
    s.leakage = leak;

    GridField fp = multiply(p, Rdphi + ops::pi_apply(h, ctx), ctx, nullptr);
    const double hn = ops::norm(h, ctx);
    s.fixed_point_residual = hn > 0 ? ops::norm(h - fp, ctx) / hn : ops::norm(fp, ctx);

    GridField Rw = ops::apply_Rk(s.omega, ctx);
    GridField Rdw = ops::apply_Rk_dagger(s.omega, ctx);
    const double den = ops::norm(Rdw, ctx);
    GridField eq = Rw - multiply(p, Rdw, ctx, nullptr);
    s.equation_residual = den > 0 ? ops::norm(eq, ctx) / den : ops::norm(eq, ctx);
    return s;
}

ops::AnalyticField make_phi(const Ctx& ctx, int degree, uint64_t seed) {
    const auto& C = *ctx;
    if (degree < 1) throw std::invalid_argument("make_phi: degree >= 1");
    const int m = C.m;
    const Eigen::MatrixXd Bm = C.basis_minus.coord_matrix();  // len × r
    const int r = int(Bm.cols());

    // x-monomials of total degree <= degree
    std::vector<poly::Exponent> xs;
    for (int d = 0; d <= degree; ++d) {
        auto tab = poly::MonomialTable::get(m, d);
        for (int i = 0; i < tab->size(); ++i) xs.push_back(tab->exponent(i));
    }
    auto xindex = [&](const poly::Exponent& b) {
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (xs[i] == b) return int(i);
        return -1;
    };
    const int nx = int(xs.size());

    // constraint rows: for each x-monomial γ (|γ| < degree) the coefficient of x^γ in R_k φ
    std::vector<int> gam;
    for (int i = 0; i < nx; ++i) {
        int d = 0;
        for (int v : xs[std::size_t(i)]) d += v;
        if (d < degree) gam.push_back(i);
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(Eigen::Index(gam.size()) * C.len, nx * r);
    for (std::size_t gi = 0; gi < gam.size(); ++gi) {
        const auto& g = xs[std::size_t(gam[gi])];
        for (int i = 0; i < m; ++i) {
            poly::Exponent b = g;
            b[std::size_t(i)] += 1;
            const int bi = xindex(b);
            if (bi < 0) continue;
            for (int j = 0; j < r; ++j) {
                HomPoly<double> q = C.basis_minus.elements[std::size_t(j)].left_e(i) * double(b[std::size_t(i)]);
                Eigen::VectorXd col = C.proj_plus * poly::as_vector(q);
                A.block(Eigen::Index(gi) * C.len, bi * r + j, C.len, 1) += col;
            }
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 1.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    Eigen::MatrixXd N = svd.matrixV().rightCols(nx * r - rank);
    // drop the x-independent part so that R_k^† φ does not vanish identically
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXd z(N.cols());
    for (int i = 0; i < z.size(); ++i) z(i) = nd(rng);
    Eigen::VectorXd coef = N * z;
    coef.head(r).setZero();

    // per x-monomial polynomial coefficients in u
    std::vector<HomPoly<double>> qs;
    for (int b = 0; b < nx; ++b) {
        HomPoly<double> q(m, C.k);
        Eigen::Map<Eigen::VectorXd>(q.coeffs().data(), C.len) = Bm * coef.segment(b * r, r);
        qs.push_back(q);
    }
    // normalize on the grid
    double nrm2 = 0;
    for (int n = 0; n < C.grid->num_nodes(); ++n) {
        HomPoly<double> v(m, C.k);
        for (int b = 0; b < nx; ++b) {
            double w = 1;
            for (int i = 0; i < m; ++i) w *= std::pow(C.grid->node(n)[i], xs[std::size_t(b)][std::size_t(i)]);
            v += qs[std::size_t(b)] * w;
        }
        nrm2 += poly::real_inner(v, v);
    }
    nrm2 *= C.grid->cell_volume();
    const double scale = nrm2 > 0 ? 1.0 / std::sqrt(nrm2) : 1.0;
    for (auto& q : qs) q *= scale;

    ops::AnalyticField f;
    f.m = m;
    f.k = C.k;
    f.chirality = ops::kFieldChirality;
    f.value = [qs, xs, m, k = C.k](const Paravector<double>& x) {
        HomPoly<double> v(m, k);
        for (std::size_t b = 0; b < xs.size(); ++b) {
            double w = 1;
            for (int i = 0; i < m; ++i) w *= std::pow(x[i], xs[b][std::size_t(i)]);
            v += qs[b] * w;
        }
        return v;
    };
    f.deriv = [qs, xs, m, k = C.k](const Paravector<double>& x, int j) {
        HomPoly<double> v(m, k);
        for (std::size_t b = 0; b < xs.size(); ++b) {
            if (xs[b][std::size_t(j)] == 0) continue;
            double w = xs[b][std::size_t(j)];
            for (int i = 0; i < m; ++i) w *= std::pow(x[i], xs[b][std::size_t(i)] - (i == j ? 1 : 0));
            v += qs[b] * w;
        }
        return v;
    };
    return f;
}

}  // namespace hsca::beltrami
