#include <doctest.h>

#include "hsca/beltrami.hpp"
#include "hsca/suites.hpp"

using namespace hsca;
using namespace hsca::ops;

namespace {

Ctx context(int N) {
    suites::SuiteConfig c;
    c.m = 3;
    c.k = 1;
    return suites::make_context(c, N);
}

beltrami::BeltramiProblem problem(const Ctx& ctx, double f) {
    beltrami::BeltramiProblem p;
    p.phi = disc::sample(beltrami::make_phi(ctx), ctx->grid);
    p.f_scalar.assign(std::size_t(ctx->grid->num_nodes()), f);
    return p;
}

}  // namespace

TEST_CASE("f = 0 converges in one iteration") {
    const auto ctx = context(8);
    const auto p = problem(ctx, 0.0);
    const auto s = beltrami::solve(p, ctx);
    CHECK(s.converged);
    CHECK(s.iterations == 1);
    for (double v : s.h.data) CHECK(v == 0);
    CHECK(s.omega.data == p.phi.data);
    const auto v = beltrami::check_contraction(p, ctx, 1.0);
    CHECK(v.analytic_pass);
    CHECK(v.empirical_pass);
}

TEST_CASE("contraction verdicts") {
    const auto ctx = context(6);
    const double C = kernels::norm_constants(3, 1).C;
    const auto v1 = beltrami::check_contraction(problem(ctx, 2.0 / C), ctx, 1.0);
    CHECK(v1.f_inf == doctest::Approx(2.0 / C));
    CHECK_FALSE(v1.analytic_pass);
    CHECK(v1.empirical_pass);
    const auto v2 = beltrami::check_contraction(problem(ctx, 0.5), ctx, 4.0);
    CHECK_FALSE(v2.empirical_pass);
}

TEST_CASE("make_phi is in the kernel of R_k") {
    const auto ctx = context(8);
    const auto phi = disc::sample(beltrami::make_phi(ctx), ctx->grid);
    CHECK(phi.chirality == -1);
    CHECK(norm(phi, ctx) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(norm(apply_Rk(phi, ctx), ctx) <= 1e-8);
}

TEST_CASE("decompose") {
    const auto ctx = context(8);
    const auto phi = disc::sample(beltrami::make_phi(ctx), ctx->grid);
    const auto d0 = beltrami::decompose(phi, ctx);
    CHECK(norm(d0.h, ctx) <= 1e-8);
    CHECK(norm(d0.phi - phi, ctx) <= 1e-8);

    const auto g = disc::sample(suites::polynomial_field(ctx, +1, 2, 5), ctx->grid);
    const auto omega = teodorescu(g, ctx);
    const auto d = beltrami::decompose(omega, ctx);
    const double ri = norm(apply_Rk(omega, ctx) - g, ctx) / norm(g, ctx);
    CHECK(norm(d.h - g, ctx) / norm(g, ctx) <= ri + 1e-12);
    CHECK(norm(d.phi + teodorescu(d.h, ctx) - omega, ctx) <= 1e-10 * norm(omega, ctx));
}

TEST_CASE("scalar contraction converges at the measured rate") {
    const auto ctx = context(8);
    const double pn = pi_norm_emp(ctx).norm;
    const auto s = beltrami::solve(problem(ctx, 0.5 / pn), ctx, pn);
    CHECK(s.converged);
    for (std::size_t i = 2; i < s.ratios.size(); ++i) CHECK(s.ratios[i] <= 0.6);
    CHECK(s.fixed_point_residual <= 2e-10);
    const auto again = beltrami::solve(problem(ctx, 0.5 / pn), ctx, pn);
    CHECK(again.update_norms == s.update_norms);
}

TEST_CASE("non-contracting coefficient aborts with a diagnostic or converges") {
    const auto ctx = context(6);
    const double pn = pi_norm_emp(ctx).norm;
    const auto s = beltrami::solve(problem(ctx, 3.0 / pn), ctx, pn);
    CHECK((s.converged || (s.diverged && !s.diagnostic.empty())));
    for (double v : s.update_norms) CHECK(std::isfinite(v));
}

TEST_CASE("multivector mode reports leakage") {
    const auto ctx = context(6);
    auto p = problem(ctx, 0.0);
    p.multivector = true;
    p.f_scalar.clear();
    const double pn = pi_norm_emp(ctx).norm;
    auto c = clifford::Multivector<double>::scalar(3, 0.3 / pn) + clifford::Multivector<double>::e(3, 1) * (0.2 / pn);
    p.f_mv.assign(std::size_t(ctx->grid->num_nodes()), c);
    const auto s = beltrami::solve(p, ctx, pn);
    CHECK(s.converged);
    CHECK(s.leakage > 0);
}

TEST_CASE("problem validation") {
    const auto ctx = context(6);
    auto p = problem(ctx, 0.1);
    p.tol = 0;
    CHECK_THROWS_AS(beltrami::solve(p, ctx), std::invalid_argument);
    p = problem(ctx, 0.1);
    p.f_scalar.pop_back();
    CHECK_THROWS_AS(beltrami::solve(p, ctx), std::invalid_argument);
}
