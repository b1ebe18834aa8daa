#include <doctest.h>

#include <numbers>

#include "hsca/basis.hpp"
#include "hsca/suites.hpp"
#include "support.hpp"

using namespace hsca;
using namespace hsca::poly;
using clifford::Multivector;
using clifford::Paravector;

namespace {

Multivector<double> one(int m) { return Multivector<double>::scalar(m, 1); }
Multivector<double> e(int m, int j) { return Multivector<double>::e(m, j); }

HomPoly<double> mono(int, std::vector<int> a, const Multivector<double>& c) { return HomPoly<double>::monomial(a, c); }

HomPoly<double> random_poly(int m, int k, std::mt19937_64& rng) {
    HomPoly<double> p(m, k);
    std::normal_distribution<double> nd;
    for (auto& c : p.coeffs()) c = nd(rng);
    return p;
}

long binom(int n, int r) {
    long b = 1;
    for (int i = 1; i <= r; ++i) b = b * (n - r + i) / i;
    return b;
}

}  // namespace

TEST_CASE("cr_bar and cr examples") {
    const int m = 3;
    CHECK(cr_bar(mono(m, {2, 0, 0}, one(m))) == mono(m, {1, 0, 0}, 2.0 * one(m)));
    // u_1 - u_0 e_1 is monogenic
    auto p = mono(m, {0, 1, 0}, one(m)) - mono(m, {1, 0, 0}, e(m, 1));
    CHECK(cr_bar(p).is_zero());
    auto q = mono(m, {2, 0, 0}, one(m)) + mono(m, {0, 2, 0}, one(m));
    CHECK(cr_bar(cr(q)) == HomPoly<double>::constant(4.0 * one(m)));
    CHECK(cr_bar(HomPoly<double>::constant(one(m))).is_zero());
}

TEST_CASE("cr_bar cr = cr cr_bar = laplacian") {
    std::mt19937_64 rng(21);
    for (int m = 3; m <= 5; ++m)
        for (int k = 2; k <= 4; ++k) {
            auto p = random_poly(m, k, rng);
            CHECK((cr_bar(cr(p)) - laplacian(p)).max_abs() <= 1e-12);
            CHECK((cr(cr_bar(p)) - laplacian(p)).max_abs() <= 1e-12);
        }
}

TEST_CASE("euler operator") {
    const int m = 4;
    CHECK(euler(mono(m, {3, 0, 0, 0}, one(m))) == mono(m, {3, 0, 0, 0}, 3.0 * one(m)));
    CHECK(euler(mono(m, {0, 1, 1, 0}, one(m))) == mono(m, {0, 1, 1, 0}, 2.0 * one(m)));
    CHECK(euler(HomPoly<double>::constant(one(m))).is_zero());
    std::mt19937_64 rng(2);
    for (int k = 0; k <= 4; ++k) {
        HomPoly<Rational> p(m, k);
        for (auto& c : p.coeffs()) c = Rational(int(rng() % 11) - 5, 1 + int(rng() % 4));
        CHECK(euler(p) == p * Rational(k));
    }
}

TEST_CASE("homogeneity of evaluation") {
    std::mt19937_64 rng(9);
    for (int k = 0; k <= 3; ++k) {
        auto p = random_poly(4, k, rng);
        auto u = test::random_para(4, rng);
        const double lam = 1.7;
        CHECK(test::max_diff(p.eval(lam * u), std::pow(lam, k) * p.eval(u)) <= 1e-12 * std::max(1.0, clifford::max_abs(p.eval(lam * u))));
    }
}

TEST_CASE("proj_plus of u_0 in m = 3 by hand") {
    const int m = 3;
    // u_0 - ū/3 = (2/3)u_0 + (1/3)u_1 e_1 + (1/3)u_2 e_2
    auto expect = mono(m, {1, 0, 0}, (2.0 / 3) * one(m)) + mono(m, {0, 1, 0}, (1.0 / 3) * e(m, 1)) +
                  mono(m, {0, 0, 1}, (1.0 / 3) * e(m, 2));
    auto got = proj_plus(mono(m, {1, 0, 0}, one(m)));
    CHECK((got - expect).max_abs() <= 1e-15);
    CHECK(cr_bar(got).max_abs() <= 1e-15);
}

TEST_CASE("projections: range, annihilation, idempotence") {
    std::mt19937_64 rng(4);
    for (int m = 3; m <= 5; ++m)
        for (int k = 1; k <= 3; ++k) {
            auto h = suites::random_harmonic(m, k, rng());
            auto hp = proj_plus(h), hm = proj_minus(h);
            CHECK(cr_bar(hp).max_abs() <= 1e-12);
            CHECK(cr(hm).max_abs() <= 1e-12);
            CHECK((proj_plus(hp) - hp).max_abs() <= 1e-12);
            CHECK((proj_minus(hm) - hm).max_abs() <= 1e-12);
            // ū M_{k-1}^- is annihilated
            auto q = proj_minus(suites::random_harmonic(m, k - 1, rng()));
            CHECK(proj_plus(mul_u(q, -1)).max_abs() <= 1e-12);
        }
}

TEST_CASE("non-harmonic input is rejected") {
    auto p = mono(3, {2, 0, 0}, one(3));
    CHECK_THROWS_AS(proj_plus(p), std::invalid_argument);
    CHECK_THROWS_AS(proj_minus(p), std::invalid_argument);
    CHECK_THROWS_AS(fischer_split(p), std::invalid_argument);
}

TEST_CASE("harmonic projection lands in ker laplacian") {
    std::mt19937_64 rng(6);
    for (int m = 3; m <= 5; ++m)
        for (int k = 0; k <= 4; ++k) CHECK(is_harmonic(harmonic_project(random_poly(m, k, rng))));
}

TEST_CASE("Fischer split") {
    std::mt19937_64 rng(31);
    for (int m = 3; m <= 5; ++m)
        for (int k = 1; k <= 3; ++k) {
            auto h = suites::random_harmonic(m, k, rng());
            auto [pk, pkm1] = fischer_split(h);
            CHECK((pk + mul_u(pkm1, -1) - h).max_abs() <= 1e-12);
            CHECK(cr_bar(pk).max_abs() <= 1e-12);
            CHECK(cr(pkm1).max_abs() <= 1e-12);

            auto hp = proj_plus(h);
            auto s1 = fischer_split(hp);
            CHECK((s1.p_k - hp).max_abs() <= 1e-12);
            CHECK(s1.p_km1.max_abs() <= 1e-12);

            auto q = proj_minus(suites::random_harmonic(m, k - 1, rng()));
            auto s2 = fischer_split(mul_u(q, -1));
            CHECK(s2.p_k.max_abs() <= 1e-12);
            CHECK((s2.p_km1 - q).max_abs() <= 1e-12);
        }
}

TEST_CASE("cr_bar(ū q) = (m+2k-2) q exactly over M_{k-1}^-") {
    for (int m = 3; m <= 4; ++m)
        for (int k = 1; k <= 3; ++k) {
            const auto& tab = MonomialTable::get(m, k - 1);
            for (int i = 0; i < tab->size(); ++i)
                for (uint32_t a = 0; a < (1u << (m - 1)); ++a) {
                    auto q = proj_minus(harmonic_project(
                        HomPoly<Rational>::monomial(tab->exponent(i), Multivector<Rational>::blade(m, a))));
                    CHECK(cr_bar(mul_u(q, -1)) == q * Rational(m + 2 * k - 2));
                }
        }
}

TEST_CASE("monogenic bases") {
    for (int m = 3; m <= 5; ++m) {
        auto b0 = build_basis(m, 0, +1);
        CHECK(b0.size() == (1 << (m - 1)));
        for (int k = 0; k <= 3; ++k)
            for (int chir : {+1, -1}) {
                auto b = build_basis(m, k, chir);
                CHECK(b.size() == (1 << (m - 1)) * binom(k + m - 2, k));
                for (const auto& el : b.elements) CHECK((chir > 0 ? cr_bar(el) : cr(el)).max_abs() <= 1e-10);
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.gram);
                CHECK(svd.singularValues().minCoeff() > kBasisTol);
                // every projected generator lies in the span
                const auto& tab = MonomialTable::get(m, k);
                for (int i = 0; i < tab->size(); ++i) {
                    auto g = project(harmonic_project(HomPoly<double>::monomial(tab->exponent(i), one(m))), chir);
                    CHECK(span_residual(b, g) <= 1e-10);
                }
            }
    }
    auto b = build_basis(3, 1, +1);
    CHECK(span_residual(b, mono(3, {0, 1, 0}, one(3)) - mono(3, {1, 0, 0}, e(3, 1))) <= 1e-10);
    CHECK(span_residual(b, mono(3, {0, 0, 1}, one(3)) - mono(3, {1, 0, 0}, e(3, 2))) <= 1e-10);
}

TEST_CASE("sphere_pair") {
    const auto rule = disc::make_sphere_rule(3, 4);
    const auto c = HomPoly<double>::constant(one(3));
    CHECK(sphere_pair(c, c, rule)[0] == doctest::Approx(4 * std::numbers::pi).epsilon(1e-12));
    auto u1 = mono(3, {0, 1, 0}, one(3)), u2 = mono(3, {0, 0, 1}, one(3));
    CHECK(clifford::max_abs(sphere_pair(u1, u2, rule)) <= 1e-13);
    CHECK(sphere_pair(u1, u1, rule)[0] == doctest::Approx(4 * std::numbers::pi / 3).epsilon(1e-12));
    // unconjugated: (e_1, e_1) = -4π
    const auto ce = HomPoly<double>::constant(e(3, 1));
    CHECK(sphere_pair(ce, ce, rule)[0] == doctest::Approx(-4 * std::numbers::pi).epsilon(1e-12));
    CHECK_THROWS_AS(sphere_pair(u1, u1, disc::make_sphere_rule(3, 1)), std::invalid_argument);
}

TEST_CASE("real_inner agrees with quadrature") {
    std::mt19937_64 rng(12);
    for (int m = 3; m <= 4; ++m) {
        auto p = random_poly(m, 2, rng), q = random_poly(m, 2, rng);
        const auto rule = disc::make_sphere_rule(m, 4);
        // Sc conj(p) q summed over the rule
        double s = 0;
        for (int t = 0; t < rule.size(); ++t) {
            const auto& u = rule.nodes[std::size_t(t)];
            s += rule.weights[std::size_t(t)] * (conjugate(p.eval(u)) * q.eval(u))[0];
        }
        CHECK(real_inner(p, q) == doctest::Approx(s).epsilon(1e-12));
    }
}
