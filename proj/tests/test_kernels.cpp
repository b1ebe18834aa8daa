#include <doctest.h>

#include <Eigen/Dense>
#include <numbers>

#include "hsca/basis.hpp"
#include "hsca/kernels.hpp"
#include "hsca/sphere.hpp"
#include "hsca/suites.hpp"
#include "support.hpp"

using namespace hsca;
using namespace hsca::kernels;
using clifford::Multivector;
using clifford::Paravector;
using poly::HomPoly;

namespace {

double gegenbauer_recurrence(int k, double mu, double t) {
    double a = 1, b = 2 * mu * t;
    if (k == 0) return a;
    for (int n = 2; n <= k; ++n) {
        const double c = (2 * t * (n + mu - 1) * b - (n + 2 * mu - 2) * a) / n;
        a = b;
        b = c;
    }
    return b;
}

double omega(int m) { return 2 * std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0); }

double fact(int n) { return std::tgamma(n + 1.0); }

NormConstants constants_by_hand(int m, int k) {
    const double mu = (m - 2) / 2.0;
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (int n = 0; 2 * n <= k; ++n)
        s1 += std::tgamma(k - n + mu) * std::pow(2.0, k - 2 * n) / (std::tgamma(mu) * fact(n) * fact(k - 2 * n));
    for (int n = 0; 2 * n <= k - 1; ++n)
        s2 += std::tgamma(k - n + mu) * std::pow(2.0, k - 2 * n - 1) / (std::tgamma(mu + 1) * fact(n) * fact(k - 2 * n - 1));
    for (int n = 0; 2 * n <= k - 2; ++n)
        s4 += (2 * mu + 2) * std::tgamma(k - n + mu) * std::pow(2.0, k - 2 * n - 2) /
              (std::tgamma(mu + 2) * fact(n) * fact(k - 2 * n - 2));
    s3 = (2 * mu + k) * s2;
    NormConstants c;
    c.C1 = (2 * m - 2) * ((2 * mu + k) / (2 * mu) * s1 + s2);
    c.C2 = s3 + s4;
    const double w = omega(m);
    c.C = std::sqrt(2 * std::pow(8 * m * c.C2 + c.C1, 2) * w * w +
                    std::pow(double(m), 3) * std::pow(2.0, 4 * m + 2 * k + 5) / (m + 2 * k) + 2);
    return c;
}

Paravector<double> mv_to_para(const Multivector<double>& a) { return Paravector<double>::from_multivector(a, 1e-12); }

}  // namespace

TEST_CASE("gegenbauer closed forms") {
    for (double mu : {0.5, 1.0, 1.5, 2.5})
        for (double t : {-1.0, -0.3, 0.0, 0.42, 1.0}) {
            CHECK(gegenbauer(0, mu, t) == 1.0);
            CHECK(gegenbauer(1, mu, t) == doctest::Approx(2 * mu * t).epsilon(1e-14));
            CHECK(gegenbauer(2, mu, t) == doctest::Approx(2 * mu * (mu + 1) * t * t - mu).epsilon(1e-13));
            for (int k = 0; k <= 8; ++k)
                CHECK(gegenbauer(k, mu, t) == doctest::Approx(gegenbauer_recurrence(k, mu, t)).epsilon(1e-12));
        }
    CHECK_THROWS_AS(gegenbauer(2, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("gegenbauer derivative identity") {
    const double step = 1e-3;
    for (int k = 1; k <= 6; ++k)
        for (double mu : {0.5, 1.0, 1.5})
            for (int i = 0; i < 50; ++i) {
                const double t = -0.95 + 1.9 * i / 49;
                auto G = [&](double s) { return gegenbauer(k, mu, t + s * step); };
                const double fd = (-G(2) + 8 * G(1) - 8 * G(-1) + G(-2)) / (12 * step);
                CHECK(std::abs(fd - 2 * mu * gegenbauer(k - 1, mu + 1, t)) <= 1e-8 * std::max(1.0, std::abs(fd)));
            }
}

TEST_CASE("zonal kernel: k = 0, conjugate symmetry, bar relation") {
    std::mt19937_64 rng(41);
    for (int m = 3; m <= 5; ++m) {
        auto u = test::random_unit(m, rng), v = test::random_unit(m, rng);
        CHECK(zonal(0, u, v, +1) == Multivector<double>::scalar(m, 1));
        for (int k = 1; k <= 3; ++k)
            for (int t = 0; t < 100; ++t) {
                u = test::random_unit(m, rng);
                v = test::random_unit(m, rng);
                for (int chir : {+1, -1})
                    CHECK(test::max_diff(clifford::conjugate(zonal(k, u, v, chir)), zonal(k, v, u, chir)) <= 1e-12);
                CHECK(test::max_diff(zonal(k, u, v, +1), zonal(k, u.bar(), v.bar(), -1)) <= 1e-12);
            }
    }
    CHECK_THROWS_AS(zonal(1, Paravector<double>(3), Paravector<double>({1, 0, 0}), +1), std::invalid_argument);
}

TEST_CASE("zonal kernel reproduces the monogenic bases") {
    std::mt19937_64 rng(43);
    for (int m = 3; m <= 4; ++m)
        for (int k = 0; k <= 3; ++k)
            for (int chir : {+1, -1}) {
                const auto rule = disc::make_sphere_rule(m, 2 * k);
                const auto b = poly::build_basis(m, k, chir);
                const double w = disc::sphere_area(m);
                for (int t = 0; t < 3; ++t) {
                    auto u = test::random_unit(m, rng);
                    for (const auto& f : b.elements) {
                        Multivector<double> s(m);
                        for (int q = 0; q < rule.size(); ++q)
                            s += (rule.weights[std::size_t(q)] / w) * (zonal(k, u, rule.nodes[std::size_t(q)], chir) *
                                                                     f.eval(rule.nodes[std::size_t(q)]));
                        CHECK(test::max_diff(s, f.eval(u)) <= 1e-10);
                    }
                }
            }
}

TEST_CASE("zonal kernel is monogenic in u") {
    std::mt19937_64 rng(47);
    for (int m = 3; m <= 4; ++m)
        for (int k = 1; k <= 3; ++k)
            for (int chir : {+1, -1}) {
                // homogeneous of degree k in u: fit its coefficients from random points
                const auto& tab = *poly::MonomialTable::get(m, k);
                const int n = tab.size();
                Eigen::MatrixXd V(2 * n, n);
                std::vector<Paravector<double>> pts;
                for (int r = 0; r < 2 * n; ++r) {
                    pts.push_back(test::random_para(m, rng));
                    for (int i = 0; i < n; ++i) {
                        double w = 1;
                        for (int j = 0; j < m; ++j) w *= std::pow(pts.back()[j], tab.exponent(i)[std::size_t(j)]);
                        V(r, i) = w;
                    }
                }
                const auto v = test::random_unit(m, rng);
                const int dim = 1 << (m - 1);
                Eigen::MatrixXd Y(2 * n, dim);
                for (int r = 0; r < 2 * n; ++r) {
                    auto z = zonal(k, pts[std::size_t(r)], v, chir);
                    for (int a = 0; a < dim; ++a) Y(r, a) = z[uint32_t(a)];
                }
                Eigen::MatrixXd c = V.colPivHouseholderQr().solve(Y);
                CHECK((V * c - Y).norm() <= 1e-10 * Y.norm());
                HomPoly<double> p(m, k);
                for (int i = 0; i < n; ++i)
                    for (int a = 0; a < dim; ++a) p.coeffs()[std::size_t(i * dim + a)] = c(i, a);
                CHECK((chir > 0 ? poly::cr_bar(p) : poly::cr(p)).max_abs() <= 1e-9);
            }
}

TEST_CASE("reflection intertwining") {
    // literal form for the u∧v̄ kernel (zonal(-)); the ū∧v kernel intertwines with ā on the right
    std::mt19937_64 rng(53);
    for (int m = 3; m <= 4; ++m)
        for (int k = 1; k <= 3; ++k)
            for (int t = 0; t < 100; ++t) {
                auto u = test::random_unit(m, rng), v = test::random_unit(m, rng), a = test::random_unit(m, rng);
                const auto A = a.to_multivector(), Ab = clifford::conjugate(A);
                const auto ava = mv_to_para(A * v.to_multivector() * A);
                const auto aua = mv_to_para(Ab * u.to_multivector() * Ab);
                CHECK(test::max_diff(zonal(k, u, ava, -1) * A, A * zonal(k, aua, v, -1)) <= 1e-10);
                CHECK(test::max_diff(zonal(k, u, ava, +1) * Ab, Ab * zonal(k, aua, v, +1)) <= 1e-10);
            }
}

TEST_CASE("fundamental solution") {
    std::mt19937_64 rng(59);
    const auto kp = KernelParams::make(3, 0);
    CHECK(kp.c_mk == doctest::Approx(4 * std::numbers::pi).epsilon(1e-14));
    for (int t = 0; t < 20; ++t) {
        auto x = test::random_para(3, rng), u = test::random_unit(3, rng), v = test::random_unit(3, rng);
        const double r = x.norm();
        auto expect = (1.0 / (4 * std::numbers::pi * r * r * r)) * x.bar().to_multivector();
        CHECK(test::max_diff(fundamental(kp, x, u, v, +1), expect) <= 1e-14);
    }
    for (int m = 3; m <= 5; ++m)
        for (int k = 0; k <= 3; ++k) {
            const auto p = KernelParams::make(m, k);
            for (int t = 0; t < 20; ++t) {
                auto x = test::random_para(m, rng), u = test::random_unit(m, rng), v = test::random_unit(m, rng);
                for (int chir : {+1, -1}) {
                    const auto E = fundamental(p, x, u, v, chir);
                    // x̄/|x|^m is odd and the reflected argument is even in x
                    CHECK(test::max_diff(fundamental(p, -1.0 * x, u, v, chir), -E) <= 1e-12 * clifford::max_abs(E));
                    CHECK(test::max_diff(fundamental(p, 2.0 * x, u, v, chir), std::pow(2.0, 1 - m) * E) <=
                          1e-12 * clifford::max_abs(E));
                }
            }
        }
    CHECK_THROWS_AS(fundamental(kp, Paravector<double>(3), Paravector<double>({1, 0, 0}), Paravector<double>({1, 0, 0}), +1),
                    std::invalid_argument);
}

TEST_CASE("sphere average of h(R_x u)") {
    // ∫_S h(u - 2<x,u>x) dS(x) = c_{m,k} h(u); equivalently ∫_S h(x u x) dS(x) = c_{m,k} h(-ū)
    std::mt19937_64 rng(61);
    for (int m = 3; m <= 4; ++m)
        for (int k = 0; k <= 3; ++k) {
            const auto rule = disc::make_sphere_rule(m, 2 * k);
            const double c = KernelParams::make(m, k).c_mk;
            auto h = suites::random_harmonic(m, k, rng());
            for (int t = 0; t < 5; ++t) {
                auto u = test::random_unit(m, rng);
                Multivector<double> s1(m), s2(m);
                for (int q = 0; q < rule.size(); ++q) {
                    const auto& x = rule.nodes[std::size_t(q)];
                    const double w = rule.weights[std::size_t(q)];
                    s1 += w * h.eval(clifford::mirror(x, u));
                    s2 += w * h.eval(mv_to_para(x.to_multivector() * u.to_multivector() * x.to_multivector()));
                }
                const double scale = std::max(1.0, clifford::max_abs(h.eval(u)));
                CHECK(test::max_diff(s1, c * h.eval(u)) <= 1e-10 * scale);
                CHECK(test::max_diff(s2, c * h.eval(-1.0 * u.bar())) <= 1e-10 * scale);
            }
        }
}

TEST_CASE("norm constants") {
    for (int m = 3; m <= 6; ++m) {
        const auto c = norm_constants(m, 0);
        CHECK(c.C1 == 2 * m - 2);
        CHECK(c.C2 == 0);
        const double w = omega(m);
        const double C = std::sqrt(2.0 * (2 * m - 2) * (2 * m - 2) * w * w + m * m * std::pow(2.0, 4 * m + 5) + 2);
        CHECK(c.C == doctest::Approx(C).epsilon(1e-14));
    }
    for (int m = 3; m <= 5; ++m)
        for (int k = 0; k <= 4; ++k) {
            const auto c = norm_constants(m, k), o = constants_by_hand(m, k);
            CHECK(c.C1 == doctest::Approx(o.C1).epsilon(1e-13));
            CHECK(c.C2 == doctest::Approx(o.C2).epsilon(1e-13));
            CHECK(c.C == doctest::Approx(o.C).epsilon(1e-13));
            CHECK(std::isfinite(c.C));
            CHECK(c.C > 0);
        }
    // m = 3, k = 1 by hand: μ = 1/2, C1 = 4(2·1 + 1) = 12, C2 = 2·1 = 2
    CHECK(norm_constants(3, 1).C1 == doctest::Approx(12));
    CHECK(norm_constants(3, 1).C2 == doctest::Approx(2));
    CHECK_THROWS_AS(norm_constants(2, 0), std::invalid_argument);
}
