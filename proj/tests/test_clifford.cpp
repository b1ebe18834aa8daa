#include <doctest.h>

#include "support.hpp"

using namespace hsca;
using namespace hsca::clifford;
using hsca::test::max_diff;

namespace {

// sign of e_A e_B from the ordering of generators: count transpositions, then e_i^2 = -1
int blade_sign(uint32_t a, uint32_t b) {
    int swaps = 0;
    for (uint32_t i = 0; i < 32; ++i)
        if (b >> i & 1u) swaps += std::popcount(a >> (i + 1));
    const int squares = std::popcount(a & b);
    return ((swaps + squares) % 2) ? -1 : 1;
}

}  // namespace

TEST_CASE("generator products") {
    const auto e1 = Multivector<double>::e(3, 1), e2 = Multivector<double>::e(3, 2);
    CHECK(e1 * e1 == Multivector<double>::scalar(3, -1));
    CHECK(e1 * e2 == Multivector<double>::blade(3, 0b11));
    CHECK(e2 * e1 == Multivector<double>::blade(3, 0b11, -1));
    const auto one = Multivector<double>::scalar(3, 1);
    CHECK((one + e1) * (one - e1) == Multivector<double>::scalar(3, 2));
}

TEST_CASE("defining relation on all generator pairs") {
    for (int m = 3; m <= 6; ++m)
        for (int i = 1; i < m; ++i)
            for (int j = 1; j < m; ++j) {
                const auto ei = Multivector<Rational>::e(m, i), ej = Multivector<Rational>::e(m, j);
                CHECK(ei * ej + ej * ei == Multivector<Rational>::scalar(m, i == j ? -2 : 0));
            }
}

TEST_CASE("blade sign table matches transposition count") {
    for (int m = 3; m <= 6; ++m) {
        const auto& alg = Algebra::get(m);
        for (uint32_t a = 0; a < uint32_t(alg.dim()); ++a)
            for (uint32_t b = 0; b < uint32_t(alg.dim()); ++b) CHECK(alg.sign(a, b) == blade_sign(a, b));
    }
}

TEST_CASE("product is associative and bilinear") {
    std::mt19937_64 rng(11);
    for (int m = 3; m <= 5; ++m)
        for (int t = 0; t < 50; ++t) {
            auto a = test::random_mv(m, rng), b = test::random_mv(m, rng), c = test::random_mv(m, rng);
            CHECK(max_diff((a * b) * c, a * (b * c)) <= 1e-12);
            CHECK(max_diff(a * (b + c), a * b + a * c) <= 1e-12);
            CHECK(max_diff((2.5 * a) * b, 2.5 * (a * b)) <= 1e-12);
        }
}

TEST_CASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(Multivector<double>::e(3, 1) * Multivector<double>::e(4, 1), std::invalid_argument);
    CHECK_THROWS_AS(Multivector<double>(13), std::invalid_argument);
}

TEST_CASE("conjugation") {
    CHECK(conjugate(Multivector<double>::e(4, 1)) == Multivector<double>::e(4, 1) * -1.0);
    CHECK(conjugate(Multivector<double>::blade(4, 0b011)) == Multivector<double>::blade(4, 0b011, -1));
    CHECK(conjugate(Multivector<double>::blade(4, 0b111)) == Multivector<double>::blade(4, 0b111));
    std::mt19937_64 rng(3);
    for (int m = 3; m <= 5; ++m)
        for (int t = 0; t < 50; ++t) {
            auto a = test::random_mv(m, rng), b = test::random_mv(m, rng);
            CHECK(max_diff(conjugate(a * b), conjugate(b) * conjugate(a)) <= 1e-12);
            CHECK(conjugate(conjugate(a)) == a);
        }
}

TEST_CASE("grade decomposition and norm") {
    std::mt19937_64 rng(5);
    for (int m = 3; m <= 5; ++m) {
        auto a = test::random_mv(m, rng);
        Multivector<double> s(m);
        for (int g = 0; g < m; ++g) s += grade_project(a, g);
        CHECK(s == a);
        CHECK(norm(a) > 0);
        CHECK(norm(Multivector<double>(m)) == 0);
    }
}

TEST_CASE("paravector embedding") {
    std::mt19937_64 rng(8);
    auto x = test::random_para(4, rng);
    auto back = Paravector<double>::from_multivector(x.to_multivector());
    CHECK(back.comps() == x.comps());
    CHECK_THROWS_AS(Paravector<double>::from_multivector(Multivector<double>::blade(4, 0b11)), std::invalid_argument);
}

TEST_CASE("para_products") {
    const auto e1 = Paravector<double>({0, 1, 0});
    auto pe = para_products(e1, e1);
    CHECK(pe.scalar_part == 1);
    CHECK(norm(pe.wedge_part) == 0);

    // x = 1, y = e_1: x ȳ = -e_1 = <x,y> - x∧ȳ, so x∧ȳ = e_1
    auto p = para_products(Paravector<double>({1, 0, 0}), Paravector<double>({0, 1, 0}));
    CHECK(p.scalar_part == 0);
    CHECK(p.wedge_part == Multivector<double>::e(3, 1));

    std::mt19937_64 rng(13);
    for (int m = 3; m <= 5; ++m)
        for (int t = 0; t < 100; ++t) {
            auto x = test::random_para(m, rng), y = test::random_para(m, rng);
            auto xy = para_products(x, y), yx = para_products(y, x);
            const auto X = x.to_multivector(), Y = y.to_multivector();
            const auto lhs = X * conjugate(Y);
            CHECK(max_diff(lhs, Multivector<double>::scalar(m, xy.scalar_part) - xy.wedge_part) <= 1e-12);
            CHECK(max_diff(lhs + Y * conjugate(X), Multivector<double>::scalar(m, 2 * xy.scalar_part)) <= 1e-12);
            CHECK(max_diff(lhs - Y * conjugate(X), -2.0 * xy.wedge_part) <= 1e-12);
            CHECK(max_diff(xy.wedge_part, -yx.wedge_part) <= 1e-12);
        }
}

TEST_CASE("reflection") {
    std::mt19937_64 rng(17);
    auto x = test::random_para(3, rng);
    auto r1 = reflect(Paravector<double>({1, 0, 0}), x);
    for (int i = 0; i < 3; ++i) CHECK(r1[i] == doctest::Approx(x[i]));

    auto r = reflect(Paravector<double>({0, 1, 0}), x);
    CHECK(r[0] == doctest::Approx(-x[0]));
    CHECK(r[1] == doctest::Approx(-x[1]));
    CHECK(r[2] == doctest::Approx(x[2]));

    CHECK_THROWS_AS(reflect(Paravector<double>({0, 2, 0}), x), std::invalid_argument);

    for (int m = 3; m <= 5; ++m)
        for (int t = 0; t < 100; ++t) {
            auto a = test::random_unit(m, rng);
            auto y = test::random_para(m, rng);
            const auto A = a.to_multivector(), Y = y.to_multivector();
            const auto axa = A * Y * A;
            auto ry = reflect(a, y);
            CHECK(max_diff(axa, ry.to_multivector()) <= 1e-12);
            CHECK(std::abs(ry.norm() - y.norm()) <= 1e-12 * y.norm());
            CHECK(max_diff(A * axa * A, (A * A) * Y * (A * A)) <= 1e-12);
        }
}
