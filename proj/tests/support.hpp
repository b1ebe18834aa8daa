#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "hsca/clifford.hpp"

namespace hsca::test {

using clifford::Multivector;
using clifford::Paravector;

inline Multivector<double> random_mv(int m, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Multivector<double> r(m);
    for (auto& c : r.coeffs()) c = nd(rng);
    return r;
}

inline Paravector<double> random_para(int m, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Paravector<double> r(m);
    for (int i = 0; i < m; ++i) r[i] = nd(rng);
    return r;
}

inline Paravector<double> random_unit(int m, std::mt19937_64& rng) {
    auto r = random_para(m, rng);
    return (1.0 / r.norm()) * r;
}

inline double max_diff(const Multivector<double>& a, const Multivector<double>& b) { return clifford::max_abs(a - b); }

}  // namespace hsca::test
