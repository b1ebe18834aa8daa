#pragma once

#include <vector>

#include "hsca/clifford.hpp"
#include "hsca/poly.hpp"

namespace hsca::disc {

using clifford::Paravector;

// ω_{m-1} = 2π^{m/2}/Γ(m/2)
double sphere_area(int m);

// exact ∫_{S^{m-1}} u^α dS(u)
double monomial_moment(int m, const poly::Exponent& a);

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss rule for the weight (1 - t^2)^alpha on [-1, 1] (Golub-Welsch)
GaussRule gauss_gegenbauer(int n, double alpha);

struct SphereRule {
    int m = 0;
    int degree = 0;
    std::vector<Paravector<double>> nodes;
    std::vector<double> weights;

    int size() const { return int(weights.size()); }
    double node(int q, int i) const { return nodes[std::size_t(q)][i]; }
};

// Tensor rule in spherical angles: Gauss-Gegenbauer in each cos-polar variable
// (Gauss-Legendre for the last polar angle), trapezoid in the azimuth.
SphereRule make_sphere_rule(int m, int degree, bool verify = false);

// max |quadrature - exact| over all monomials of degree <= d
double sphere_rule_error(const SphereRule& r, int d);

}  // namespace hsca::disc
