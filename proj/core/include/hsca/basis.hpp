#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hsca/poly.hpp"
#include "hsca/sphere.hpp"

namespace hsca::poly {

constexpr double kBasisTol = 1e-8;

// exact ∫_S u^α u^β dS over the degree-k monomials
Eigen::MatrixXd monomial_gram(int m, int k);

// Sc ∫_S conj(p) q dS, exact
double real_inner(const HomPoly<double>& p, const HomPoly<double>& q);
double sphere_norm(const HomPoly<double>& p);

// ∫_S p(u) q(u) dS(u), unconjugated, by quadrature
Multivector<double> sphere_pair(const HomPoly<double>& p, const HomPoly<double>& q, const disc::SphereRule& rule);

struct MonogenicBasis {
    int m = 0;
    int k = 0;
    int chirality = 1;
    std::vector<HomPoly<double>> elements;  // orthonormal under real_inner
    Eigen::MatrixXd gram;                   // real_inner of the elements

    int size() const { return int(elements.size()); }
    // coefficient vectors as columns (length nmono·2^{m-1})
    Eigen::MatrixXd coord_matrix() const;
};

MonogenicBasis build_basis(int m, int k, int chirality, double basis_tol = kBasisTol);

// max coefficient residual of p after subtracting its orthogonal projection onto span(basis)
double span_residual(const MonogenicBasis& b, const HomPoly<double>& p);

Eigen::Map<const Eigen::VectorXd> as_vector(const HomPoly<double>& p);

}  // namespace hsca::poly
