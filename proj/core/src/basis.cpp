#include "hsca/basis.hpp"

#include <stdexcept>

namespace hsca::poly {

Eigen::MatrixXd monomial_gram(int m, int k) {
    auto tab = MonomialTable::get(m, k);
    const int n = tab->size();
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Exponent a = tab->exponent(i);
            for (int v = 0; v < m; ++v) a[std::size_t(v)] += tab->exponent(j)[std::size_t(v)];
            g(i, j) = disc::monomial_moment(m, a);
        }
    return g;
}

Eigen::Map<const Eigen::VectorXd> as_vector(const HomPoly<double>& p) {
    return {p.coeffs().data(), Eigen::Index(p.coeffs().size())};
}

double real_inner(const HomPoly<double>& p, const HomPoly<double>& q) {
    p.same(q);
    const Eigen::MatrixXd g = monomial_gram(p.m(), p.k());
    const int d = p.dim();
    Eigen::Map<const Eigen::MatrixXd> P(p.coeffs().data(), d, p.nmono());
    Eigen::Map<const Eigen::MatrixXd> Q(q.coeffs().data(), d, q.nmono());
    return (P * g * Q.transpose()).trace();
}

double sphere_norm(const HomPoly<double>& p) { return std::sqrt(std::max(0.0, real_inner(p, p))); }

Multivector<double> sphere_pair(const HomPoly<double>& p, const HomPoly<double>& q, const disc::SphereRule& rule) {
    if (p.m() != q.m() || rule.m != p.m()) throw std::invalid_argument("sphere_pair: dimension mismatch");
    if (rule.degree < p.k() + q.k()) throw std::invalid_argument("sphere_pair: rule exactness too low");
    Multivector<double> s(p.m());
    for (int i = 0; i < rule.size(); ++i) s += rule.weights[std::size_t(i)] * (p.eval(rule.nodes[std::size_t(i)]) * q.eval(rule.nodes[std::size_t(i)]));
    return s;
}

Eigen::MatrixXd MonogenicBasis::coord_matrix() const {
    if (elements.empty()) return {};
    Eigen::MatrixXd c(Eigen::Index(elements[0].coeffs().size()), Eigen::Index(elements.size()));
    for (int i = 0; i < size(); ++i) c.col(i) = as_vector(elements[std::size_t(i)]);
    return c;
}

MonogenicBasis build_basis(int m, int k, int chirality, double basis_tol) {
    if (m < 3) throw std::invalid_argument("build_basis: m >= 3");
    if (k < 0) throw std::invalid_argument("build_basis: k >= 0");
    auto tab = MonomialTable::get(m, k);
    const int dim = 1 << (m - 1);
    std::vector<HomPoly<double>> gens;
    for (int i = 0; i < tab->size(); ++i)
        for (int a = 0; a < dim; ++a) {
            HomPoly<double> p = HomPoly<double>::monomial(tab->exponent(i), Multivector<double>::blade(m, uint32_t(a)));
            gens.push_back(project(harmonic_project(p), chirality));
        }

    // Gram of the generators in the full coefficient space: G_full = I_dim ⊗ G_mono
    const Eigen::MatrixXd g = monomial_gram(m, k);
    const int n = int(gens.size());
    const int len = int(gens[0].coeffs().size());
    Eigen::MatrixXd X(len, n);
    for (int i = 0; i < n; ++i) X.col(i) = as_vector(gens[std::size_t(i)]);
    Eigen::MatrixXd Gfull = Eigen::MatrixXd::Zero(len, len);
    for (int i = 0; i < tab->size(); ++i)
        for (int j = 0; j < tab->size(); ++j)
            for (int a = 0; a < dim; ++a) Gfull(i * dim + a, j * dim + a) = g(i, j);

    Eigen::MatrixXd A = X.transpose() * Gfull * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const double top = es.eigenvalues().maxCoeff();

    MonogenicBasis b;
    b.m = m;
    b.k = k;
    b.chirality = chirality;
    for (int i = n - 1; i >= 0; --i) {
        double lam = es.eigenvalues()(i);
        if (lam <= basis_tol * std::max(1.0, top)) continue;
        Eigen::VectorXd v = X * es.eigenvectors().col(i) / std::sqrt(lam);
        HomPoly<double> e(m, k);
        for (int t = 0; t < len; ++t) e.coeffs()[std::size_t(t)] = v(t);
        b.elements.push_back(std::move(e));
    }
    Eigen::MatrixXd C = b.coord_matrix();
    b.gram = C.transpose() * Gfull * C;
    return b;
}

double span_residual(const MonogenicBasis& b, const HomPoly<double>& p) {
    HomPoly<double> r = p;
    for (const auto& e : b.elements) r -= e * real_inner(e, p);
    return r.max_abs();
}

}  // namespace hsca::poly
