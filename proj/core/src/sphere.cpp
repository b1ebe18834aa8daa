#include "hsca/sphere.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hsca::disc {

double sphere_area(int m) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m);
}

double monomial_moment(int m, const poly::Exponent& a) {
    double lg = 0;
    int tot = 0;
    for (int v : a) {
        if (v % 2) return 0.0;
        lg += std::lgamma(0.5 * (v + 1));
        tot += v;
    }
    return 2.0 * std::exp(lg - std::lgamma(0.5 * (tot + m)));
}

GaussRule gauss_gegenbauer(int n, double alpha) {
    if (n < 1) throw std::invalid_argument("gauss: n >= 1");
    // monic recurrence for the symmetric Jacobi weight, lambda = alpha + 1/2
    const double lam = alpha + 0.5;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int j = 1; j < n; ++j) {
        double b = double(j) * (j + 2 * lam - 1) / (4.0 * (j + lam) * (j + lam - 1));
        J(j, j - 1) = J(j - 1, j) = std::sqrt(b);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double mu0 = std::sqrt(std::numbers::pi) * std::tgamma(alpha + 1) / std::tgamma(alpha + 1.5);
    GaussRule g;
    for (int i = 0; i < n; ++i) {
        g.nodes.push_back(es.eigenvalues()(i));
        double v = es.eigenvectors()(0, i);
        g.weights.push_back(mu0 * v * v);
    }
    return g;
}

SphereRule make_sphere_rule(int m, int degree, bool verify) {
    if (m < 2 || m > clifford::kMaxDim) throw std::invalid_argument("sphere rule: unsupported m");
    if (degree < 0) throw std::invalid_argument("sphere rule: negative degree");
    SphereRule r;
    r.m = m;
    r.degree = degree;

    const int nphi = degree + 1 + (degree + 1) % 2;  // even count keeps the antipodal symmetry
    const int ngauss = degree / 2 + 1;

    // polar variable i (0-based, m-2 of them) carries the weight (1-t^2)^{(m-3-i)/2}
    std::vector<GaussRule> polar;
    for (int i = 0; i < m - 2; ++i) polar.push_back(gauss_gegenbauer(ngauss, 0.5 * (m - 3 - i)));

    std::vector<int> idx(std::size_t(std::max(0, m - 2)), 0);
    const double dphi = 2.0 * std::numbers::pi / nphi;
    while (true) {
        double w = 1.0, s = 1.0;
        std::vector<double> u(std::size_t(m), 0.0);
        for (int i = 0; i < m - 2; ++i) {
            double t = polar[std::size_t(i)].nodes[std::size_t(idx[std::size_t(i)])];
            w *= polar[std::size_t(i)].weights[std::size_t(idx[std::size_t(i)])];
            u[std::size_t(i)] = s * t;
            s *= std::sqrt(std::max(0.0, 1.0 - t * t));
        }
        for (int p = 0; p < nphi; ++p) {
            double phi = (p + 0.5) * dphi;
            std::vector<double> v = u;
            v[std::size_t(m - 2)] = s * std::cos(phi);
            v[std::size_t(m - 1)] = s * std::sin(phi);
            r.nodes.emplace_back(v);
            r.weights.push_back(w * dphi);
        }
        int i = 0;
        for (; i < m - 2; ++i) {
            if (++idx[std::size_t(i)] < ngauss) break;
            idx[std::size_t(i)] = 0;
        }
        if (i == m - 2) break;
    }
    if (verify && sphere_rule_error(r, degree) > 1e-10) throw std::runtime_error("sphere rule: exactness check failed");
    return r;
}

double sphere_rule_error(const SphereRule& r, int d) {
    double worst = 0;
    for (int k = 0; k <= d; ++k) {
        auto tab = poly::MonomialTable::get(r.m, k);
        for (int i = 0; i < tab->size(); ++i) {
            const auto& a = tab->exponent(i);
            double s = 0;
            for (int q = 0; q < r.size(); ++q) {
                double v = r.weights[std::size_t(q)];
                for (int j = 0; j < r.m; ++j) v *= std::pow(r.node(q, j), a[std::size_t(j)]);
                s += v;
            }
            worst = std::max(worst, std::abs(s - monomial_moment(r.m, a)));
        }
    }
    return worst;
}

}  // namespace hsca::disc
