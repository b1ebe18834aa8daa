#include "hsca/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "hsca/sphere.hpp"

namespace hsca::kernels {

namespace {

double lfact(int n) { return std::lgamma(n + 1.0); }

}  // namespace

KernelParams KernelParams::make(int m, int k) {
    if (m < 3) throw std::invalid_argument("kernels: m >= 3");
    if (k < 0) throw std::invalid_argument("kernels: k >= 0");
    KernelParams p;
    p.m = m;
    p.k = k;
    p.mu = 0.5 * (m - 2);
    p.omega = disc::sphere_area(m);
    p.c_mk = (m - 2) * p.omega / (m + 2 * k - 2);
    return p;
}

double gegenbauer(int k, double mu, double t) {
    if (mu <= 0) throw std::invalid_argument("gegenbauer: mu > 0");
    if (k < 0) return 0.0;
    double s = 0;
    for (int n = 0; 2 * n <= k; ++n) {
        double mag = std::exp(std::lgamma(k - n + mu) - std::lgamma(mu) - lfact(n) - lfact(k - 2 * n));
        double term = mag * std::pow(2.0 * t, k - 2 * n);
        s += (n % 2) ? -term : term;
    }
    return s;
}

Multivector<double> zonal(int k, const Paravector<double>& u, const Paravector<double>& v, int chirality) {
    const int m = u.m();
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0 || nv == 0) throw std::invalid_argument("zonal: zero-length argument");
    const double mu = 0.5 * (m - 2);
    const double t = clifford::euclid(u, v) / (nu * nv);
    Multivector<double> z = Multivector<double>::scalar(m, (2 * mu + k) / (2 * mu) * std::pow(nu * nv, k) * gegenbauer(k, mu, t));
    if (k >= 1) {
        Multivector<double> w = chirality > 0 ? clifford::para_products(u.bar(), v.bar()).wedge_part
                                              : clifford::para_products(u, v).wedge_part;
        z += w * (std::pow(nu * nv, k - 1) * gegenbauer(k - 1, mu + 1, t));
    }
    return z;
}

Multivector<double> fundamental(const KernelParams& kp, const Paravector<double>& x, const Paravector<double>& u,
                                const Paravector<double>& v, int chirality) {
    const double r = x.norm();
    if (r == 0) throw std::invalid_argument("fundamental: singular point x = 0");
    Paravector<double> axis = chirality > 0 ? x.bar() : x;
    Paravector<double> ru = clifford::mirror(axis, u);
    double s = 1.0 / (kp.c_mk * std::pow(r, kp.m));
    return (axis.to_multivector() * zonal(kp.k, ru, v, +1)) * s;
}

NormConstants norm_constants(int m, int k) {
    if (m < 3) throw std::invalid_argument("norm_constants: m >= 3");
    const double mu = 0.5 * (m - 2);
    const double lgmu = std::lgamma(mu), lgmu1 = std::lgamma(mu + 1), lgmu2 = std::lgamma(mu + 2);
    auto g = [&](int n) { return std::lgamma(k - n + mu); };

    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (int n = 0; 2 * n <= k; ++n) s1 += std::exp(g(n) - lgmu - lfact(n) - lfact(k - 2 * n)) * std::pow(2.0, k - 2 * n);
    for (int n = 0; 2 * n <= k - 1; ++n) s2 += std::exp(g(n) - lgmu1 - lfact(n) - lfact(k - 2 * n - 1)) * std::pow(2.0, k - 2 * n - 1);
    for (int n = 0; 2 * n <= k - 1; ++n)
        s3 += (2 * mu + k) * std::exp(g(n) - lgmu1 - lfact(n) - lfact(k - 2 * n - 1)) * std::pow(2.0, k - 2 * n - 1);
    for (int n = 0; 2 * n <= k - 2; ++n)
        s4 += (2 * mu + 2) * std::exp(g(n) - lgmu2 - lfact(n) - lfact(k - 2 * n - 2)) * std::pow(2.0, k - 2 * n - 2);

    NormConstants c;
    c.C1 = (2.0 * m - 2.0) * ((2 * mu + k) / (2 * mu) * s1 + s2);
    c.C2 = s3 + s4;
    const double om = disc::sphere_area(m);
    const double a = 8.0 * m * c.C2 + c.C1;
    c.C = std::sqrt(2.0 * a * a * om * om + double(m) * m * m * std::pow(2.0, 4 * m + 2 * k + 5) / (m + 2 * k) + 2.0);
    return c;
}

}  // namespace hsca::kernels
