#pragma once

#include "hsca/clifford.hpp"

namespace hsca::kernels {

using clifford::Multivector;
using clifford::Paravector;

struct KernelParams {
    int m = 3;
    int k = 0;
    double mu = 0.5;     // (m-2)/2
    double omega = 0;    // ω_{m-1}
    double c_mk = 0;     // (m-2)ω/(m+2k-2)

    static KernelParams make(int m, int k);
};

struct NormConstants {
    double C1 = 0;
    double C2 = 0;
    double C = 0;
};

double gegenbauer(int k, double mu, double t);

// Zonal monogenic of degree k. chirality +1 reproduces ker ∂̄_u (wedge ū∧v),
// chirality -1 reproduces ker ∂_u (wedge u∧v̄); reproduction is under the
// normalized measure dS/ω_{m-1}.
Multivector<double> zonal(int k, const Paravector<double>& u, const Paravector<double>& v, int chirality);

// chirality +1: E_k(x,u,v) = c^{-1} x̄/|x|^m Z^+(R_{x̄}u, v)
// chirality -1: E_k^†(x,u,v) = c^{-1} x/|x|^m Z^+(R_x u, v)
// R_a u = u - 2<a,u>a/|a|^2
Multivector<double> fundamental(const KernelParams& kp, const Paravector<double>& x, const Paravector<double>& u,
                                const Paravector<double>& v, int chirality);

NormConstants norm_constants(int m, int k);

}  // namespace hsca::kernels
