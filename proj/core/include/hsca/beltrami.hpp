#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsca/operators.hpp"

namespace hsca::beltrami {

using ops::Ctx;
using ops::GridField;

// R_k ω = f R_k^† ω with ω = φ + T_k h, R_k φ = 0; iterate h ← f(R_k^† φ + Π h).
// ω, φ are M_k^- -valued, h is M_k^+ -valued.
struct BeltramiProblem {
    bool multivector = false;
    std::vector<double> f_scalar;                         // per node (scalar mode)
    std::vector<clifford::Multivector<double>> f_mv;      // per node (multivector mode)
    GridField phi;
    double tol = 1e-10;
    int max_iter = 200;
    double rho_bound = 0;         // user contraction estimate, recorded only
    double tol_monogenic = 1e-8;  // ‖R_k φ‖ relative to ‖φ‖-scale

    double f_inf() const;
};

struct BeltramiSolution {
    GridField h, omega;
    int iterations = 0;
    std::vector<double> update_norms;
    std::vector<double> ratios;   // ‖Δh_{n+1}‖/‖Δh_n‖ (NaN for the first)
    double equation_residual = 0;     // ‖R_kω - f R_k^†ω‖/‖R_k^†ω‖
    double fixed_point_residual = 0;  // ‖h - f(R_k^†φ + Πh)‖/‖h‖
    double leakage = 0;               // multivector mode: chirality leak removed by reprojection
    bool converged = false;
    bool diverged = false;
    std::string diagnostic;
};

struct Decomposition {
    GridField phi, h;
};

struct ContractionVerdict {
    double f_inf = 0;
    double C = 0;
    double pi_norm_emp = 0;
    bool analytic_pass = false;      // ‖f‖_∞ < 1/C
    bool empirical_pass = false;  // ‖f‖_∞·‖Π‖_emp < 1
};

Decomposition decompose(const GridField& omega, const Ctx& ctx);

ContractionVerdict check_contraction(const BeltramiProblem& p, const Ctx& ctx, double pi_norm_emp);

// pi_norm_emp is only used for the divergence diagnostic
BeltramiSolution solve(const BeltramiProblem& p, const Ctx& ctx, double pi_norm_emp = 0);

// φ = Σ_{|β| <= degree} x^β q_β(u), q_β ∈ M_k^-, drawn from the null space of R_k with a seeded
// random combination and normalized to unit L² norm on the grid.
ops::AnalyticField make_phi(const Ctx& ctx, int degree = 2, uint64_t seed = 7);

}  // namespace hsca::beltrami
