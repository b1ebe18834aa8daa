#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hsca/operators.hpp"

namespace hsca::suites {

using ops::AnalyticField;
using ops::Ctx;

struct SuiteConfig {
    int m = 3;
    int k = 1;
    std::vector<int> ladder{8, 16, 32};
    std::vector<std::pair<double, double>> bounds;  // empty: unit box
    uint64_t seed = 1;
    int threads = 1;
    int sphere_degree = -1;
};

struct SuiteReport {
    std::string suite;
    std::string invariant;  // violated invariant named on failure
    std::string identity;
    int m = 0, k = 0;
    std::vector<int> N;
    std::vector<double> residuals;
    std::vector<std::pair<std::string, std::vector<double>>> series;  // auxiliary columns
    double order_estimate = std::numeric_limits<double>::quiet_NaN();
    int sign = 0;  // adjoint only
    double threshold = 0;
    bool pass = false;
    std::string message;
};

const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);
// throws std::invalid_argument for an unknown suite
SuiteReport run_suite(const std::string& name, const SuiteConfig& cfg);

// least-squares slope of -log(residual) against log(N); NaN when undefined
double order_estimate(const std::vector<int>& N, const std::vector<double>& r);
bool strictly_decreasing(const std::vector<double>& r);

std::vector<std::pair<double, double>> unit_box(int m);
Ctx make_context(const SuiteConfig& cfg, int N);

// Σ_{|β| <= degree} x^β q_β(u), q_β random in M_k^± (seeded), exact x-derivatives
AnalyticField polynomial_field(const Ctx& ctx, int chirality, int degree, uint64_t seed);
// ψ(x)(q_0 + Σ_i (x_i - c_i)/ρ q_{i+1}), ψ = (1 - |x-c|²/ρ²)^4 inside the ball, 0 outside
AnalyticField bump_field(const Ctx& ctx, int chirality, const std::vector<double>& center, double radius,
                         uint64_t seed);

// random harmonic polynomial of degree k (harmonic part of a random P_k element)
poly::HomPoly<double> random_harmonic(int m, int k, uint64_t seed);

// ∫_∂Ω (g n f)_u dσ  vs  ∫_Ω (g∂̄_x, f)_u dx + ∫_Ω (g, ∂̄_x f)_u dx, midpoint rules, (·,·)_u unconjugated
struct StokesBalance {
    clifford::Multivector<double> boundary, volume_left, volume_right;
};
StokesBalance stokes_balance(const AnalyticField& f, const AnalyticField& g, const Ctx& ctx);

}  // namespace hsca::suites
