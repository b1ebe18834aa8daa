#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "hsca/basis.hpp"
#include "hsca/grid.hpp"
#include "hsca/kernels.hpp"
#include "hsca/sphere.hpp"

namespace hsca::ops {

using clifford::Multivector;
using clifford::Paravector;
using disc::AnalyticField;
using disc::GridField;
using poly::HomPoly;

// Chirality bookkeeping used throughout this layer:
//   R_k  = P^+ ∂̄_x and R_k^† = P^+ ∂_x act on M_k^- -valued fields and return M_k^+ -valued fields;
//   T_k, T_k^† take M_k^+ -valued fields to M_k^- -valued fields;
//   Π = R_k^† T_k and Π^† = R_k T_k^† act on M_k^+ -valued fields.
constexpr int kFieldChirality = -1;   // ω, φ, outputs of T
constexpr int kSourceChirality = +1;  // f, h, outputs of R

struct SingularPolicy {
    double rho_cell = 1.0;      // puncture radius in units of the smallest cell width
    bool pv_symmetric = true;
};

struct ContextOptions {
    int sphere_degree = -1;     // default 2k + 4
    int local_degree = 48;      // sphere rule for the local/log terms of pi_integral
    SingularPolicy policy;
    double fd_step = -1;        // default h/2
    int threads = 1;
};

class OperatorContext {
public:
    static std::shared_ptr<const OperatorContext> make(std::shared_ptr<const disc::DomainGrid> grid, int k,
                                                       const ContextOptions& opt = {});

    kernels::KernelParams kp;
    std::shared_ptr<const disc::DomainGrid> grid;
    disc::SphereRule rule;
    disc::SphereRule local_rule;
    SingularPolicy policy;
    double fd_step = 0;
    int threads = 1;

    int m = 0, k = 0, dim = 0, nmono = 0, len = 0;
    poly::MonogenicBasis basis_plus, basis_minus;
    Eigen::MatrixXd proj_plus, proj_minus;  // len × len, Fischer formulas
    Eigen::MatrixXd gram;                   // len × len, exact sphere Gram (I_dim ⊗ G_mono)
    Eigen::MatrixXd coords_plus;            // r × len, orthonormal coordinates on M^+ (B^T G)

    // unisolvent sphere points and the inverse Vandermonde used to rebuild degree-k outputs
    std::vector<double> probe_u;  // nmono × m
    Eigen::MatrixXd vinv;         // nmono × nmono
    std::vector<int> exps;        // nmono × m

    std::vector<int8_t> gen_sign;  // m × dim: sign of e_j e_A

    double punct_radius() const { return policy.rho_cell * grid->hmin(); }
};

using Ctx = std::shared_ptr<const OperatorContext>;

// ---- field algebra ---------------------------------------------------------------
double inner_real(const GridField& a, const GridField& b, const Ctx& ctx);
double norm(const GridField& a, const Ctx& ctx);
Multivector<double> l2_inner(const GridField& f, const GridField& g, const Ctx& ctx);
GridField project_field(const GridField& f, int chirality, const Ctx& ctx);
// max over nodes of |cr_bar p| (chirality +) or |cr p| (chirality -), relative to the field scale
double chirality_leak(const GridField& f, int chirality);
GridField flip_u0(const GridField& f);
HomPoly<double> flip_u0(const HomPoly<double>& p);
AnalyticField flip_u0(const AnalyticField& f);

// ---- differential operators -------------------------------------------------------
GridField apply_Rk(const GridField& g, const Ctx& ctx);
GridField apply_Rk_dagger(const GridField& g, const Ctx& ctx);
AnalyticField apply_Rk(const AnalyticField& g, const Ctx& ctx);
AnalyticField apply_Rk_dagger(const AnalyticField& g, const Ctx& ctx);

// ---- integral operators -----------------------------------------------------------
// all volume nodes as targets (self node punctured)
GridField teodorescu(const GridField& f, const Ctx& ctx, bool dagger = false);
// discrete adjoint of the map above under the nodal sphere-L2 inner product
GridField teodorescu_adjoint(const GridField& g, const Ctx& ctx, bool dagger = false);
std::vector<HomPoly<double>> teodorescu(const GridField& f, const std::vector<Paravector<double>>& ys, const Ctx& ctx,
                                        bool dagger = false);
HomPoly<double> teodorescu(const GridField& f, const Paravector<double>& y, const Ctx& ctx, bool dagger = false);
// values at the boundary face centres, in the order of ctx->grid->faces()
std::vector<HomPoly<double>> teodorescu_boundary(const GridField& f, const Ctx& ctx, bool dagger = false);

// boundary values given per face of ctx->grid
std::vector<HomPoly<double>> boundary_values(const AnalyticField& g, const Ctx& ctx);
std::vector<HomPoly<double>> boundary_values(const std::function<HomPoly<double>(const Paravector<double>&)>& g,
                                             const Ctx& ctx);
std::vector<HomPoly<double>> cauchy_bitsadze(const std::vector<HomPoly<double>>& face_values,
                                             const std::vector<Paravector<double>>& ys, const Ctx& ctx,
                                             bool dagger = false);
GridField cauchy_bitsadze(const std::vector<HomPoly<double>>& face_values, const Ctx& ctx, bool dagger = false);

// Π and Π^† on the node grid: T on all nodes, then field_derivative
GridField pi_apply(const GridField& f, const Ctx& ctx);
GridField pi_dagger_apply(const GridField& f, const Ctx& ctx);

// point evaluations; f must vanish near ∂Ω (the quadrature lattice is anchored at y)
HomPoly<double> pi_compose(const AnalyticField& f, const Paravector<double>& y, const Ctx& ctx, bool dagger = false);
HomPoly<double> pi_integral(const AnalyticField& f, const Paravector<double>& y, const Ctx& ctx, bool dagger = false);
// node evaluations on a grid field (box singularity subtraction with the log term)
HomPoly<double> pi_compose(const GridField& f, int node, const Ctx& ctx, bool dagger = false);
HomPoly<double> pi_integral(const GridField& f, int node, const Ctx& ctx, bool dagger = false);

// the local term c^{-1} ∫_S t̄ t̄ f(R_{t̄}u) dσ(t) (or t t f(R_t u) for the dagger side), before projection
HomPoly<double> pi_local_term(const HomPoly<double>& f, const Ctx& ctx, bool dagger = false);

// ---- norms ------------------------------------------------------------------------
struct PowerIteration {
    double norm = 0;
    std::vector<double> history;
};
PowerIteration pi_norm_emp(const Ctx& ctx, int steps = 20, uint64_t seed = 20240601);

}  // namespace hsca::ops
