#include "hsca/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace hsca::ops {

namespace {

Eigen::MatrixXd formula_projector(int m, int k, int chir) {
    const int len = poly::MonomialTable::get(m, k)->size() * (1 << (m - 1));
    Eigen::MatrixXd P(len, len);
    for (int c = 0; c < len; ++c) {
        HomPoly<double> e(m, k);
        e.coeffs()[std::size_t(c)] = 1.0;
        HomPoly<double> r = e;
        if (k > 0) {
            const double den = m + 2 * k - 2;
            r = chir > 0 ? e - poly::mul_u(poly::cr_bar(e), -1) * (1.0 / den) : e - poly::mul_u(poly::cr(e), +1) * (1.0 / den);
        }
        P.col(c) = poly::as_vector(r);
    }
    return P;
}

template <class F>
void parallel_for(int n, int threads, F&& fn) {
    threads = std::clamp(threads, 1, std::max(1, n));
    if (threads == 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> ts;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        int lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        ts.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : ts) t.join();
}

inline double rpow_m(double r, int m) {
    double s = 1;
    for (int i = 0; i < m; ++i) s *= r;
    return s;
}

// out += s · L · g for a paravector L (m comps), g a multivector (dim comps)
inline void left_para(const OperatorContext& C, const double* L, const double* g, double* out, double s) {
    const int D = C.dim;
    for (int A = 0; A < D; ++A) {
        const double v = s * g[A];
        if (v == 0) continue;
        out[A] += L[0] * v;
        for (int i = 1; i < C.m; ++i) {
            const int B = A ^ (1 << (i - 1));
            out[B] += C.gen_sign[std::size_t(i * D + A)] * L[i] * v;
        }
    }
}

// out += s · e_i · g (i = 0 is the unit)
inline void left_gen(const OperatorContext& C, int i, const double* g, double* out, double s) {
    const int D = C.dim;
    if (i == 0) {
        for (int A = 0; A < D; ++A) out[A] += s * g[A];
        return;
    }
    for (int A = 0; A < D; ++A) out[A ^ (1 << (i - 1))] += s * C.gen_sign[std::size_t(i * D + A)] * g[A];
}

// values at the probe points (nmono × dim) -> coefficients (nmono × dim)
void values_to_coeffs(const OperatorContext& C, const double* vals, double* out) {
    const int P = C.nmono, D = C.dim;
    for (int a = 0; a < P; ++a)
        for (int B = 0; B < D; ++B) {
            double s = 0;
            for (int q = 0; q < P; ++q) s += C.vinv(a, q) * vals[q * D + B];
            out[a * D + B] = s;
        }
}

// monomial values (and optionally gradients) of degree k at v
struct MonoEval {
    const OperatorContext& C;
    std::vector<double> pw, mv, grad;  // grad: m × nmono
    explicit MonoEval(const OperatorContext& c)
        : C(c), pw(static_cast<std::size_t>(c.m * (c.k + 1))), mv(static_cast<std::size_t>(c.nmono)), grad(static_cast<std::size_t>(c.m * c.nmono)) {}

    void powers(const double* v) {
        const int K = C.k + 1;
        for (int i = 0; i < C.m; ++i) {
            pw[std::size_t(i * K)] = 1;
            for (int e = 1; e <= C.k; ++e) pw[std::size_t(i * K + e)] = pw[std::size_t(i * K + e - 1)] * v[i];
        }
    }
    void values(const double* v) {
        powers(v);
        const int K = C.k + 1;
        for (int a = 0; a < C.nmono; ++a) {
            double s = 1;
            for (int i = 0; i < C.m; ++i) s *= pw[std::size_t(i * K + C.exps[std::size_t(a * C.m + i)])];
            mv[std::size_t(a)] = s;
        }
    }
    void gradients(const double* v) {
        values(v);
        const int K = C.k + 1;
        for (int l = 0; l < C.m; ++l)
            for (int a = 0; a < C.nmono; ++a) {
                const int el = C.exps[std::size_t(a * C.m + l)];
                if (el == 0) {
                    grad[std::size_t(l * C.nmono + a)] = 0;
                    continue;
                }
                double s = el * pw[std::size_t(l * K + el - 1)];
                for (int i = 0; i < C.m; ++i)
                    if (i != l) s *= pw[std::size_t(i * K + C.exps[std::size_t(a * C.m + i)])];
                grad[std::size_t(l * C.nmono + a)] = s;
            }
    }
    // g = Σ_a w[a] c[a·D + ·]
    void contract(const double* w, const double* c, double* g) const {
        const int D = C.dim;
        std::fill(g, g + D, 0.0);
        for (int a = 0; a < C.nmono; ++a) {
            const double s = w[a];
            if (s == 0) continue;
            for (int A = 0; A < D; ++A) g[A] += s * c[a * D + A];
        }
    }
};

struct EngineSpec {
    bool left_bar = true;
    bool axis_bar = true;
    double scale = 1;
    double punct = 0;
};

// points origin + i·h, i in the box [0, dims), axis 0 fastest; each point carries a cell of
// the given extent (h for volume cells, 0 along the normal of a face cell)
struct Lattice {
    std::vector<double> origin, h, extent;
    std::vector<int> dims;
    int size() const {
        int n = 1;
        for (int d : dims) n *= d;
        return n;
    }
};

Lattice node_lattice(const disc::DomainGrid& g) {
    Lattice L;
    for (int a = 0; a < g.m(); ++a) {
        L.origin.push_back(g.bounds()[std::size_t(a)].first + 0.5 * g.h(a));
        L.h.push_back(g.h(a));
        L.extent.push_back(g.h(a));
        L.dims.push_back(g.N());
    }
    return L;
}

// faces of one (axis, side) set in the order DomainGrid builds them
Lattice face_lattice(const disc::DomainGrid& g, int axis, int side) {
    Lattice L = node_lattice(g);
    L.origin[std::size_t(axis)] = side ? g.bounds()[std::size_t(axis)].second : g.bounds()[std::size_t(axis)].first;
    L.dims[std::size_t(axis)] = 1;
    L.extent[std::size_t(axis)] = 0;
    return L;
}

struct KernelWork {
    MonoEval me;
    Eigen::MatrixXd MV, S;
    std::vector<Eigen::MatrixXd> acc;  // per generator: Σ wt·|w|^{-m}·L_i(w)·MV
    explicit KernelWork(const OperatorContext& C)
        : me(C), MV(C.nmono, C.nmono), S(C.nmono, C.nmono), acc(std::size_t(C.m), Eigen::MatrixXd(C.nmono, C.nmono)) {}
    void reset() {
        for (auto& A : acc) A.setZero();
    }
};

// acc_i += wt·scale·|w|^{-m} L_i(w) (R_axis(w) u_q)^α; the kernel is linear in these sums
void add_kernel_point(const OperatorContext& C, const EngineSpec& sp, const double* w, double wt, KernelWork& kw) {
    const int m = C.m, P = C.nmono;
    double r2 = 0;
    for (int i = 0; i < m; ++i) r2 += w[i] * w[i];
    const double r = std::sqrt(r2);
    const double inv = wt * sp.scale / rpow_m(r, m);
    double a[clifford::kMaxDim], v[clifford::kMaxDim];
    for (int i = 0; i < m; ++i) a[i] = ((sp.axis_bar && i > 0) ? -1 : 1) * w[i] / r;
    for (int q = 0; q < P; ++q) {
        const double* u = &C.probe_u[std::size_t(q * m)];
        double d = 0;
        for (int i = 0; i < m; ++i) d += a[i] * u[i];
        for (int i = 0; i < m; ++i) v[i] = u[i] - 2 * d * a[i];
        kw.me.values(v);
        for (int al = 0; al < P; ++al) kw.MV(q, al) = kw.me.mv[std::size_t(al)];
    }
    for (int i = 0; i < m; ++i) {
        const double li = inv * ((sp.left_bar && i > 0) ? -1 : 1) * w[i];
        kw.acc[std::size_t(i)].noalias() += li * kw.MV;
    }
}

// dense len × len column-major matrix of c ↦ Σ_i e_i S_i c, S_i(β,α) = Σ_q vinv(β,q) acc_i(q,α)
void finish_kernel_matrix(const OperatorContext& C, KernelWork& kw, double* K) {
    const int m = C.m, D = C.dim, P = C.nmono, len = C.len;
    std::fill(K, K + std::size_t(len) * len, 0.0);
    for (int i = 0; i < m; ++i) {
        kw.S.noalias() = C.vinv * kw.acc[std::size_t(i)];
        for (int al = 0; al < P; ++al)
            for (int A = 0; A < D; ++A) {
                double* col = K + std::size_t(al * D + A) * len;
                const int B = i == 0 ? A : (A ^ (1 << (i - 1)));
                const double sg = i == 0 ? 1.0 : C.gen_sign[std::size_t(i * D + A)];
                for (int be = 0; be < P; ++be) col[be * D + B] += sg * kw.S(be, al);
            }
    }
}


const disc::GaussRule& legendre(int n) {
    static const disc::GaussRule r1 = disc::gauss_gegenbauer(1, 0.0), r2 = disc::gauss_gegenbauer(2, 0.0),
                                  r4 = disc::gauss_gegenbauer(4, 0.0), r8 = disc::gauss_gegenbauer(8, 0.0);
    return n >= 8 ? r8 : n >= 4 ? r4 : n >= 2 ? r2 : r1;
}

// tensor Gauss-Legendre over the box [lo, hi] (degenerate axes held fixed), weights normalized by
// the box measure `meas`
void box_kernel(const OperatorContext& C, const EngineSpec& sp, const double* lo, const double* hi, double meas,
                int ng, KernelWork& kw) {
    const int m = C.m;
    const auto& gr = legendre(ng);
    int idx[clifford::kMaxDim] = {0};
    double x[clifford::kMaxDim];
    while (true) {
        double wt = 1;
        for (int i = 0; i < m; ++i) {
            const double len = hi[i] - lo[i];
            if (len > 0) {
                x[i] = 0.5 * (lo[i] + hi[i]) + 0.5 * len * gr.nodes[std::size_t(idx[i])];
                wt *= 0.5 * len * gr.weights[std::size_t(idx[i])];
            } else {
                x[i] = lo[i];
            }
        }
        add_kernel_point(C, sp, x, wt / meas, kw);
        int i = 0;
        while (i < m && (hi[i] - lo[i] <= 0 || ++idx[i] >= ng)) {
            idx[i] = 0;
            ++i;
        }
        if (i == m) break;
    }
}

// cell average of the kernel matrix over the cell centred at offset w with the given extent;
// tensor Gauss-Legendre, denser for cells close to the singularity. A cell that contains the
// singular point is split there so that it only sits at sub-box corners. False when punctured.
bool cell_kernel_matrix(const OperatorContext& C, const EngineSpec& sp, const double* w, const double* extent,
                        KernelWork& kw, double* K) {
    const int m = C.m;
    double r2 = 0, hmax = 0, meas = 1;
    bool inside = true;
    for (int i = 0; i < m; ++i) {
        r2 += w[i] * w[i];
        hmax = std::max(hmax, extent[i]);
        if (extent[i] > 0) meas *= extent[i];
        if (extent[i] > 0 ? std::abs(w[i]) > 0.5 * extent[i] : w[i] != 0) inside = false;
    }
    const double lim = sp.punct * (1 - 1e-9);
    if (r2 == 0 || r2 < lim * lim) return false;
    kw.reset();
    double lo[clifford::kMaxDim], hi[clifford::kMaxDim];
    if (inside) {
        // up to 2^m sub-boxes with a corner at the singular point
        for (int mask = 0; mask < (1 << m); ++mask) {
            bool empty = false;
            for (int i = 0; i < m; ++i) {
                const double a = w[i] - 0.5 * extent[i], b = w[i] + 0.5 * extent[i];
                if (extent[i] == 0) {
                    if (mask >> i & 1) empty = true;
                    lo[i] = hi[i] = w[i];
                    continue;
                }
                lo[i] = (mask >> i & 1) ? 0.0 : a;
                hi[i] = (mask >> i & 1) ? b : 0.0;
                if (hi[i] - lo[i] <= 0) empty = true;
            }
            if (!empty) box_kernel(C, sp, lo, hi, meas, m <= 3 ? 8 : 4, kw);
        }
    } else {
        const double rho = hmax > 0 ? std::sqrt(r2) / hmax : INFINITY;
        const int ng = rho < 2.5 ? (m <= 3 ? 8 : 4) : rho < 6 ? 4 : 2;
        for (int i = 0; i < m; ++i) {
            lo[i] = w[i] - 0.5 * extent[i];
            hi[i] = w[i] + 0.5 * extent[i];
        }
        box_kernel(C, sp, lo, hi, meas, ng, kw);
    }
    finish_kernel_matrix(C, kw, K);
    return true;
}

// out_t = Σ_s wsrc_s · scale · |w|^{-m} L(w) c_s(R_axis(w) u), w = src_s - tgt_t.
// With cell extents (ns × m) the kernel is averaged over source cells within 2.5 cell widths
// of the target (product integration); the puncture is then ignored.
void engine(const OperatorContext& C, const EngineSpec& sp, const double* tgt, int nt, const double* src,
            const double* wsrc, int ns, const double* coef, double* out, const double* extent = nullptr) {
    const int m = C.m, D = C.dim, P = C.nmono, L = C.len;
    const double lim = extent ? 0.0 : sp.punct * (1 - 1e-9);
    const double lim2 = lim * lim;
    double hmax = 0;
    if (extent)
        for (int s = 0; s < ns * m; ++s) hmax = std::max(hmax, extent[s]);
    const double near2 = 6.25 * hmax * hmax;
    EngineSpec spn = sp;
    spn.punct = 0;

    std::vector<char> live(static_cast<std::size_t>(ns), 0);
    for (int s = 0; s < ns; ++s)
        for (int c = 0; c < L; ++c)
            if (coef[std::size_t(s) * L + c] != 0) {
                live[std::size_t(s)] = 1;
                break;
            }

    parallel_for(nt, C.threads, [&](int lo, int hi) {
        MonoEval me(C);
        KernelWork kw(C);
        std::vector<double> K(extent ? static_cast<std::size_t>(L) * L : 0), near(static_cast<std::size_t>(L));
        std::vector<double> vals(static_cast<std::size_t>(P * D)), g(static_cast<std::size_t>(D)), w(static_cast<std::size_t>(m)), a(static_cast<std::size_t>(m)),
            Lw(static_cast<std::size_t>(m)), v(static_cast<std::size_t>(m));
        for (int t = lo; t < hi; ++t) {
            std::fill(vals.begin(), vals.end(), 0.0);
            std::fill(near.begin(), near.end(), 0.0);
            const double* y = tgt + std::size_t(t) * m;
            for (int s = 0; s < ns; ++s) {
                if (!live[std::size_t(s)]) continue;
                const double* x = src + std::size_t(s) * m;
                double r2 = 0;
                for (int i = 0; i < m; ++i) {
                    w[std::size_t(i)] = x[i] - y[i];
                    r2 += w[std::size_t(i)] * w[std::size_t(i)];
                }
                if (extent && r2 < near2) {
                    if (cell_kernel_matrix(C, spn, w.data(), extent + std::size_t(s) * m, kw, K.data()))
                        Eigen::Map<Eigen::VectorXd>(near.data(), L).noalias() +=
                            wsrc[s] * Eigen::Map<const Eigen::MatrixXd>(K.data(), L, L) *
                            Eigen::Map<const Eigen::VectorXd>(coef + std::size_t(s) * L, L);
                    continue;
                }
                if (r2 == 0 || r2 < lim2) continue;
                const double r = std::sqrt(r2);
                const double inv = wsrc[s] * sp.scale / rpow_m(r, m);
                for (int i = 0; i < m; ++i) {
                    const double flipL = (sp.left_bar && i > 0) ? -1 : 1;
                    const double flipA = (sp.axis_bar && i > 0) ? -1 : 1;
                    Lw[std::size_t(i)] = flipL * w[std::size_t(i)];
                    a[std::size_t(i)] = flipA * w[std::size_t(i)] / r;
                }
                const double* c = coef + std::size_t(s) * L;
                for (int q = 0; q < P; ++q) {
                    const double* u = &C.probe_u[std::size_t(q * m)];
                    double d = 0;
                    for (int i = 0; i < m; ++i) d += a[std::size_t(i)] * u[i];
                    for (int i = 0; i < m; ++i) v[std::size_t(i)] = u[i] - 2 * d * a[std::size_t(i)];
                    me.values(v.data());
                    me.contract(me.mv.data(), c, g.data());
                    left_para(C, Lw.data(), g.data(), &vals[std::size_t(q * D)], inv);
                }
            }
            values_to_coeffs(C, vals.data(), out + std::size_t(t) * L);
            for (int c = 0; c < L; ++c) out[std::size_t(t) * L + c] += near[std::size_t(c)];
        }
    });
}

// out_t += weight · Σ_s K̄(src_s - tgt_t) c_s over two lattices with equal spacing,
// K̄ the kernel averaged over the source cell (product integration, self cell omitted)
void lattice_engine(const OperatorContext& C, const EngineSpec& sp, double weight, const Lattice& T, const Lattice& S,
                    const double* coef, double* out) {
    const int m = C.m, len = C.len;
    for (int a = 0; a < m; ++a)
        if (std::abs(T.h[std::size_t(a)] - S.h[std::size_t(a)]) > 1e-14 * T.h[std::size_t(a)])
            throw std::logic_error("lattice_engine: spacing mismatch");
    std::vector<int> tstr(static_cast<std::size_t>(m)), sstr(static_cast<std::size_t>(m));
    int ts = 1, ss = 1;
    for (int a = 0; a < m; ++a) {
        tstr[std::size_t(a)] = ts;
        sstr[std::size_t(a)] = ss;
        ts *= T.dims[std::size_t(a)];
        ss *= S.dims[std::size_t(a)];
    }
    EngineSpec spw = sp;
    spw.scale *= weight;
    const int last = m - 1;
    parallel_for(T.dims[std::size_t(last)], C.threads, [&](int slo, int shi) {
        KernelWork kw(C);
        std::vector<double> K(static_cast<std::size_t>(len) * len);
        std::vector<int> d(static_cast<std::size_t>(m)), lo(static_cast<std::size_t>(m)), hi(static_cast<std::size_t>(m)),
            t(static_cast<std::size_t>(m));
        double w[clifford::kMaxDim];
        for (int a = 0; a < m; ++a) d[std::size_t(a)] = -(T.dims[std::size_t(a)] - 1);
        while (true) {
            bool empty = false;
            for (int a = 0; a < m; ++a) {
                const int da = d[std::size_t(a)];
                lo[std::size_t(a)] = std::max(0, -da);
                hi[std::size_t(a)] = std::min(T.dims[std::size_t(a)], S.dims[std::size_t(a)] - da);
                if (a == last) {
                    lo[std::size_t(a)] = std::max(lo[std::size_t(a)], slo);
                    hi[std::size_t(a)] = std::min(hi[std::size_t(a)], shi);
                }
                if (lo[std::size_t(a)] >= hi[std::size_t(a)]) empty = true;
                w[a] = S.origin[std::size_t(a)] - T.origin[std::size_t(a)] + da * T.h[std::size_t(a)];
            }
            if (!empty && cell_kernel_matrix(C, spw, w, S.extent.data(), kw, K.data())) {
                Eigen::Map<const Eigen::MatrixXd> Km(K.data(), len, len);
                t = lo;
                const int run = hi[0] - lo[0];
                while (true) {
                    int tl = 0, sl = 0;
                    for (int a = 0; a < m; ++a) {
                        tl += t[std::size_t(a)] * tstr[std::size_t(a)];
                        sl += (t[std::size_t(a)] + d[std::size_t(a)]) * sstr[std::size_t(a)];
                    }
                    Eigen::Map<const Eigen::MatrixXd> Cb(coef + std::size_t(sl) * len, len, run);
                    Eigen::Map<Eigen::MatrixXd> Ob(out + std::size_t(tl) * len, len, run);
                    Ob.noalias() += Km * Cb;
                    int a = 1;
                    while (a < m && ++t[std::size_t(a)] >= hi[std::size_t(a)]) {
                        t[std::size_t(a)] = lo[std::size_t(a)];
                        ++a;
                    }
                    if (a >= m) break;
                }
            }
            int a = 0;
            while (a < m && ++d[std::size_t(a)] > S.dims[std::size_t(a)] - 1) {
                d[std::size_t(a)] = -(T.dims[std::size_t(a)] - 1);
                ++a;
            }
            if (a == m) break;
        }
    });
}

void check_ctx_field(const OperatorContext& C, const GridField& f) {
    if (f.grid != C.grid) throw std::invalid_argument("operator: field lives on a different grid");
    if (f.k != C.k || f.m != C.m) throw std::invalid_argument("operator: field degree/dimension mismatch");
}

void require_chirality(const GridField& f, int expected, const char* who) {
    if (f.chirality != 0 && f.chirality != expected)
        throw std::invalid_argument(std::string(who) + ": chirality mismatch (expected " +
                                    (expected > 0 ? "M^+" : "M^-") + ")");
}

std::vector<double> uniform_weights(int n, double w) { return std::vector<double>(static_cast<std::size_t>(n), w); }

GridField project_raw(const GridField& f, const Eigen::MatrixXd& P, int chir) {
    GridField r(f.grid, f.k, chir);
    for (int n = 0; n < f.num_nodes(); ++n) {
        Eigen::Map<const Eigen::VectorXd> src(f.at(n), f.len);
        Eigen::Map<Eigen::VectorXd> dst(r.at(n), r.len);
        dst.noalias() = P * src;
    }
    return r;
}

HomPoly<double> poly_from(const OperatorContext& C, const double* c) {
    HomPoly<double> p(C.m, C.k);
    std::copy(c, c + C.len, p.coeffs().begin());
    return p;
}

HomPoly<double> apply_matrix(const Eigen::MatrixXd& M, const HomPoly<double>& p) {
    HomPoly<double> r(p.m(), p.k());
    Eigen::Map<Eigen::VectorXd>(r.coeffs().data(), Eigen::Index(r.coeffs().size())) = M * poly::as_vector(p);
    return r;
}

// Σ_i σ e_i ∂_{w_i} K(w)[g] at the probe points, accumulated with weight wt.
// K(w)[g](u) = w̄|w|^{-m} g(R_{w̄}u) (σ e_i = ē_i), dagger: w|w|^{-m} g(R_w u) (σ e_i = e_i).
void accumulate_dK(const OperatorContext& C, MonoEval& me, const double* w, const double* gc, bool dagger, double wt,
                   double* acc) {
    const int m = C.m, D = C.dim, P = C.nmono;
    double r2 = 0;
    for (int i = 0; i < m; ++i) r2 += w[i] * w[i];
    const double r = std::sqrt(r2);
    const double rm = rpow_m(r, m);
    std::vector<double> Lw(static_cast<std::size_t>(m)), a(static_cast<std::size_t>(m)), what(static_cast<std::size_t>(m)), v(static_cast<std::size_t>(m));
    std::vector<double> gv(static_cast<std::size_t>(D)), grad(static_cast<std::size_t>(m * D)), X(static_cast<std::size_t>(D)), Y(static_cast<std::size_t>(D)), da(static_cast<std::size_t>(m * m));
    const double sgnbar = dagger ? 1.0 : -1.0;  // sign carried by the vector part of w̄ (or w)
    for (int i = 0; i < m; ++i) {
        const double f = i > 0 ? sgnbar : 1.0;
        Lw[std::size_t(i)] = f * w[i];
        a[std::size_t(i)] = f * w[i] / r;
        what[std::size_t(i)] = w[i] / r;
    }
    // ∂_i a_l = (D δ_il - a_l ŵ_i)/r
    for (int i = 0; i < m; ++i)
        for (int l = 0; l < m; ++l)
            da[std::size_t(i * m + l)] = ((i == l ? (l > 0 ? sgnbar : 1.0) : 0.0) - a[std::size_t(l)] * what[std::size_t(i)]) / r;

    for (int q = 0; q < P; ++q) {
        const double* u = &C.probe_u[std::size_t(q * m)];
        double d = 0;
        for (int l = 0; l < m; ++l) d += a[std::size_t(l)] * u[l];
        for (int l = 0; l < m; ++l) v[std::size_t(l)] = u[l] - 2 * d * a[std::size_t(l)];
        me.gradients(v.data());
        me.contract(me.mv.data(), gc, gv.data());
        for (int l = 0; l < m; ++l) me.contract(&me.grad[std::size_t(l * P)], gc, &grad[std::size_t(l * D)]);
        double* out = acc + std::size_t(q * D);
        for (int i = 0; i < m; ++i) {
            std::fill(X.begin(), X.end(), 0.0);
            // (∂_i L) g(v) / r^m, ∂_i L is the generator e_i with the bar sign
            left_gen(C, i, gv.data(), X.data(), (i > 0 ? sgnbar : 1.0) / rm);
            // -m w_i r^{-m-2} L g(v)
            left_para(C, Lw.data(), gv.data(), X.data(), -m * w[i] / (rm * r2));
            // r^{-m} L Σ_l ∂_l g(v) ∂_i v_l
            double ddi = 0;
            for (int l = 0; l < m; ++l) ddi += da[std::size_t(i * m + l)] * u[l];
            std::fill(Y.begin(), Y.end(), 0.0);
            for (int l = 0; l < m; ++l) {
                const double dv = -2 * (ddi * a[std::size_t(l)] + d * da[std::size_t(i * m + l)]);
                if (dv == 0) continue;
                for (int A = 0; A < D; ++A) Y[std::size_t(A)] += dv * grad[std::size_t(l * D + A)];
            }
            left_para(C, Lw.data(), Y.data(), X.data(), 1.0 / rm);
            left_gen(C, i, X.data(), out, wt * (i > 0 ? sgnbar : 1.0));
        }
    }
}

// wt · L(t) L(t) g(R_t u) at the probe points, L(t) = t̄ (or t for the dagger side), |t| = 1
void accumulate_local(const OperatorContext& C, MonoEval& me, const double* t, const double* gc, bool dagger, double wt,
                      double* acc) {
    const int m = C.m, D = C.dim, P = C.nmono;
    std::vector<double> Lt(static_cast<std::size_t>(m)), v(static_cast<std::size_t>(m)), g(static_cast<std::size_t>(D)), h(static_cast<std::size_t>(D));
    const double sgnbar = dagger ? 1.0 : -1.0;
    for (int i = 0; i < m; ++i) Lt[std::size_t(i)] = (i > 0 ? sgnbar : 1.0) * t[i];
    for (int q = 0; q < P; ++q) {
        const double* u = &C.probe_u[std::size_t(q * m)];
        double d = 0;
        for (int l = 0; l < m; ++l) d += Lt[std::size_t(l)] * u[l];
        for (int l = 0; l < m; ++l) v[std::size_t(l)] = u[l] - 2 * d * Lt[std::size_t(l)];
        me.values(v.data());
        me.contract(me.mv.data(), gc, g.data());
        std::fill(h.begin(), h.end(), 0.0);
        left_para(C, Lt.data(), g.data(), h.data(), 1.0);
        left_para(C, Lt.data(), h.data(), acc + std::size_t(q * D), wt);
    }
}

double ray_to_box(const disc::DomainGrid& g, const double* y, const Paravector<double>& th) {
    double r = INFINITY;
    for (int a = 0; a < g.m(); ++a) {
        const double t = th[a];
        if (t > 1e-300) r = std::min(r, (g.bounds()[std::size_t(a)].second - y[a]) / t);
        else if (t < -1e-300) r = std::min(r, (g.bounds()[std::size_t(a)].first - y[a]) / t);
    }
    return r;
}

// smooth radial cutoff, 1 at 0 and 0 beyond rho
double cutoff(double r, double rho) {
    if (r >= rho) return 0;
    const double s = 1 - (r / rho) * (r / rho);
    return s * s * s * s;
}

// lattice y + h·n inside the box, n ≠ 0
std::vector<double> anchored_lattice(const disc::DomainGrid& g, const double* y) {
    const int m = g.m();
    std::vector<int> lo(static_cast<std::size_t>(m)), hi(static_cast<std::size_t>(m)), n(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
        const double h = g.h(a);
        lo[std::size_t(a)] = int(std::ceil((g.bounds()[std::size_t(a)].first - y[a]) / h + 1e-12));
        hi[std::size_t(a)] = int(std::floor((g.bounds()[std::size_t(a)].second - y[a]) / h - 1e-12));
    }
    std::vector<double> pts;
    n = lo;
    while (true) {
        bool zero = true;
        for (int a = 0; a < m; ++a) zero = zero && n[std::size_t(a)] == 0;
        if (!zero)
            for (int a = 0; a < m; ++a) pts.push_back(y[a] + n[std::size_t(a)] * g.h(a));
        int a = 0;
        while (a < m && ++n[std::size_t(a)] > hi[std::size_t(a)]) {
            n[std::size_t(a)] = lo[std::size_t(a)];
            ++a;
        }
        if (a == m) break;
    }
    return pts;
}

}  // namespace

// ---------------------------------------------------------------------------------
std::shared_ptr<const OperatorContext> OperatorContext::make(std::shared_ptr<const disc::DomainGrid> grid, int k,
                                                             const ContextOptions& opt) {
    if (!grid) throw std::invalid_argument("context: null grid");
    auto c = std::make_shared<OperatorContext>();
    c->m = grid->m();
    c->k = k;
    c->kp = kernels::KernelParams::make(c->m, k);
    c->grid = grid;
    c->rule = disc::make_sphere_rule(c->m, opt.sphere_degree >= 0 ? opt.sphere_degree : 2 * k + 4);
    c->local_rule = disc::make_sphere_rule(c->m, std::max(opt.local_degree, 2 * k + 4));
    c->policy = opt.policy;
    if (!(c->policy.rho_cell >= 0)) throw std::invalid_argument("context: rho_cell >= 0");
    c->fd_step = opt.fd_step > 0 ? opt.fd_step : 0.5 * grid->hmin();
    c->threads = std::max(1, opt.threads);

    auto tab = poly::MonomialTable::get(c->m, k);
    c->dim = 1 << (c->m - 1);
    c->nmono = tab->size();
    c->len = c->nmono * c->dim;

    c->basis_plus = poly::build_basis(c->m, k, +1);
    c->basis_minus = poly::build_basis(c->m, k, -1);
    c->proj_plus = formula_projector(c->m, k, +1);
    c->proj_minus = formula_projector(c->m, k, -1);

    const Eigen::MatrixXd gm = poly::monomial_gram(c->m, k);
    c->gram = Eigen::MatrixXd::Zero(c->len, c->len);
    for (int i = 0; i < c->nmono; ++i)
        for (int j = 0; j < c->nmono; ++j)
            for (int a = 0; a < c->dim; ++a) c->gram(i * c->dim + a, j * c->dim + a) = gm(i, j);
    c->coords_plus = c->basis_plus.coord_matrix().transpose() * c->gram;

    c->exps.resize(static_cast<std::size_t>(c->nmono * c->m));
    for (int a = 0; a < c->nmono; ++a)
        for (int i = 0; i < c->m; ++i) c->exps[std::size_t(a * c->m + i)] = tab->exponent(a)[std::size_t(i)];

    const auto& alg = clifford::Algebra::get(c->m);
    c->gen_sign.assign(static_cast<std::size_t>(c->m * c->dim), 1);
    for (int i = 1; i < c->m; ++i)
        for (int A = 0; A < c->dim; ++A) c->gen_sign[std::size_t(i * c->dim + A)] = int8_t(alg.sign(1u << (i - 1), uint32_t(A)));

    // unisolvent points: column-pivoted QR on the Vandermonde of a sphere rule
    disc::SphereRule cand = disc::make_sphere_rule(c->m, 2 * k + 6);
    Eigen::MatrixXd Vt(c->nmono, cand.size());
    for (int q = 0; q < cand.size(); ++q)
        for (int a = 0; a < c->nmono; ++a) {
            double s = 1;
            for (int i = 0; i < c->m; ++i) s *= std::pow(cand.node(q, i), c->exps[std::size_t(a * c->m + i)]);
            Vt(a, q) = s;
        }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Vt);
    if (qr.rank() < c->nmono) throw std::runtime_error("context: no unisolvent sphere point set");
    Eigen::MatrixXd V(c->nmono, c->nmono);
    c->probe_u.resize(static_cast<std::size_t>(c->nmono * c->m));
    for (int p = 0; p < c->nmono; ++p) {
        const int q = qr.colsPermutation().indices()(p);
        for (int i = 0; i < c->m; ++i) c->probe_u[std::size_t(p * c->m + i)] = cand.node(q, i);
        V.row(p) = Vt.col(q).transpose();
    }
    c->vinv = V.inverse();
    return c;
}

// ---------------------------------------------------------------------------------
double inner_real(const GridField& a, const GridField& b, const Ctx& ctx) {
    check_ctx_field(*ctx, a);
    check_ctx_field(*ctx, b);
    double s = 0;
    for (int n = 0; n < a.num_nodes(); ++n) {
        Eigen::Map<const Eigen::VectorXd> x(a.at(n), a.len), y(b.at(n), b.len);
        s += x.dot(ctx->gram * y);
    }
    return s * ctx->grid->cell_volume();
}

double norm(const GridField& a, const Ctx& ctx) { return std::sqrt(std::max(0.0, inner_real(a, a, ctx))); }

Multivector<double> l2_inner(const GridField& f, const GridField& g, const Ctx& ctx) {
    check_ctx_field(*ctx, f);
    check_ctx_field(*ctx, g);
    const auto& C = *ctx;
    const Eigen::MatrixXd gm = poly::monomial_gram(C.m, C.k);
    Multivector<double> s(C.m);
    for (int n = 0; n < f.num_nodes(); ++n) {
        const HomPoly<double> p = f.poly(n), q = g.poly(n);
        for (int a = 0; a < C.nmono; ++a) {
            const Multivector<double> ca = clifford::conjugate(p.coeff(a));
            for (int b = 0; b < C.nmono; ++b)
                if (gm(a, b) != 0) s += (ca * q.coeff(b)) * gm(a, b);
        }
    }
    return s * C.grid->cell_volume();
}

GridField project_field(const GridField& f, int chirality, const Ctx& ctx) {
    check_ctx_field(*ctx, f);
    return project_raw(f, chirality > 0 ? ctx->proj_plus : ctx->proj_minus, chirality > 0 ? 1 : -1);
}

double chirality_leak(const GridField& f, int chirality) {
    double leak = 0, scale = 0;
    for (int n = 0; n < f.num_nodes(); ++n) {
        HomPoly<double> p = f.poly(n);
        scale = std::max(scale, p.max_abs());
        if (f.k == 0) continue;
        leak = std::max(leak, (chirality > 0 ? poly::cr_bar(p) : poly::cr(p)).max_abs());
    }
    return scale > 0 ? leak / scale : leak;
}

HomPoly<double> flip_u0(const HomPoly<double>& p) {
    HomPoly<double> r = p;
    for (int a = 0; a < p.nmono(); ++a)
        if (p.table().exponent(a)[0] % 2)
            for (int A = 0; A < p.dim(); ++A) r.coeffs()[std::size_t(a * p.dim() + A)] *= -1;
    return r;
}

GridField flip_u0(const GridField& f) {
    GridField r = f;
    r.chirality = -f.chirality;
    for (int n = 0; n < f.num_nodes(); ++n) r.set(n, flip_u0(f.poly(n)));
    return r;
}

AnalyticField flip_u0(const AnalyticField& f) {
    AnalyticField r;
    r.m = f.m;
    r.k = f.k;
    r.chirality = -f.chirality;
    auto v = f.value;
    r.value = [v](const Paravector<double>& x) { return flip_u0(v(x)); };
    if (f.deriv) {
        auto d = f.deriv;
        r.deriv = [d](const Paravector<double>& x, int i) { return flip_u0(d(x, i)); };
    }
    return r;
}

// ---------------------------------------------------------------------------------
namespace {

GridField apply_R_impl(const GridField& g, const Ctx& ctx, bool dagger) {
    check_ctx_field(*ctx, g);
    require_chirality(g, kFieldChirality, dagger ? "apply_Rk_dagger" : "apply_Rk");
    const auto& C = *ctx;
    GridField acc(g.grid, g.k, 0);
    for (int i = 0; i < C.m; ++i) {
        GridField d = disc::field_derivative(g, i);
        const double s = (i > 0 && dagger) ? -1.0 : 1.0;
        for (int n = 0; n < g.num_nodes(); ++n)
            for (int a = 0; a < C.nmono; ++a) left_gen(C, i, d.at(n) + a * C.dim, acc.at(n) + a * C.dim, s);
    }
    return project_raw(acc, C.proj_plus, kSourceChirality);
}

AnalyticField apply_R_impl(const AnalyticField& g, const Ctx& ctx, bool dagger) {
    if (!g.deriv) throw std::invalid_argument("apply_Rk: analytic field needs a derivative callback");
    if (g.chirality > 0) throw std::invalid_argument("apply_Rk: chirality mismatch (expected M^-)");
    if (g.m != ctx->m || g.k != ctx->k) throw std::invalid_argument("apply_Rk: degree/dimension mismatch");
    AnalyticField r;
    r.m = g.m;
    r.k = g.k;
    r.chirality = kSourceChirality;
    auto d = g.deriv;
    auto c = ctx;
    r.value = [d, c, dagger](const Paravector<double>& x) {
        HomPoly<double> s(c->m, c->k);
        for (int i = 0; i < c->m; ++i) {
            HomPoly<double> di = d(x, i);
            HomPoly<double> t = di.left_e(i);
            if (dagger && i > 0) s -= t;
            else s += t;
        }
        return apply_matrix(c->proj_plus, s);
    };
    return r;
}

}  // namespace

GridField apply_Rk(const GridField& g, const Ctx& ctx) { return apply_R_impl(g, ctx, false); }
GridField apply_Rk_dagger(const GridField& g, const Ctx& ctx) { return apply_R_impl(g, ctx, true); }
AnalyticField apply_Rk(const AnalyticField& g, const Ctx& ctx) { return apply_R_impl(g, ctx, false); }
AnalyticField apply_Rk_dagger(const AnalyticField& g, const Ctx& ctx) { return apply_R_impl(g, ctx, true); }

// ---------------------------------------------------------------------------------
GridField teodorescu(const GridField& f, const Ctx& ctx, bool dagger) {
    check_ctx_field(*ctx, f);
    require_chirality(f, kSourceChirality, dagger ? "teodorescu_dagger" : "teodorescu");
    const auto& C = *ctx;
    const int nn = f.num_nodes();
    (void)nn;
    EngineSpec sp{!dagger, !dagger, -1.0 / C.kp.c_mk, C.punct_radius()};
    GridField out(f.grid, f.k, kFieldChirality);
    const Lattice L = node_lattice(*C.grid);
    lattice_engine(C, sp, C.grid->cell_volume(), L, L, f.data.data(), out.data.data());
    return out;
}

GridField teodorescu_adjoint(const GridField& g, const Ctx& ctx, bool dagger) {
    check_ctx_field(*ctx, g);
    const auto& C = *ctx;
    EngineSpec sp{dagger, !dagger, 1.0 / C.kp.c_mk, C.punct_radius()};
    GridField out(g.grid, g.k, 0);
    const Lattice L = node_lattice(*C.grid);
    lattice_engine(C, sp, C.grid->cell_volume(), L, L, g.data.data(), out.data.data());
    return out;
}

std::vector<HomPoly<double>> teodorescu_boundary(const GridField& f, const Ctx& ctx, bool dagger) {
    check_ctx_field(*ctx, f);
    require_chirality(f, kSourceChirality, dagger ? "teodorescu_dagger" : "teodorescu");
    const auto& C = *ctx;
    EngineSpec sp{!dagger, !dagger, -1.0 / C.kp.c_mk, 0.0};
    const Lattice S = node_lattice(*C.grid);
    std::vector<double> out(C.grid->faces().size() * std::size_t(C.len), 0.0);
    std::size_t off = 0;
    for (int axis = 0; axis < C.m; ++axis)
        for (int side = 0; side < 2; ++side) {
            const Lattice T = face_lattice(*C.grid, axis, side);
            lattice_engine(C, sp, C.grid->cell_volume(), T, S, f.data.data(), out.data() + off * std::size_t(C.len));
            off += std::size_t(T.size());
        }
    std::vector<HomPoly<double>> r;
    for (std::size_t t = 0; t < off; ++t) r.push_back(poly_from(C, &out[t * std::size_t(C.len)]));
    return r;
}

std::vector<HomPoly<double>> teodorescu(const GridField& f, const std::vector<Paravector<double>>& ys, const Ctx& ctx,
                                        bool dagger) {
    check_ctx_field(*ctx, f);
    require_chirality(f, kSourceChirality, dagger ? "teodorescu_dagger" : "teodorescu");
    const auto& C = *ctx;
    std::vector<double> tg;
    for (const auto& y : ys) {
        if (y.m() != C.m) throw std::invalid_argument("teodorescu: point dimension mismatch");
        if (!C.grid->contains(y.comps().data())) throw std::invalid_argument("teodorescu: point outside the domain");
        tg.insert(tg.end(), y.comps().begin(), y.comps().end());
    }
    const int nn = f.num_nodes();
    EngineSpec sp{!dagger, !dagger, -1.0 / C.kp.c_mk, C.punct_radius()};
    std::vector<double> out(ys.size() * std::size_t(C.len));
    const auto w = uniform_weights(nn, C.grid->cell_volume());
    std::vector<double> ext;
    for (int n = 0; n < nn; ++n)
        for (int a = 0; a < C.m; ++a) ext.push_back(C.grid->h(a));
    engine(C, sp, tg.data(), int(ys.size()), C.grid->nodes_flat().data(), w.data(), nn, f.data.data(), out.data(),
           ext.data());
    std::vector<HomPoly<double>> r;
    for (std::size_t t = 0; t < ys.size(); ++t) r.push_back(poly_from(C, &out[t * std::size_t(C.len)]));
    return r;
}

HomPoly<double> teodorescu(const GridField& f, const Paravector<double>& y, const Ctx& ctx, bool dagger) {
    return teodorescu(f, std::vector<Paravector<double>>{y}, ctx, dagger)[0];
}

std::vector<HomPoly<double>> boundary_values(const std::function<HomPoly<double>(const Paravector<double>&)>& g,
                                             const Ctx& ctx) {
    std::vector<HomPoly<double>> r;
    for (const auto& f : ctx->grid->faces()) r.push_back(g(Paravector<double>(f.center)));
    return r;
}

std::vector<HomPoly<double>> boundary_values(const AnalyticField& g, const Ctx& ctx) {
    if (g.chirality > 0) throw std::invalid_argument("cauchy_bitsadze: chirality mismatch (expected M^-)");
    return boundary_values(g.value, ctx);
}

namespace {

std::vector<double> face_coeffs(const std::vector<HomPoly<double>>& fv, const OperatorContext& C, bool dagger) {
    const auto& faces = C.grid->faces();
    if (fv.size() != faces.size()) throw std::invalid_argument("cauchy_bitsadze: one value per boundary face");
    std::vector<double> coef(faces.size() * std::size_t(C.len));
    std::vector<double> tmp(static_cast<std::size_t>(C.len));
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& p = fv[f];
        if (p.m() != C.m || p.k() != C.k) throw std::invalid_argument("cauchy_bitsadze: degree/dimension mismatch");
        std::fill(tmp.begin(), tmp.end(), 0.0);
        const int ax = faces[f].axis;
        const double s = faces[f].sign * ((dagger && ax > 0) ? -1.0 : 1.0);
        for (int a = 0; a < C.nmono; ++a) left_gen(C, ax, &p.coeffs()[std::size_t(a * C.dim)], &tmp[std::size_t(a * C.dim)], s);
        Eigen::Map<Eigen::VectorXd>(&coef[f * std::size_t(C.len)], C.len) =
            C.proj_plus * Eigen::Map<const Eigen::VectorXd>(tmp.data(), C.len);
    }
    return coef;
}

std::vector<double> face_points(const OperatorContext& C, std::vector<double>& w) {
    std::vector<double> pts;
    w.clear();
    for (const auto& f : C.grid->faces()) {
        pts.insert(pts.end(), f.center.begin(), f.center.end());
        w.push_back(f.area);
    }
    return pts;
}

}  // namespace

std::vector<HomPoly<double>> cauchy_bitsadze(const std::vector<HomPoly<double>>& fv,
                                             const std::vector<Paravector<double>>& ys, const Ctx& ctx, bool dagger) {
    const auto& C = *ctx;
    const auto coef = face_coeffs(fv, C, dagger);
    std::vector<double> w;
    const auto src = face_points(C, w);
    double hmax = 0;
    for (int a = 0; a < C.m; ++a) hmax = std::max(hmax, C.grid->h(a));
    std::vector<double> tg;
    for (const auto& y : ys) {
        if (!C.grid->contains(y.comps().data())) throw std::invalid_argument("cauchy_bitsadze: point outside the domain");
        if (C.grid->distance_to_boundary(y.comps().data()) <= hmax)
            throw std::invalid_argument("cauchy_bitsadze: point within one cell of the boundary");
        tg.insert(tg.end(), y.comps().begin(), y.comps().end());
    }
    EngineSpec sp{!dagger, !dagger, 1.0 / C.kp.c_mk, 0.0};
    std::vector<double> out(ys.size() * std::size_t(C.len)), ext;
    for (const auto& f : C.grid->faces())
        for (int a = 0; a < C.m; ++a) ext.push_back(a == f.axis ? 0.0 : C.grid->h(a));
    engine(C, sp, tg.data(), int(ys.size()), src.data(), w.data(), int(w.size()), coef.data(), out.data(), ext.data());
    std::vector<HomPoly<double>> r;
    for (std::size_t t = 0; t < ys.size(); ++t) r.push_back(poly_from(C, &out[t * std::size_t(C.len)]));
    return r;
}

GridField cauchy_bitsadze(const std::vector<HomPoly<double>>& fv, const Ctx& ctx, bool dagger) {
    const auto& C = *ctx;
    const auto coef = face_coeffs(fv, C, dagger);
    EngineSpec sp{!dagger, !dagger, 1.0 / C.kp.c_mk, 0.0};
    GridField out(C.grid, C.k, kFieldChirality);
    const Lattice T = node_lattice(*C.grid);
    const auto& faces = C.grid->faces();
    std::size_t off = 0;
    for (int axis = 0; axis < C.m; ++axis)
        for (int side = 0; side < 2; ++side) {
            const Lattice S = face_lattice(*C.grid, axis, side);
            lattice_engine(C, sp, faces[off].area, T, S, coef.data() + off * std::size_t(C.len), out.data.data());
            off += std::size_t(S.size());
        }
    return out;
}

// ---------------------------------------------------------------------------------
GridField pi_apply(const GridField& f, const Ctx& ctx) { return apply_Rk_dagger(teodorescu(f, ctx, false), ctx); }
GridField pi_dagger_apply(const GridField& f, const Ctx& ctx) { return apply_Rk(teodorescu(f, ctx, true), ctx); }

HomPoly<double> pi_local_term(const HomPoly<double>& f, const Ctx& ctx, bool dagger) {
    const auto& C = *ctx;
    if (f.m() != C.m || f.k() != C.k) throw std::invalid_argument("pi_local_term: degree/dimension mismatch");
    MonoEval me(C);
    std::vector<double> acc(static_cast<std::size_t>(C.len), 0.0), out(static_cast<std::size_t>(C.len));
    for (int t = 0; t < C.local_rule.size(); ++t)
        accumulate_local(C, me, C.local_rule.nodes[std::size_t(t)].comps().data(), f.coeffs().data(), dagger,
                         C.local_rule.weights[std::size_t(t)] / C.kp.c_mk, acc.data());
    values_to_coeffs(C, acc.data(), out.data());
    return poly_from(C, out.data());
}

HomPoly<double> pi_compose(const GridField& f, int node, const Ctx& ctx, bool dagger) {
    check_ctx_field(*ctx, f);
    const auto& C = *ctx;
    const auto& g = *C.grid;
    auto mi = g.multi_index(node);
    std::vector<Paravector<double>> ys;
    for (int i = 0; i < C.m; ++i) {
        if (mi[std::size_t(i)] < 1 || mi[std::size_t(i)] > g.N() - 2)
            throw std::invalid_argument("pi_compose: node needs interior neighbours");
        for (int s : {1, -1}) {
            auto n2 = mi;
            n2[std::size_t(i)] += s;
            ys.push_back(g.node_point(g.index(n2)));
        }
    }
    auto T = teodorescu(f, ys, ctx, dagger);
    HomPoly<double> acc(C.m, C.k);
    for (int i = 0; i < C.m; ++i) {
        HomPoly<double> d = (T[std::size_t(2 * i)] - T[std::size_t(2 * i + 1)]) * (0.5 / g.h(i));
        HomPoly<double> t = d.left_e(i);
        if (!dagger && i > 0) acc -= t;
        else acc += t;
    }
    return apply_matrix(C.proj_plus, acc);
}

HomPoly<double> pi_integral(const GridField& f, int node, const Ctx& ctx, bool dagger) {
    check_ctx_field(*ctx, f);
    require_chirality(f, kSourceChirality, "pi_integral");
    const auto& C = *ctx;
    const auto& g = *C.grid;
    const double* y = g.node(node);
    const double* fy = f.at(node);
    MonoEval me(C);
    std::vector<double> acc(static_cast<std::size_t>(C.len), 0.0), diff(static_cast<std::size_t>(C.len)), w(static_cast<std::size_t>(C.m));
    const double vol = g.cell_volume();
    for (int n = 0; n < g.num_nodes(); ++n) {
        if (n == node) continue;
        const double* x = g.node(n);
        for (int i = 0; i < C.m; ++i) w[std::size_t(i)] = x[i] - y[i];
        const double* fx = f.at(n);
        for (int c = 0; c < C.len; ++c) diff[std::size_t(c)] = fx[c] - fy[c];
        accumulate_dK(C, me, w.data(), diff.data(), dagger, vol, acc.data());
    }
    for (int t = 0; t < C.local_rule.size(); ++t) {
        const auto& th = C.local_rule.nodes[std::size_t(t)];
        const double lr = std::log(ray_to_box(g, y, th));
        accumulate_dK(C, me, th.comps().data(), fy, dagger, C.local_rule.weights[std::size_t(t)] * lr, acc.data());
        accumulate_local(C, me, th.comps().data(), fy, dagger, C.local_rule.weights[std::size_t(t)], acc.data());
    }
    std::vector<double> out(static_cast<std::size_t>(C.len));
    values_to_coeffs(C, acc.data(), out.data());
    return apply_matrix(C.proj_plus, poly_from(C, out.data()) * (1.0 / C.kp.c_mk));
}

HomPoly<double> pi_compose(const AnalyticField& f, const Paravector<double>& y, const Ctx& ctx, bool dagger) {
    const auto& C = *ctx;
    if (f.m != C.m || f.k != C.k) throw std::invalid_argument("pi_compose: degree/dimension mismatch");
    if (f.chirality < 0) throw std::invalid_argument("pi_compose: chirality mismatch (expected M^+)");
    const auto& g = *C.grid;
    const double s = C.fd_step;
    if (g.distance_to_boundary(y.comps().data()) <= s) throw std::invalid_argument("pi_compose: point too close to the boundary");
    EngineSpec sp{!dagger, !dagger, -1.0 / C.kp.c_mk, 0.0};
    HomPoly<double> acc(C.m, C.k);
    for (int i = 0; i < C.m; ++i) {
        HomPoly<double> d(C.m, C.k);
        for (int sg : {1, -1}) {
            Paravector<double> z = y;
            z[i] += sg * s;
            auto pts = anchored_lattice(g, z.comps().data());
            const int ns = int(pts.size()) / C.m;
            std::vector<double> coef(static_cast<std::size_t>(ns) * C.len);
            for (int p = 0; p < ns; ++p) {
                auto v = f.value(Paravector<double>(std::vector<double>(&pts[std::size_t(p * C.m)], &pts[std::size_t(p * C.m)] + C.m)));
                std::copy(v.coeffs().begin(), v.coeffs().end(), &coef[std::size_t(p) * C.len]);
            }
            const auto w = uniform_weights(ns, g.cell_volume());
            std::vector<double> out(static_cast<std::size_t>(C.len));
            engine(C, sp, z.comps().data(), 1, pts.data(), w.data(), ns, coef.data(), out.data());
            d += poly_from(C, out.data()) * (sg / (2 * s));
        }
        HomPoly<double> t = d.left_e(i);
        if (!dagger && i > 0) acc -= t;
        else acc += t;
    }
    return apply_matrix(C.proj_plus, acc);
}

HomPoly<double> pi_integral(const AnalyticField& f, const Paravector<double>& y, const Ctx& ctx, bool dagger) {
    const auto& C = *ctx;
    if (f.m != C.m || f.k != C.k) throw std::invalid_argument("pi_integral: degree/dimension mismatch");
    if (f.chirality < 0) throw std::invalid_argument("pi_integral: chirality mismatch (expected M^+)");
    const auto& g = *C.grid;
    const double rho = 0.9 * g.distance_to_boundary(y.comps().data());
    if (!(rho > 2 * g.hmin())) throw std::invalid_argument("pi_integral: point too close to the boundary");
    const HomPoly<double> fy = f.value(y);
    MonoEval me(C);
    std::vector<double> acc(static_cast<std::size_t>(C.len), 0.0), diff(static_cast<std::size_t>(C.len)), w(static_cast<std::size_t>(C.m));
    auto pts = anchored_lattice(g, y.comps().data());
    const int ns = int(pts.size()) / C.m;
    const double vol = g.cell_volume();
    for (int p = 0; p < ns; ++p) {
        double r2 = 0;
        for (int i = 0; i < C.m; ++i) {
            w[std::size_t(i)] = pts[std::size_t(p * C.m + i)] - y[i];
            r2 += w[std::size_t(i)] * w[std::size_t(i)];
        }
        const double psi = cutoff(std::sqrt(r2), rho);
        auto fx = f.value(Paravector<double>(std::vector<double>(&pts[std::size_t(p * C.m)], &pts[std::size_t(p * C.m)] + C.m)));
        bool any = psi != 0;
        for (int c = 0; c < C.len; ++c) {
            diff[std::size_t(c)] = fx.coeffs()[std::size_t(c)] - psi * fy.coeffs()[std::size_t(c)];
            any = any || diff[std::size_t(c)] != 0;
        }
        if (any) accumulate_dK(C, me, w.data(), diff.data(), dagger, vol, acc.data());
    }
    for (int t = 0; t < C.local_rule.size(); ++t)
        accumulate_local(C, me, C.local_rule.nodes[std::size_t(t)].comps().data(), fy.coeffs().data(), dagger,
                         C.local_rule.weights[std::size_t(t)], acc.data());
    std::vector<double> out(static_cast<std::size_t>(C.len));
    values_to_coeffs(C, acc.data(), out.data());
    return apply_matrix(C.proj_plus, poly_from(C, out.data()) * (1.0 / C.kp.c_mk));
}

// ---------------------------------------------------------------------------------
PowerIteration pi_norm_emp(const Ctx& ctx, int steps, uint64_t seed) {
    const auto& C = *ctx;
    const Eigen::MatrixXd B = C.basis_plus.coord_matrix();
    const int r = int(B.cols()), nn = C.grid->num_nodes();
    const double vol = C.grid->cell_volume();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd v(r, nn);
    for (int n = 0; n < nn; ++n)
        for (int i = 0; i < r; ++i) v(i, n) = nd(rng);
    auto vnorm = [&](const Eigen::MatrixXd& z) { return std::sqrt(vol * z.squaredNorm()); };
    v /= vnorm(v);

    auto to_field = [&](const Eigen::MatrixXd& z, int chir) {
        GridField f(C.grid, C.k, chir);
        for (int n = 0; n < nn; ++n) Eigen::Map<Eigen::VectorXd>(f.at(n), C.len) = B * z.col(n);
        return f;
    };
    auto to_coords = [&](const GridField& f) {
        Eigen::MatrixXd z(r, nn);
        for (int n = 0; n < nn; ++n) z.col(n) = C.coords_plus * Eigen::Map<const Eigen::VectorXd>(f.at(n), C.len);
        return z;
    };

    PowerIteration res;
    for (int it = 0; it < steps; ++it) {
        Eigen::MatrixXd z = to_coords(pi_apply(to_field(v, kSourceChirality), ctx));
        // transpose of Σ_i ē_i D_i is Σ_i D_i^T e_i
        GridField q = to_field(z, 0);
        GridField s(C.grid, C.k, 0);
        for (int i = 0; i < C.m; ++i) {
            GridField e(C.grid, C.k, 0);
            for (int n = 0; n < nn; ++n)
                for (int a = 0; a < C.nmono; ++a) left_gen(C, i, q.at(n) + a * C.dim, e.at(n) + a * C.dim, 1.0);
            s += disc::field_derivative_transpose(e, i);
        }
        Eigen::MatrixXd v2 = to_coords(teodorescu_adjoint(s, ctx, false));
        const double lam = vnorm(v2);
        res.history.push_back(std::sqrt(lam));
        if (lam == 0) break;
        v = v2 / lam;
    }
    res.norm = res.history.empty() ? 0 : res.history.back();
    return res;
}

}  // namespace hsca::ops
