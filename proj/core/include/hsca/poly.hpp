#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsca/clifford.hpp"

namespace hsca::poly {

using clifford::Algebra;
using clifford::Multivector;
using clifford::Paravector;

using Exponent = std::vector<int>;

// All multi-indices |α| = k in m variables, graded lexicographic (u_0 first).
class MonomialTable {
public:
    MonomialTable(int m, int k);

    int m() const { return m_; }
    int k() const { return k_; }
    int size() const { return int(exps_.size()); }
    const Exponent& exponent(int i) const { return exps_[std::size_t(i)]; }
    int index(const Exponent& a) const;  // -1 when absent

    static std::shared_ptr<const MonomialTable> get(int m, int k);

private:
    int m_, k_;
    std::vector<Exponent> exps_;
    std::map<Exponent, int> lookup_;
};

template <class S = double>
class HomPoly {
public:
    HomPoly() = default;
    HomPoly(int m, int k) : table_(MonomialTable::get(m, k)), dim_(1 << (m - 1)) {
        if (k < 0) throw std::invalid_argument("poly: negative degree");
        c_.assign(std::size_t(table_->size()) * dim_, S(0));
    }

    static HomPoly monomial(const Exponent& a, const Multivector<S>& coeff) {
        int k = 0;
        for (int v : a) k += v;
        HomPoly p(coeff.m(), k);
        p.set(p.table_->index(a), coeff);
        return p;
    }
    // single variable u_j times a Clifford constant
    static HomPoly linear(int m, int j, const Multivector<S>& coeff) {
        Exponent a(std::size_t(m), 0);
        a[std::size_t(j)] = 1;
        return monomial(a, coeff);
    }
    static HomPoly constant(const Multivector<S>& coeff) { return monomial(Exponent(std::size_t(coeff.m()), 0), coeff); }

    int m() const { return table_->m(); }
    int k() const { return table_->k(); }
    int dim() const { return dim_; }
    int nmono() const { return table_->size(); }
    const MonomialTable& table() const { return *table_; }
    const std::vector<S>& coeffs() const { return c_; }
    std::vector<S>& coeffs() { return c_; }

    Multivector<S> coeff(int i) const {
        Multivector<S> r(m());
        for (int a = 0; a < dim_; ++a) r[uint32_t(a)] = c_[std::size_t(i) * dim_ + a];
        return r;
    }
    Multivector<S> coeff(const Exponent& a) const {
        int i = table_->index(a);
        return i < 0 ? Multivector<S>(m()) : coeff(i);
    }
    void set(int i, const Multivector<S>& v) {
        for (int a = 0; a < dim_; ++a) c_[std::size_t(i) * dim_ + a] = v[uint32_t(a)];
    }

    void same(const HomPoly& o) const {
        if (m() != o.m() || k() != o.k()) throw std::invalid_argument("poly: shape mismatch");
    }
    HomPoly& operator+=(const HomPoly& o) {
        same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    HomPoly& operator-=(const HomPoly& o) {
        same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    HomPoly& operator*=(const S& s) {
        for (auto& x : c_) x *= s;
        return *this;
    }
    friend HomPoly operator+(HomPoly a, const HomPoly& b) { return a += b; }
    friend HomPoly operator-(HomPoly a, const HomPoly& b) { return a -= b; }
    friend HomPoly operator*(HomPoly a, const S& s) { return a *= s; }
    friend HomPoly operator*(const S& s, HomPoly a) { return a *= s; }
    friend bool operator==(const HomPoly& a, const HomPoly& b) { return a.m() == b.m() && a.k() == b.k() && a.c_ == b.c_; }

    // c·p and p·c coefficientwise
    HomPoly left_mul(const Multivector<S>& c) const {
        const Algebra& alg = Algebra::get(m());
        HomPoly r(m(), k());
        for (int i = 0; i < nmono(); ++i)
            for (int a = 0; a < dim_; ++a) {
                if (c[uint32_t(a)] == S(0)) continue;
                for (int b = 0; b < dim_; ++b) {
                    const S& v = c_[std::size_t(i) * dim_ + b];
                    if (v == S(0)) continue;
                    S t = c[uint32_t(a)] * v;
                    auto& dst = r.c_[std::size_t(i) * dim_ + (a ^ b)];
                    if (alg.sign(uint32_t(a), uint32_t(b)) > 0) dst += t; else dst -= t;
                }
            }
        return r;
    }
    HomPoly right_mul(const Multivector<S>& c) const {
        const Algebra& alg = Algebra::get(m());
        HomPoly r(m(), k());
        for (int i = 0; i < nmono(); ++i)
            for (int b = 0; b < dim_; ++b) {
                const S& v = c_[std::size_t(i) * dim_ + b];
                if (v == S(0)) continue;
                for (int a = 0; a < dim_; ++a) {
                    if (c[uint32_t(a)] == S(0)) continue;
                    S t = v * c[uint32_t(a)];
                    auto& dst = r.c_[std::size_t(i) * dim_ + (a ^ b)];
                    if (alg.sign(uint32_t(b), uint32_t(a)) > 0) dst += t; else dst -= t;
                }
            }
        return r;
    }
    // e_j p for generator j >= 1 (j = 0 is the identity)
    HomPoly left_e(int j) const {
        if (j == 0) return *this;
        const Algebra& alg = Algebra::get(m());
        const uint32_t ej = 1u << (j - 1);
        HomPoly r(m(), k());
        for (int i = 0; i < nmono(); ++i)
            for (int b = 0; b < dim_; ++b) {
                const S& v = c_[std::size_t(i) * dim_ + b];
                auto& dst = r.c_[std::size_t(i) * dim_ + (ej ^ uint32_t(b))];
                if (alg.sign(ej, uint32_t(b)) > 0) dst = v; else dst = -v;
            }
        return r;
    }

    // ∂/∂u_j; degree 0 maps to the zero polynomial of degree 0
    HomPoly d(int j) const {
        if (k() == 0) return HomPoly(m(), 0);
        HomPoly r(m(), k() - 1);
        for (int i = 0; i < nmono(); ++i) {
            Exponent a = table_->exponent(i);
            if (a[std::size_t(j)] == 0) continue;
            S f(a[std::size_t(j)]);
            a[std::size_t(j)] -= 1;
            int t = r.table_->index(a);
            for (int b = 0; b < dim_; ++b) r.c_[std::size_t(t) * dim_ + b] += f * c_[std::size_t(i) * dim_ + b];
        }
        return r;
    }
    // u_j p (degree + 1)
    HomPoly times_var(int j) const {
        HomPoly r(m(), k() + 1);
        for (int i = 0; i < nmono(); ++i) {
            Exponent a = table_->exponent(i);
            a[std::size_t(j)] += 1;
            int t = r.table_->index(a);
            for (int b = 0; b < dim_; ++b) r.c_[std::size_t(t) * dim_ + b] += c_[std::size_t(i) * dim_ + b];
        }
        return r;
    }

    Multivector<S> eval(const Paravector<S>& u) const {
        if (u.m() != m()) throw std::invalid_argument("poly: eval dimension mismatch");
        Multivector<S> r(m());
        for (int i = 0; i < nmono(); ++i) {
            const Exponent& a = table_->exponent(i);
            S w(1);
            for (int j = 0; j < m(); ++j)
                for (int p = 0; p < a[std::size_t(j)]; ++p) w *= u[j];
            if (w == S(0)) continue;
            for (int b = 0; b < dim_; ++b) r[uint32_t(b)] += w * c_[std::size_t(i) * dim_ + b];
        }
        return r;
    }

    double max_abs() const {
        double s = 0;
        for (const auto& x : c_) s = std::max(s, std::abs(to_double(x)));
        return s;
    }
    bool is_zero() const {
        for (const auto& x : c_)
            if (x != S(0)) return false;
        return true;
    }

    template <class T>
    HomPoly<T> cast() const {
        HomPoly<T> r(m(), k());
        for (std::size_t i = 0; i < c_.size(); ++i) r.coeffs()[i] = T(c_[i]);
        return r;
    }

private:
    std::shared_ptr<const MonomialTable> table_;
    int dim_ = 0;
    std::vector<S> c_;
};

// ∂̄_u = ∂_{u_0} + Σ e_j ∂_{u_j};  ∂_u = ∂_{u_0} - Σ e_j ∂_{u_j}
template <class S>
HomPoly<S> cr_bar(const HomPoly<S>& p) {
    HomPoly<S> r = p.d(0);
    for (int j = 1; j < p.m(); ++j) r += p.d(j).left_e(j);
    return r;
}
template <class S>
HomPoly<S> cr(const HomPoly<S>& p) {
    HomPoly<S> r = p.d(0);
    for (int j = 1; j < p.m(); ++j) r -= p.d(j).left_e(j);
    return r;
}

template <class S>
HomPoly<S> euler(const HomPoly<S>& p) {
    HomPoly<S> r(p.m(), p.k());
    for (int j = 0; j < p.m(); ++j)
        if (p.k() > 0) r += p.d(j).times_var(j);
    return r;
}

template <class S>
HomPoly<S> laplacian(const HomPoly<S>& p) {
    if (p.k() < 2) return HomPoly<S>(p.m(), std::max(0, p.k() - 2));
    HomPoly<S> r(p.m(), p.k() - 2);
    for (int j = 0; j < p.m(); ++j) r += p.d(j).d(j);
    return r;
}

// u·p (sign = +1) or ū·p (sign = -1), left multiplication
template <class S>
HomPoly<S> mul_u(const HomPoly<S>& p, int sign) {
    HomPoly<S> r = p.times_var(0);
    for (int j = 1; j < p.m(); ++j) {
        if (sign > 0) r += p.left_e(j).times_var(j);
        else r -= p.left_e(j).times_var(j);
    }
    return r;
}

template <class S>
HomPoly<S> mul_norm2(const HomPoly<S>& p) {
    HomPoly<S> r(p.m(), p.k() + 2);
    for (int j = 0; j < p.m(); ++j) r += p.times_var(j).times_var(j);
    return r;
}

template <class S>
bool is_harmonic(const HomPoly<S>& h, double tol = 1e-12) {
    HomPoly<S> l = laplacian(h);
    if constexpr (std::is_same_v<S, double>) return l.max_abs() <= tol * std::max(1.0, h.max_abs());
    else return l.is_zero();
}

template <class S>
void require_harmonic(const HomPoly<S>& h) {
    if (!is_harmonic(h)) throw std::invalid_argument("poly: input is not harmonic");
}

// P_k^+ h = h - ū ∂̄h/(m+2k-2)
template <class S>
HomPoly<S> proj_plus(const HomPoly<S>& h) {
    require_harmonic(h);
    if (h.k() == 0) return h;
    S den(h.m() + 2 * h.k() - 2);
    return h - mul_u(cr_bar(h), -1) * (S(1) / den);
}
// P_k^- h = h - u ∂h/(m+2k-2)
template <class S>
HomPoly<S> proj_minus(const HomPoly<S>& h) {
    require_harmonic(h);
    if (h.k() == 0) return h;
    S den(h.m() + 2 * h.k() - 2);
    return h - mul_u(cr(h), +1) * (S(1) / den);
}

template <class S>
HomPoly<S> project(const HomPoly<S>& h, int chirality) {
    return chirality > 0 ? proj_plus(h) : proj_minus(h);
}

template <class S>
struct FischerParts {
    HomPoly<S> p_k;
    HomPoly<S> p_km1;
};

template <class S>
FischerParts<S> fischer_split(const HomPoly<S>& h) {
    require_harmonic(h);
    if (h.k() < 1) throw std::invalid_argument("poly: fischer_split needs k >= 1");
    S den(h.m() + 2 * h.k() - 2);
    HomPoly<S> q = cr_bar(h) * (S(1) / den);
    return {h - mul_u(q, -1), q};
}

// harmonic part of p in P_k: Σ_j c_j |u|^{2j} Δ^j p
template <class S>
HomPoly<S> harmonic_project(const HomPoly<S>& p) {
    const int m = p.m(), k = p.k();
    HomPoly<S> r = p;
    HomPoly<S> lap = p;
    S c(1);
    for (int j = 1; 2 * j <= k; ++j) {
        lap = laplacian(lap);
        c = -c / S(2 * j * (m + 2 * k - 2 * j - 2));
        HomPoly<S> t = lap;
        for (int i = 0; i < j; ++i) t = mul_norm2(t);
        r += t * c;
    }
    return r;
}

}  // namespace hsca::poly
