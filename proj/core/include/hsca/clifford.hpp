#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hsca/scalar.hpp"

namespace hsca::clifford {

constexpr int kMaxDim = 12;

// Blade A is a bitmask over generators e_1..e_{m-1}; bit j-1 stands for e_j.
// e_A e_B = sign(A,B) e_{A xor B} with e_i^2 = -1.
class Algebra {
public:
    explicit Algebra(int m);

    int m() const { return m_; }
    int dim() const { return dim_; }
    int sign(uint32_t a, uint32_t b) const { return sign_[std::size_t(a) * dim_ + b]; }

    static const Algebra& get(int m);

private:
    int m_;
    int dim_;
    std::vector<int8_t> sign_;
};

inline int grade(uint32_t blade) { return std::popcount(blade); }

// (-1)^{|A|(|A|+1)/2}
inline int conj_sign(uint32_t blade) {
    int g = grade(blade);
    return ((g * (g + 1) / 2) % 2) ? -1 : 1;
}

inline void check_dim(int m) {
    if (m < 2 || m > kMaxDim) throw std::invalid_argument("clifford: m out of range [2,12]: " + std::to_string(m));
}

template <class S = double>
class Multivector {
public:
    Multivector() = default;
    explicit Multivector(int m) : m_(m), c_(std::size_t(1) << (m - 1), S(0)) { check_dim(m); }
    Multivector(int m, std::vector<S> coeffs) : m_(m), c_(std::move(coeffs)) {
        check_dim(m);
        if (c_.size() != (std::size_t(1) << (m - 1))) throw std::invalid_argument("clifford: coefficient count");
    }

    static Multivector scalar(int m, S s) {
        Multivector r(m);
        r.c_[0] = s;
        return r;
    }
    // e_j, j in 1..m-1; j = 0 gives the unit.
    static Multivector e(int m, int j) {
        if (j < 0 || j >= m) throw std::invalid_argument("clifford: generator index");
        Multivector r(m);
        r.c_[j == 0 ? 0 : (1u << (j - 1))] = S(1);
        return r;
    }
    static Multivector blade(int m, uint32_t a, S s = S(1)) {
        Multivector r(m);
        r.c_.at(a) = s;
        return r;
    }

    int m() const { return m_; }
    int dim() const { return int(c_.size()); }
    const S& operator[](uint32_t a) const { return c_[a]; }
    S& operator[](uint32_t a) { return c_[a]; }
    const std::vector<S>& coeffs() const { return c_; }
    std::vector<S>& coeffs() { return c_; }

    Multivector& operator+=(const Multivector& o) {
        same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    Multivector& operator-=(const Multivector& o) {
        same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Multivector& operator*=(const S& s) {
        for (auto& x : c_) x *= s;
        return *this;
    }
    friend Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
    friend Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
    friend Multivector operator-(Multivector a) {
        for (auto& x : a.c_) x = -x;
        return a;
    }
    friend Multivector operator*(Multivector a, const S& s) { return a *= s; }
    friend Multivector operator*(const S& s, Multivector a) { return a *= s; }
    friend Multivector operator*(const Multivector& a, const Multivector& b) { return geometric_product(a, b); }
    friend bool operator==(const Multivector& a, const Multivector& b) { return a.m_ == b.m_ && a.c_ == b.c_; }

    void same(const Multivector& o) const {
        if (m_ != o.m_) throw std::invalid_argument("clifford: dimension mismatch");
    }

    friend Multivector geometric_product(const Multivector& a, const Multivector& b) {
        a.same(b);
        const Algebra& alg = Algebra::get(a.m_);
        Multivector r(a.m_);
        const uint32_t n = uint32_t(a.c_.size());
        for (uint32_t i = 0; i < n; ++i) {
            if (a.c_[i] == S(0)) continue;
            for (uint32_t j = 0; j < n; ++j) {
                if (b.c_[j] == S(0)) continue;
                if (alg.sign(i, j) > 0)
                    r.c_[i ^ j] += a.c_[i] * b.c_[j];
                else
                    r.c_[i ^ j] -= a.c_[i] * b.c_[j];
            }
        }
        return r;
    }

private:
    int m_ = 0;
    std::vector<S> c_;
};

template <class S>
Multivector<S> conjugate(const Multivector<S>& a) {
    Multivector<S> r = a;
    for (uint32_t i = 0; i < uint32_t(r.dim()); ++i)
        if (conj_sign(i) < 0) r[i] = -r[i];
    return r;
}

template <class S>
Multivector<S> grade_project(const Multivector<S>& a, int g) {
    Multivector<S> r(a.m());
    for (uint32_t i = 0; i < uint32_t(a.dim()); ++i)
        if (grade(i) == g) r[i] = a[i];
    return r;
}

template <class S>
double norm(const Multivector<S>& a) {
    double s = 0;
    for (const auto& x : a.coeffs()) {
        double d = to_double(x);
        s += d * d;
    }
    return std::sqrt(s);
}

template <class S>
double max_abs(const Multivector<S>& a) {
    double s = 0;
    for (const auto& x : a.coeffs()) s = std::max(s, std::abs(to_double(x)));
    return s;
}

template <class S = double>
class Paravector {
public:
    Paravector() = default;
    explicit Paravector(int m) : x_(std::size_t(m), S(0)) { check_dim(m); }
    explicit Paravector(std::vector<S> comps) : x_(std::move(comps)) { check_dim(int(x_.size())); }

    int m() const { return int(x_.size()); }
    const S& operator[](int i) const { return x_[std::size_t(i)]; }
    S& operator[](int i) { return x_[std::size_t(i)]; }
    const std::vector<S>& comps() const { return x_; }

    Multivector<S> to_multivector() const {
        Multivector<S> r(m());
        r[0] = x_[0];
        for (int j = 1; j < m(); ++j) r[1u << (j - 1)] = x_[std::size_t(j)];
        return r;
    }
    static Paravector from_multivector(const Multivector<S>& a, double tol = 0.0) {
        Paravector p(a.m());
        for (uint32_t i = 0; i < uint32_t(a.dim()); ++i) {
            if (grade(i) <= 1) continue;
            if (std::abs(to_double(a[i])) > tol) throw std::invalid_argument("clifford: not a paravector");
        }
        p.x_[0] = a[0];
        for (int j = 1; j < a.m(); ++j) p.x_[std::size_t(j)] = a[1u << (j - 1)];
        return p;
    }

    Paravector bar() const {
        Paravector r = *this;
        for (int j = 1; j < m(); ++j) r.x_[std::size_t(j)] = -r.x_[std::size_t(j)];
        return r;
    }
    S norm_sq() const {
        S s(0);
        for (const auto& v : x_) s += v * v;
        return s;
    }
    double norm() const { return std::sqrt(to_double(norm_sq())); }

    friend Paravector operator+(Paravector a, const Paravector& b) {
        for (int i = 0; i < a.m(); ++i) a.x_[std::size_t(i)] += b.x_[std::size_t(i)];
        return a;
    }
    friend Paravector operator-(Paravector a, const Paravector& b) {
        for (int i = 0; i < a.m(); ++i) a.x_[std::size_t(i)] -= b.x_[std::size_t(i)];
        return a;
    }
    friend Paravector operator*(const S& s, Paravector a) {
        for (auto& v : a.x_) v *= s;
        return a;
    }

private:
    std::vector<S> x_;
};

template <class S>
S euclid(const Paravector<S>& x, const Paravector<S>& y) {
    if (x.m() != y.m()) throw std::invalid_argument("clifford: dimension mismatch");
    S s(0);
    for (int i = 0; i < x.m(); ++i) s += x[i] * y[i];
    return s;
}

template <class S>
struct ParaProducts {
    S scalar_part;
    Multivector<S> wedge_part;
};

// <x,y> and x∧ȳ = Σ_{0<=i<j} e_i e_j (x_i y_j - x_j y_i), e_0 = 1.
template <class S>
ParaProducts<S> para_products(const Paravector<S>& x, const Paravector<S>& y) {
    const int m = x.m();
    if (y.m() != m) throw std::invalid_argument("clifford: dimension mismatch");
    Multivector<S> w(m);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            uint32_t a = (i == 0 ? 0u : (1u << (i - 1))) ^ (1u << (j - 1));
            w[a] += x[i] * y[j] - x[j] * y[i];
        }
    return {euclid(x, y), std::move(w)};
}

// a x a for unit a, via -x̄ + 2<a,x̄>a.
template <class S>
Paravector<S> reflect(const Paravector<S>& a, const Paravector<S>& x, double tol = 1e-12) {
    if (std::abs(to_double(a.norm_sq()) - 1.0) > tol) throw std::invalid_argument("clifford: reflect needs |a| = 1");
    Paravector<S> xb = x.bar();
    S t = S(2) * euclid(a, xb);
    Paravector<S> r(x.m());
    for (int i = 0; i < x.m(); ++i) r[i] = t * a[i] - xb[i];
    return r;
}

// Euclidean hyperplane reflection u - 2<a,u>a / |a|^2 (a need not be unit).
template <class S>
Paravector<S> mirror(const Paravector<S>& a, const Paravector<S>& u) {
    S t = S(2) * euclid(a, u) / a.norm_sq();
    Paravector<S> r = u;
    for (int i = 0; i < u.m(); ++i) r[i] -= t * a[i];
    return r;
}

}  // namespace hsca::clifford
