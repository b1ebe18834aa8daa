#include "hsca/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hsca::disc {

Paravector<double> BoundaryFace::normal() const {
    Paravector<double> n(int(center.size()));
    n[axis] = sign;
    return n;
}

DomainGrid::DomainGrid(std::vector<std::pair<double, double>> bounds, int N)
    : m_(int(bounds.size())), N_(N), b_(std::move(bounds)) {
    clifford::check_dim(m_);
    if (N < 2) throw std::invalid_argument("grid: N >= 2");
    vol_ = 1;
    nn_ = 1;
    for (int i = 0; i < m_; ++i) {
        double w = b_[std::size_t(i)].second - b_[std::size_t(i)].first;
        if (!(w > 0)) throw std::invalid_argument("grid: degenerate box");
        h_.push_back(w / N);
        vol_ *= w / N;
        stride_.push_back(nn_);
        nn_ *= N;
    }
    x_.resize(static_cast<std::size_t>(nn_) * m_);
    for (int i = 0; i < nn_; ++i) {
        int r = i;
        for (int a = 0; a < m_; ++a) {
            int ia = r % N;
            r /= N;
            x_[std::size_t(i) * m_ + a] = b_[std::size_t(a)].first + (ia + 0.5) * h_[std::size_t(a)];
        }
    }
    // boundary faces: outer faces of the boundary cells
    for (int axis = 0; axis < m_; ++axis)
        for (int side = 0; side < 2; ++side) {
            double area = 1;
            for (int a = 0; a < m_; ++a)
                if (a != axis) area *= h_[std::size_t(a)];
            int nf = nn_ / N;
            for (int f = 0; f < nf; ++f) {
                BoundaryFace face;
                face.center.resize(static_cast<std::size_t>(m_));
                face.area = area;
                face.axis = axis;
                face.sign = side ? 1 : -1;
                int r = f;
                for (int a = 0; a < m_; ++a) {
                    if (a == axis) {
                        face.center[std::size_t(a)] = side ? b_[std::size_t(a)].second : b_[std::size_t(a)].first;
                        continue;
                    }
                    int ia = r % N;
                    r /= N;
                    face.center[std::size_t(a)] = b_[std::size_t(a)].first + (ia + 0.5) * h_[std::size_t(a)];
                }
                faces_.push_back(std::move(face));
            }
        }
}

double DomainGrid::hmin() const { return *std::min_element(h_.begin(), h_.end()); }

double DomainGrid::volume() const {
    double v = 1;
    for (const auto& [a, b] : b_) v *= b - a;
    return v;
}

bool DomainGrid::contains(const double* y) const {
    for (int a = 0; a < m_; ++a)
        if (y[a] <= b_[std::size_t(a)].first || y[a] >= b_[std::size_t(a)].second) return false;
    return true;
}

double DomainGrid::distance_to_boundary(const double* y) const {
    double d = INFINITY;
    for (int a = 0; a < m_; ++a) d = std::min({d, y[a] - b_[std::size_t(a)].first, b_[std::size_t(a)].second - y[a]});
    return d;
}

Paravector<double> DomainGrid::node_point(int i) const {
    return Paravector<double>(std::vector<double>(node(i), node(i) + m_));
}

int DomainGrid::index(const std::vector<int>& multi) const {
    int i = 0;
    for (int a = 0; a < m_; ++a) i += multi[std::size_t(a)] * stride_[std::size_t(a)];
    return i;
}

std::vector<int> DomainGrid::multi_index(int i) const {
    std::vector<int> r(static_cast<std::size_t>(m_));
    for (int a = 0; a < m_; ++a) {
        r[std::size_t(a)] = i % N_;
        i /= N_;
    }
    return r;
}

std::shared_ptr<const DomainGrid> make_box_grid(std::vector<std::pair<double, double>> bounds, int N) {
    return std::make_shared<const DomainGrid>(std::move(bounds), N);
}

GridField::GridField(std::shared_ptr<const DomainGrid> g, int k_, int chir)
    : grid(std::move(g)), m(grid->m()), k(k_), chirality(chir) {
    len = poly::MonomialTable::get(m, k)->size() * (1 << (m - 1));
    data.assign(static_cast<std::size_t>(grid->num_nodes()) * len, 0.0);
}

HomPoly<double> GridField::poly(int node) const {
    HomPoly<double> p(m, k);
    std::copy(at(node), at(node) + len, p.coeffs().begin());
    return p;
}

void GridField::set(int node, const HomPoly<double>& p) {
    if (p.m() != m || p.k() != k) throw std::invalid_argument("field: polynomial shape mismatch");
    std::copy(p.coeffs().begin(), p.coeffs().end(), at(node));
}

static void check_same(const GridField& a, const GridField& b) {
    if (a.grid != b.grid || a.k != b.k || a.m != b.m) throw std::invalid_argument("field: grid mismatch");
}

GridField& GridField::operator+=(const GridField& o) {
    check_same(*this, o);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    if (chirality != o.chirality) chirality = 0;
    return *this;
}
GridField& GridField::operator-=(const GridField& o) {
    check_same(*this, o);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
    if (chirality != o.chirality) chirality = 0;
    return *this;
}
GridField& GridField::operator*=(double s) {
    for (auto& v : data) v *= s;
    return *this;
}

GridField sample(const AnalyticField& f, std::shared_ptr<const DomainGrid> grid) {
    if (grid->m() != f.m) throw std::invalid_argument("sample: dimension mismatch");
    GridField g(grid, f.k, f.chirality);
    for (int i = 0; i < grid->num_nodes(); ++i) g.set(i, f.value(grid->node_point(i)));
    return g;
}

namespace {

// stencil of node i along an axis: up to 3 (offset, weight) pairs
int stencil(int ia, int N, double h, int* off, double* w) {
    if (ia == 0) {
        off[0] = 0, off[1] = 1, off[2] = 2;
        w[0] = -1.5 / h, w[1] = 2.0 / h, w[2] = -0.5 / h;
        return 3;
    }
    if (ia == N - 1) {
        off[0] = 0, off[1] = -1, off[2] = -2;
        w[0] = 1.5 / h, w[1] = -2.0 / h, w[2] = 0.5 / h;
        return 3;
    }
    off[0] = 1, off[1] = -1;
    w[0] = 0.5 / h, w[1] = -0.5 / h;
    return 2;
}

GridField apply_stencil(const GridField& f, int axis, bool transpose) {
    const DomainGrid& g = *f.grid;
    if (g.N() < 4) throw std::invalid_argument("field_derivative: grid too coarse (N >= 4)");
    if (axis < 0 || axis >= g.m()) throw std::invalid_argument("field_derivative: axis");
    GridField r(f.grid, f.k, 0);
    const int N = g.N(), st = g.stride(axis), L = f.len;
    int off[3];
    double w[3];
    for (int i = 0; i < g.num_nodes(); ++i) {
        int ia = (i / st) % N;
        int n = stencil(ia, N, g.h(axis), off, w);
        for (int s = 0; s < n; ++s) {
            int j = i + off[s] * st;
            const double* src = transpose ? f.at(i) : f.at(j);
            double* dst = transpose ? r.at(j) : r.at(i);
            for (int c = 0; c < L; ++c) dst[c] += w[s] * src[c];
        }
    }
    return r;
}

}  // namespace

GridField field_derivative(const GridField& f, int axis) { return apply_stencil(f, axis, false); }
GridField field_derivative_transpose(const GridField& f, int axis) { return apply_stencil(f, axis, true); }

AnalyticField field_derivative(const AnalyticField& f, int axis) {
    if (!f.deriv) throw std::invalid_argument("field_derivative: analytic field has no derivative callback");
    AnalyticField r;
    r.m = f.m;
    r.k = f.k;
    auto d = f.deriv;
    r.value = [d, axis](const Paravector<double>& x) { return d(x, axis); };
    return r;
}

}  // namespace hsca::disc
