#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "hsca/clifford.hpp"
#include "hsca/poly.hpp"

namespace hsca::disc {

using clifford::Paravector;
using poly::HomPoly;

struct BoundaryFace {
    std::vector<double> center;
    double area = 0;
    int axis = 0;  // outward normal is sign·e_axis (e_0 = 1)
    int sign = 1;
    Paravector<double> normal() const;
};

class DomainGrid {
public:
    DomainGrid(std::vector<std::pair<double, double>> bounds, int N);

    int m() const { return m_; }
    int N() const { return N_; }
    int num_nodes() const { return nn_; }
    double h(int axis) const { return h_[std::size_t(axis)]; }
    double hmin() const;
    double cell_volume() const { return vol_; }
    double volume() const;
    const std::vector<std::pair<double, double>>& bounds() const { return b_; }
    bool contains(const double* y) const;
    double distance_to_boundary(const double* y) const;

    // node coordinates (cell centers), row-major num_nodes × m
    const double* node(int i) const { return &x_[std::size_t(i) * m_]; }
    Paravector<double> node_point(int i) const;
    const std::vector<double>& nodes_flat() const { return x_; }
    int index(const std::vector<int>& multi) const;
    std::vector<int> multi_index(int i) const;
    int stride(int axis) const { return stride_[std::size_t(axis)]; }

    const std::vector<BoundaryFace>& faces() const { return faces_; }

private:
    int m_, N_, nn_;
    std::vector<std::pair<double, double>> b_;
    std::vector<double> h_;
    double vol_;
    std::vector<int> stride_;
    std::vector<double> x_;
    std::vector<BoundaryFace> faces_;
};

std::shared_ptr<const DomainGrid> make_box_grid(std::vector<std::pair<double, double>> bounds, int N);

// chirality tag: +1 M_k^+, -1 M_k^-, 0 harmonic / unconstrained
struct GridField {
    std::shared_ptr<const DomainGrid> grid;
    int m = 0, k = 0, chirality = 0;
    int len = 0;  // nmono · 2^{m-1}
    std::vector<double> data;

    GridField() = default;
    GridField(std::shared_ptr<const DomainGrid> g, int k, int chirality);

    int num_nodes() const { return grid->num_nodes(); }
    double* at(int node) { return &data[std::size_t(node) * len]; }
    const double* at(int node) const { return &data[std::size_t(node) * len]; }
    HomPoly<double> poly(int node) const;
    void set(int node, const HomPoly<double>& p);

    GridField& operator+=(const GridField& o);
    GridField& operator-=(const GridField& o);
    GridField& operator*=(double s);
    friend GridField operator+(GridField a, const GridField& b) { return a += b; }
    friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
    friend GridField operator*(double s, GridField a) { return a *= s; }
};

struct AnalyticField {
    int m = 0, k = 0, chirality = 0;
    std::function<HomPoly<double>(const Paravector<double>&)> value;
    // optional exact ∂/∂x_j
    std::function<HomPoly<double>(const Paravector<double>&, int)> deriv;
};

GridField sample(const AnalyticField& f, std::shared_ptr<const DomainGrid> grid);

// central differences inside, second-order one-sided on the first/last layer
GridField field_derivative(const GridField& f, int axis);
// transpose of the stencil above (for discrete adjoints)
GridField field_derivative_transpose(const GridField& f, int axis);
AnalyticField field_derivative(const AnalyticField& f, int axis);

}  // namespace hsca::disc
