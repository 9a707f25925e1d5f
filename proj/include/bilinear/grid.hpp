#pragma once

// Vertex-centred tensor grids on a box. Nodes sit at lower + i*h per axis.
//   Dirichlet: i = 0..cells, the outer layer carries the boundary value 0 and is not an unknown.
//   Periodic:  i = 0..cells-1, index cells wraps to 0.
// Edges join lattice neighbours along one axis; edge (a, n) runs from node n to n + e_a.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bilinear/errors.hpp"

namespace bilinear {

using cplx = std::complex<double>;

enum class Boundary { Dirichlet, Periodic };

inline const char* to_string(Boundary b) { return b == Boundary::Dirichlet ? "dirichlet" : "periodic"; }

class Grid {
public:
    using Index = std::array<int, 3>;
    using Point = Eigen::Vector3d;

    Grid() = default;

    Grid(int dim, std::array<int, 3> cells, std::array<double, 3> lower, std::array<double, 3> upper,
         Boundary boundary)
        : dim_(dim), cells_(cells), lower_(lower), upper_(upper), boundary_(boundary) {
        if (dim < 1 || dim > 3) throw ConstructionError("grid dimension must be 1, 2 or 3");
        for (int a = 0; a < 3; ++a) {
            if (a >= dim) {
                cells_[a] = 1;
                lower_[a] = 0.0;
                upper_[a] = 1.0;
                continue;
            }
            if (cells_[a] < 2) throw ConstructionError("grid needs at least 2 cells per axis");
            if (!(upper_[a] > lower_[a])) throw ConstructionError("grid extent must have upper > lower");
        }
        build();
    }

    /// Same cell count and extent [lower, upper] on every axis.
    static Grid cube(int dim, int cells, double lower, double upper, Boundary boundary) {
        return Grid(dim, {cells, cells, cells}, {lower, lower, lower}, {upper, upper, upper}, boundary);
    }

    int dim() const noexcept { return dim_; }
    Boundary boundary() const noexcept { return boundary_; }
    int cells(int axis) const { return cells_[axis]; }
    double lower(int axis) const { return lower_[axis]; }
    double upper(int axis) const { return upper_[axis]; }
    double spacing(int axis) const { return (upper_[axis] - lower_[axis]) / cells_[axis]; }
    double min_spacing() const {
        double h = spacing(0);
        for (int a = 1; a < dim_; ++a) h = std::min(h, spacing(a));
        return h;
    }
    /// Volume attached to a node, an edge and a cell alike.
    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim_; ++a) v *= spacing(a);
        return v;
    }

    /// Lattice nodes per axis (boundary layer included for Dirichlet).
    int lattice_size(int axis) const {
        if (axis >= dim_) return 1;
        return boundary_ == Boundary::Dirichlet ? cells_[axis] + 1 : cells_[axis];
    }
    int lattice_count() const { return maps_ ? maps_->lattice_count : 0; }
    int unknowns() const { return maps_ ? static_cast<int>(maps_->unknown_to_lattice.size()) : 0; }
    int cell_count() const { return cells_[0] * cells_[1] * cells_[2]; }
    int edge_count() const { return dim_ * lattice_count(); }

    int lattice_index(const Index& n) const { return n[0] + lattice_size(0) * (n[1] + lattice_size(1) * n[2]); }
    Index lattice_multi(int idx) const {
        Index n{0, 0, 0};
        n[0] = idx % lattice_size(0);
        idx /= lattice_size(0);
        n[1] = idx % lattice_size(1);
        n[2] = idx / lattice_size(1);
        return n;
    }

    /// Unknown number of a lattice node, -1 for Dirichlet boundary nodes.
    int unknown_of(int lattice) const { return maps_->lattice_to_unknown[lattice]; }
    int lattice_of(int unknown) const { return maps_->unknown_to_lattice[unknown]; }

    /// Neighbour index with periodic wrap; -1 when it leaves a Dirichlet lattice.
    int shift(int lattice, int axis, int step) const {
        Index n = lattice_multi(lattice);
        n[axis] += step;
        const int m = lattice_size(axis);
        if (boundary_ == Boundary::Periodic) {
            n[axis] = ((n[axis] % m) + m) % m;
        } else if (n[axis] < 0 || n[axis] >= m) {
            return -1;
        }
        return lattice_index(n);
    }

    Point node_point(const Index& n) const {
        Point x = Point::Zero();
        for (int a = 0; a < dim_; ++a) x[a] = lower_[a] + n[a] * spacing(a);
        return x;
    }
    Point node_point(int lattice) const { return node_point(lattice_multi(lattice)); }
    Point unknown_point(int unknown) const { return node_point(lattice_of(unknown)); }

    /// Cells are indexed by their lower corner node.
    Index cell_multi(int cell) const {
        Index c{0, 0, 0};
        c[0] = cell % cells_[0];
        cell /= cells_[0];
        c[1] = cell % cells_[1];
        c[2] = cell / cells_[1];
        return c;
    }
    int cell_index(const Index& c) const { return c[0] + cells_[0] * (c[1] + cells_[1] * c[2]); }
    Point cell_center(int cell) const {
        const Index c = cell_multi(cell);
        Point x = Point::Zero();
        for (int a = 0; a < dim_; ++a) x[a] = lower_[a] + (c[a] + 0.5) * spacing(a);
        return x;
    }

    /// Edge (axis, start node). Dirichlet edges leaving the lattice are never referenced.
    int edge_id(int axis, int lattice_start) const { return axis * lattice_count() + lattice_start; }
    int edge_axis(int edge) const { return edge / lattice_count(); }
    int edge_start(int edge) const { return edge % lattice_count(); }

    /// Lattice node at corner kappa (bit a = offset along axis a) of a cell.
    int cell_corner(int cell, unsigned kappa) const {
        Index c = cell_multi(cell);
        for (int a = 0; a < dim_; ++a) {
            if (kappa & (1u << a)) {
                c[a] += 1;
                if (boundary_ == Boundary::Periodic && c[a] == cells_[a]) c[a] = 0;
            }
        }
        return lattice_index(c);
    }

    bool same_shape(const Grid& o) const {
        return dim_ == o.dim_ && cells_ == o.cells_ && lower_ == o.lower_ && upper_ == o.upper_ &&
               boundary_ == o.boundary_;
    }

    std::string describe() const {
        std::ostringstream os;
        os << dim_ << "D ";
        for (int a = 0; a < dim_; ++a) os << (a ? "x" : "") << cells_[a];
        os << " cells, " << to_string(boundary_) << ", h=" << min_spacing();
        return os.str();
    }

private:
    struct Maps {
        int lattice_count = 0;
        std::vector<int> lattice_to_unknown;
        std::vector<int> unknown_to_lattice;
    };

    void build() {
        auto m = std::make_shared<Maps>();
        m->lattice_count = lattice_size(0) * lattice_size(1) * lattice_size(2);
        m->lattice_to_unknown.assign(m->lattice_count, -1);
        for (int i = 0; i < m->lattice_count; ++i) {
            const Index n = lattice_multi(i);
            bool interior = true;
            if (boundary_ == Boundary::Dirichlet)
                for (int a = 0; a < dim_; ++a) interior = interior && n[a] > 0 && n[a] < cells_[a];
            if (interior) {
                m->lattice_to_unknown[i] = static_cast<int>(m->unknown_to_lattice.size());
                m->unknown_to_lattice.push_back(i);
            }
        }
        maps_ = std::move(m);
    }

    int dim_ = 1;
    std::array<int, 3> cells_{2, 1, 1};
    std::array<double, 3> lower_{0, 0, 0};
    std::array<double, 3> upper_{1, 1, 1};
    Boundary boundary_ = Boundary::Dirichlet;
    std::shared_ptr<const Maps> maps_;
};

/// Complex values on the unknowns of a grid.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(Grid grid) : grid_(std::move(grid)), values_(Eigen::VectorXcd::Zero(grid_.unknowns())) {}
    GridFunction(Grid grid, Eigen::VectorXcd values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.unknowns())
            throw DimensionError("grid function length " + std::to_string(values_.size()) + " does not match " +
                                 std::to_string(grid_.unknowns()) + " unknowns");
    }

    template <class F>
    static GridFunction sample(const Grid& grid, F&& f) {
        GridFunction g(grid);
        for (int k = 0; k < grid.unknowns(); ++k) g.values_[k] = cplx(f(grid.unknown_point(k)));
        return g;
    }

    const Grid& grid() const noexcept { return grid_; }
    const Eigen::VectorXcd& values() const noexcept { return values_; }
    Eigen::VectorXcd& values() noexcept { return values_; }
    Eigen::Index size() const noexcept { return values_.size(); }
    cplx operator[](Eigen::Index k) const { return values_[k]; }
    cplx& operator[](Eigen::Index k) { return values_[k]; }

    /// (sum |u|^p h^dim)^(1/p); p = inf gives the max modulus.
    double norm(double p) const {
        if (std::isinf(p)) return sup_norm();
        double s = 0.0;
        for (const auto& z : values_) s += std::pow(std::abs(z), p);
        return std::pow(s * grid_.cell_volume(), 1.0 / p);
    }
    double l2_norm() const { return std::sqrt(values_.squaredNorm() * grid_.cell_volume()); }
    double sup_norm() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }
    /// sum u h^dim
    cplx integral() const { return values_.sum() * grid_.cell_volume(); }
    /// sum u conj(w) h^dim
    cplx inner(const GridFunction& w) const {
        require_same_grid(w);
        return w.values_.dot(values_) * grid_.cell_volume();
    }

    void require_same_grid(const GridFunction& w) const {
        if (!grid_.same_shape(w.grid_) || values_.size() != w.values_.size())
            throw DimensionError("grid functions live on different grids");
    }

    GridFunction& operator+=(const GridFunction& w) {
        require_same_grid(w);
        values_ += w.values_;
        return *this;
    }
    GridFunction& operator-=(const GridFunction& w) {
        require_same_grid(w);
        values_ -= w.values_;
        return *this;
    }
    GridFunction& operator*=(cplx s) {
        values_ *= s;
        return *this;
    }
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(cplx s, GridFunction a) { return a *= s; }

    /// Full lattice vector, Dirichlet layer filled from `boundary` (zero by default).
    Eigen::VectorXcd lattice_values(const std::function<cplx(const Grid::Point&)>& boundary = {}) const {
        Eigen::VectorXcd full = Eigen::VectorXcd::Zero(grid_.lattice_count());
        for (int i = 0; i < grid_.lattice_count(); ++i) {
            const int k = grid_.unknown_of(i);
            if (k >= 0)
                full[i] = values_[k];
            else if (boundary)
                full[i] = boundary(grid_.node_point(i));
        }
        return full;
    }

private:
    Grid grid_;
    Eigen::VectorXcd values_;
};

/// 17 significant digits, shortest form.
inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// CSV with columns x[,y[,z]],re,im, one row per unknown.
inline void write_csv(std::ostream& os, const GridFunction& u) {
    static const char* axes[] = {"x", "y", "z"};
    const Grid& g = u.grid();
    for (int a = 0; a < g.dim(); ++a) os << axes[a] << ',';
    os << "re,im\n";
    for (int k = 0; k < g.unknowns(); ++k) {
        const auto x = g.unknown_point(k);
        for (int a = 0; a < g.dim(); ++a) os << format_real(x[a]) << ',';
        os << format_real(u[k].real()) << ',' << format_real(u[k].imag()) << '\n';
    }
}

} // namespace bilinear
