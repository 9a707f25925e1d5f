#pragma once

// L_h = G^T A_h G + diag(V).
// G maps lattice values to edge differences (u(n + e_a) - u(n)) / h_a, restricted to the unknowns.
// A_h couples the dim edges meeting at each corner of each cell:
//   A_h = sum_cells sum_corners 2^-dim S^T A_cell S,
// S picking the dim edges of that cell incident to the corner. Every edge is covered with total
// weight one, so <A_h g, g> >= gamma |g|^2 cell by cell, and the diagonal of A_h on an edge is the
// arithmetic mean of the adjacent cell matrices. Nodes and edges carry the same volume weight,
// hence G* = G^T.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "bilinear/coefficients.hpp"
#include "bilinear/errors.hpp"
#include "bilinear/grid.hpp"

namespace bilinear {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Complex values on the edges of a grid (index from Grid::edge_id).
struct EdgeField {
    Grid grid;
    Eigen::VectorXcd values;
};

namespace detail {

inline bool edge_in_lattice(const Grid& g, int axis, int start) {
    if (g.boundary() == Boundary::Periodic) return true;
    return g.lattice_multi(start)[axis] < g.cells(axis);
}

/// Edge differences on the full lattice (edges x lattice nodes).
inline SparseMatrix lattice_gradient(const Grid& g) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(2 * g.edge_count());
    for (int a = 0; a < g.dim(); ++a) {
        const double ih = 1.0 / g.spacing(a);
        for (int n = 0; n < g.lattice_count(); ++n) {
            if (!edge_in_lattice(g, a, n)) continue;
            const int e = g.edge_id(a, n);
            t.emplace_back(e, n, -ih);
            t.emplace_back(e, g.shift(n, a, +1), ih);
        }
    }
    SparseMatrix m(g.edge_count(), g.lattice_count());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

/// Lattice -> unknown restriction as a (lattice x unknowns) selection.
inline SparseMatrix unknown_embedding(const Grid& g) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(g.unknowns());
    for (int k = 0; k < g.unknowns(); ++k) t.emplace_back(g.lattice_of(k), k, 1.0);
    SparseMatrix m(g.lattice_count(), g.unknowns());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

} // namespace detail

inline SparseMatrix gradient_matrix(const Grid& g) {
    SparseMatrix m = detail::lattice_gradient(g) * detail::unknown_embedding(g);
    m.prune(0.0);
    return m;
}

/// Corner-averaged edge coefficient operator for a cell field.
inline SparseMatrix edge_coefficients(const CoefficientField& a) {
    const Grid& g = a.grid();
    const int dim = g.dim();
    const double w = 1.0 / (1 << dim);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(g.cell_count()) * (1 << dim) * dim * dim);
    std::vector<int> edges(dim);
    for (int c = 0; c < g.cell_count(); ++c) {
        const auto& m = a[c];
        for (unsigned kappa = 0; kappa < (1u << dim); ++kappa) {
            for (int ax = 0; ax < dim; ++ax) edges[ax] = g.edge_id(ax, g.cell_corner(c, kappa & ~(1u << ax)));
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    if (m(i, j) != 0.0) t.emplace_back(edges[i], edges[j], w * m(i, j));
        }
    }
    SparseMatrix ah(g.edge_count(), g.edge_count());
    ah.setFromTriplets(t.begin(), t.end());
    return ah;
}

class DiscreteOperator {
public:
    DiscreteOperator() = default;
    DiscreteOperator(Grid grid, SparseMatrix G, SparseMatrix Ah, Eigen::VectorXd V, double gamma)
        : grid_(std::move(grid)), G_(std::move(G)), Ah_(std::move(Ah)), V_(std::move(V)), gamma_(gamma) {
        SparseMatrix gt = G_.transpose();
        L_ = gt * (Ah_ * G_);
        for (int k = 0; k < V_.size(); ++k) L_.coeffRef(k, k) += V_[k];
        L_.makeCompressed();
    }

    const Grid& grid() const noexcept { return grid_; }
    const SparseMatrix& matrix() const noexcept { return L_; }
    const SparseMatrix& gradient() const noexcept { return G_; }
    const SparseMatrix& edge_coefficients() const noexcept { return Ah_; }
    const Eigen::VectorXd& potential() const noexcept { return V_; }
    double gamma() const noexcept { return gamma_; }
    int unknowns() const noexcept { return static_cast<int>(L_.rows()); }

    /// All off-diagonal entries nonpositive (discrete maximum principle holds).
    bool monotone() const {
        for (int r = 0; r < L_.outerSize(); ++r)
            for (SparseMatrix::InnerIterator it(L_, r); it; ++it)
                if (it.col() != it.row() && it.value() > 0.0) return false;
        return true;
    }

private:
    Grid grid_;
    SparseMatrix G_, Ah_, L_;
    Eigen::VectorXd V_;
    double gamma_ = 0.0;
};

inline DiscreteOperator assemble(const Grid& grid, const CoefficientField& a, const PotentialField& v) {
    if (!a.grid().same_shape(grid) || !v.grid().same_shape(grid))
        throw DimensionError("coefficient and potential fields must live on the operator grid");
    const double gamma = check_accretive(a);
    if (!(gamma > 0.0)) {
        std::ostringstream os;
        os << "coefficient field is not uniformly accretive: gamma = " << gamma;
        throw ConstructionError(os.str());
    }
    return DiscreteOperator(grid, gradient_matrix(grid), edge_coefficients(a), v.values(), gamma);
}

inline DiscreteOperator assemble(const Grid& grid, const CoefficientField& a) {
    return assemble(grid, a, PotentialField::zero(grid));
}

inline GridFunction apply(const DiscreteOperator& op, const GridFunction& u) {
    if (!u.grid().same_shape(op.grid()) || u.size() != op.unknowns())
        throw DimensionError("grid function does not match the operator");
    return GridFunction(op.grid(), op.matrix() * u.values());
}

/// Edge differences of u, Dirichlet layer taken from `boundary` (zero by default).
inline EdgeField gradient(const GridFunction& u, const std::function<cplx(const Grid::Point&)>& boundary = {}) {
    const Grid& g = u.grid();
    if (!boundary) return {g, gradient_matrix(g) * u.values()};
    return {g, detail::lattice_gradient(g) * u.lattice_values(boundary)};
}

/// G* w = G^T w
inline GridFunction divergence_adjoint(const EdgeField& w) {
    if (w.values.size() != w.grid.edge_count()) throw DimensionError("edge field does not match grid");
    return GridFunction(w.grid, gradient_matrix(w.grid).transpose() * w.values);
}

/// sum over edges of |w|^2 h^dim
inline double edge_norm_squared(const EdgeField& w) { return w.values.squaredNorm() * w.grid.cell_volume(); }

/// Node-wise sum over axes of the mean of |grad u|^2 on the two edges meeting the node.
inline Eigen::VectorXd node_gradient_squared(const EdgeField& w) {
    const Grid& g = w.grid;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(g.unknowns());
    for (int k = 0; k < g.unknowns(); ++k) {
        const int n = g.lattice_of(k);
        for (int a = 0; a < g.dim(); ++a) {
            const int back = g.shift(n, a, -1);
            out[k] += 0.5 * (std::norm(w.values[g.edge_id(a, back)]) + std::norm(w.values[g.edge_id(a, n)]));
        }
    }
    return out;
}

/// |u|_*^2 = |grad u|^2 + V |u|^2 at each unknown.
inline Eigen::VectorXd star_norm_squared(const GridFunction& u, const Eigen::VectorXd& v,
                                         const std::function<cplx(const Grid::Point&)>& boundary = {}) {
    Eigen::VectorXd s = node_gradient_squared(gradient(u, boundary));
    if (v.size()) {
        if (v.size() != u.size()) throw DimensionError("potential does not match grid function");
        s += v.cwiseProduct(u.values().cwiseAbs2());
    }
    return s;
}

inline GridFunction star_norm(const GridFunction& u, const PotentialField& v,
                              const std::function<cplx(const Grid::Point&)>& boundary = {}) {
    return GridFunction(u.grid(), star_norm_squared(u, v.values(), boundary).cwiseSqrt().cast<cplx>());
}

inline GridFunction star_norm(const GridFunction& u, const std::function<cplx(const Grid::Point&)>& boundary = {}) {
    return GridFunction(u.grid(), star_norm_squared(u, Eigen::VectorXd(), boundary).cwiseSqrt().cast<cplx>());
}

} // namespace bilinear
